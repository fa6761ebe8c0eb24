/** Shared builders for wire-shaped payloads used across the test suites. */

import { Envelope, FeedView, Snapshot } from "../src/protocol.js";
import { ViewModel, applyEnvelope, createViewModel } from "../src/viewmodel.js";

export function makeSnapshot(overrides: Partial<Snapshot> = {}): Snapshot {
  return {
    tick: 4,
    sim_time: 0.4,
    mode: "human_teaming",
    paused: false,
    agents: [
      {
        id: "uav-1",
        position: { lat: 44.0, lon: -72.5, alt: 60 },
        energy_used: 120,
        energy_budget: 20000,
        task: "tgt-1",
        schedule: ["tgt-1", "tgt-2"],
      },
    ],
    targets: [
      {
        id: "tgt-1",
        position: { lat: 44.002, lon: -72.498, alt: 0 },
        reward: 10000,
        state: "unknown",
      },
      {
        id: "tgt-2",
        position: { lat: 43.998, lon: -72.503, alt: 0 },
        reward: 10000,
        state: "unknown",
      },
    ],
    feeds: [makeFeed()],
    constraints: [],
    score: { rate: 0, accuracy: 0, score: 0, classifications: 0, correct: 0, elapsed: 0.4 },
    ...overrides,
  };
}

export function makeFeed(overrides: Partial<FeedView> = {}): FeedView {
  const level = overrides.resolution_level ?? 2;
  const size = 2 ** level;
  return {
    target_id: "tgt-1",
    clarity: 0.31,
    resolution_level: level,
    image: { size, cells: Array.from({ length: size * size }, (_, i) => i % 256) },
    ...overrides,
  };
}

export function envelope(seq: number, kind: Envelope["kind"], payload: unknown): Envelope {
  return { seq, kind, sim_time: seq / 10, payload: payload as Record<string, unknown> };
}

/** A view that has applied a hello at seq 1. */
export function joinedView(snapshot: Snapshot = makeSnapshot()): ViewModel {
  return applyEnvelope(
    createViewModel(),
    envelope(1, "hello", { client: "op-test", session: "sess-1", snapshot }),
  );
}
