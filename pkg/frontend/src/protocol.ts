/** Wire types for the session service's HTTP + stream protocol.
 *
 * Everything the console displays comes from these payloads; the UI never
 * simulates anything locally.
 */

export interface GeoPosition {
  lat: number;
  lon: number;
  alt: number;
}

export interface AgentView {
  id: string;
  position: GeoPosition;
  energy_used: number;
  energy_budget: number;
  task: string | null;
  schedule: string[];
}

export interface ClassificationView {
  actor_kind: "human" | "autonomous";
  actor_id: string;
  target_id: string;
  label: "casualty" | "no_casualty";
  sim_time: number;
  correct: boolean;
}

export interface TargetView {
  id: string;
  position: GeoPosition;
  reward: number;
  state: "unknown" | "classified";
  classification?: ClassificationView;
}

export interface ImageDescriptor {
  size: number;
  /** Row-major grayscale cells, length = size * size, values 0..255. */
  cells: number[];
}

export interface FeedView {
  target_id: string;
  clarity: number;
  resolution_level: number;
  image: ImageDescriptor;
}

export interface ConstraintView {
  kind: "pin" | "forbid";
  agent: string;
  task: string;
  source: string;
}

export interface ScoreView {
  rate: number;
  accuracy: number;
  score: number;
  classifications: number;
  correct: number;
  elapsed: number;
}

export interface Snapshot {
  tick: number;
  sim_time: number;
  mode: "autonomous" | "human_teaming";
  paused: boolean;
  agents: AgentView[];
  targets: TargetView[];
  feeds: FeedView[];
  constraints: ConstraintView[];
  score: ScoreView;
}

export type EnvelopeKind =
  | "hello"
  | "snapshot"
  | "event"
  | "command_ack"
  | "command_reject";

export interface Envelope {
  seq: number;
  kind: EnvelopeKind;
  sim_time: number;
  payload: Record<string, unknown>;
}

export interface HelloPayload {
  client: string;
  session: string;
  snapshot: Snapshot;
}

/** Command frames the console may emit over the stream. */
export type CommandFrame =
  | { type: "classify"; target: string; label: "casualty" | "no_casualty" }
  | { type: "reassign"; agent: string; target: string | null }
  | { type: "set_mode"; mode: "autonomous" | "human_teaming" }
  | { type: "pause" }
  | { type: "resume" };

/** Echo of a command inside ack/reject payloads (server adds seq/issuer). */
export interface CommandEcho {
  type: string;
  seq: number;
  issued_by: string;
  target?: string | null;
  label?: string;
  agent?: string;
  mode?: string;
}

export interface CommandOutcomePayload {
  command: CommandEcho;
  ok: boolean;
  error?: string;
  message?: string;
}

export function isEnvelope(value: unknown): value is Envelope {
  if (typeof value !== "object" || value === null) return false;
  const obj = value as Record<string, unknown>;
  return (
    typeof obj.seq === "number" &&
    Number.isFinite(obj.seq) &&
    typeof obj.kind === "string" &&
    ["hello", "snapshot", "event", "command_ack", "command_reject"].includes(obj.kind) &&
    typeof obj.payload === "object" &&
    obj.payload !== null
  );
}
