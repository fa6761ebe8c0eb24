/** Server-authoritative view state.
 *
 * `applyEnvelope` is a pure function from (view, wire frame) to the next
 * view: snapshots replace displayed state wholesale, events append to the
 * activity feed, acks and rejects settle pending commands. Envelopes at or
 * below the last displayed seq are dropped (a warning is recorded and
 * nothing visible changes); a malformed frame raises the error banner but
 * keeps the connection.
 */

import {
  CommandEcho,
  CommandFrame,
  CommandOutcomePayload,
  Envelope,
  HelloPayload,
  Snapshot,
  isEnvelope,
} from "./protocol.js";

export type ConnectionState = "connecting" | "live" | "reconnecting" | "closed";

export interface ActivityEntry {
  seq: number;
  sim_time: number;
  type: string;
  detail: Record<string, unknown>;
}

export interface PendingCommand {
  frame: CommandFrame;
  sentAt: number;
}

export interface Toast {
  text: string;
  tone: "info" | "error";
}

export interface ViewModel {
  connection: ConnectionState;
  session: string | null;
  client: string | null;
  /** Seq of the newest envelope applied; displayed seq is monotone. */
  lastSeq: number;
  snapshot: Snapshot | null;
  activity: ActivityEntry[];
  pending: PendingCommand[];
  /** Frames composed while disconnected, flushed on reconnect. */
  outbox: CommandFrame[];
  toasts: Toast[];
  banner: string | null;
  warnings: string[];
  /** Reject message for the task view, keyed by agent id. */
  taskViewErrors: Record<string, string>;
  completed: boolean;
}

const ACTIVITY_LIMIT = 200;

export function createViewModel(): ViewModel {
  return {
    connection: "connecting",
    session: null,
    client: null,
    lastSeq: 0,
    snapshot: null,
    activity: [],
    pending: [],
    outbox: [],
    toasts: [],
    banner: null,
    warnings: [],
    taskViewErrors: {},
    completed: false,
  };
}

function frameMatchesEcho(frame: CommandFrame, echo: CommandEcho, client: string | null): boolean {
  if (client !== null && echo.issued_by !== client) return false;
  if (echo.type !== frame.type) return false;
  switch (frame.type) {
    case "classify":
      return echo.target === frame.target && echo.label === frame.label;
    case "reassign":
      return echo.agent === frame.agent && (echo.target ?? null) === frame.target;
    case "set_mode":
      return echo.mode === frame.mode;
    default:
      return true;
  }
}

function settlePending(view: ViewModel, echo: CommandEcho): ViewModel {
  const index = view.pending.findIndex((p) => frameMatchesEcho(p.frame, echo, view.client));
  if (index < 0) return view;
  const pending = view.pending.slice();
  pending.splice(index, 1);
  return { ...view, pending };
}

function pushActivity(view: ViewModel, entry: ActivityEntry): ViewModel {
  const activity = [...view.activity, entry].slice(-ACTIVITY_LIMIT);
  return { ...view, activity };
}

function describeTarget(echo: CommandEcho): string {
  return typeof echo.target === "string" ? echo.target : "(unknown)";
}

export function applyEnvelope(view: ViewModel, raw: unknown): ViewModel {
  if (!isEnvelope(raw)) {
    return { ...view, banner: "malformed envelope from server (connection retained)" };
  }
  const env: Envelope = raw;
  if (env.seq <= view.lastSeq) {
    return {
      ...view,
      warnings: [...view.warnings, `dropped stale envelope seq=${env.seq} (displayed=${view.lastSeq})`],
    };
  }

  let next: ViewModel = { ...view, lastSeq: env.seq };
  switch (env.kind) {
    case "hello": {
      const hello = env.payload as unknown as HelloPayload;
      next = {
        ...next,
        connection: "live",
        session: hello.session,
        client: hello.client,
        snapshot: hello.snapshot,
        banner: null,
      };
      break;
    }
    case "snapshot": {
      next = { ...next, snapshot: env.payload as unknown as Snapshot };
      break;
    }
    case "event": {
      const kind = typeof env.payload.type === "string" ? env.payload.type : "event";
      next = pushActivity(next, {
        seq: env.seq,
        sim_time: env.sim_time,
        type: kind,
        detail: env.payload,
      });
      if (kind === "run_completed") {
        next = {
          ...next,
          completed: true,
          toasts: [...next.toasts, { text: `run completed (${env.payload.reason})`, tone: "info" }],
        };
      }
      break;
    }
    case "command_ack": {
      const payload = env.payload as unknown as CommandOutcomePayload;
      next = settlePending(next, payload.command);
      next = pushActivity(next, {
        seq: env.seq,
        sim_time: env.sim_time,
        type: `ack:${payload.command.type}`,
        detail: env.payload,
      });
      break;
    }
    case "command_reject": {
      const payload = env.payload as unknown as CommandOutcomePayload;
      next = settlePending(next, payload.command);
      const error = payload.error ?? "Rejected";
      let text = `${payload.command.type} rejected: ${error}`;
      if (error === "AlreadyClassified") {
        text = `target ${describeTarget(payload.command)} is already classified`;
      }
      next = { ...next, toasts: [...next.toasts, { text, tone: "error" }] };
      if (payload.command.type === "reassign" && typeof payload.command.agent === "string") {
        next = {
          ...next,
          taskViewErrors: {
            ...next.taskViewErrors,
            [payload.command.agent]: payload.message ?? error,
          },
        };
      }
      next = pushActivity(next, {
        seq: env.seq,
        sim_time: env.sim_time,
        type: `reject:${payload.command.type}`,
        detail: env.payload,
      });
      break;
    }
  }
  return next;
}

/** Map markers derived from the displayed snapshot (display only). */
export interface MapMarker {
  kind: "agent" | "target";
  id: string;
  lat: number;
  lon: number;
  state: string;
}

export function mapMarkers(view: ViewModel): MapMarker[] {
  if (view.snapshot === null) return [];
  const markers: MapMarker[] = [];
  for (const agent of view.snapshot.agents) {
    markers.push({
      kind: "agent",
      id: agent.id,
      lat: agent.position.lat,
      lon: agent.position.lon,
      state: agent.task === null ? "idle" : `-> ${agent.task}`,
    });
  }
  for (const target of view.snapshot.targets) {
    markers.push({
      kind: "target",
      id: target.id,
      lat: target.position.lat,
      lon: target.position.lon,
      state: target.state,
    });
  }
  return markers;
}

export function connectionLost(view: ViewModel): ViewModel {
  return { ...view, connection: "reconnecting" };
}

export function connectionClosed(view: ViewModel): ViewModel {
  return { ...view, connection: "closed" };
}

/** Frames queued while offline, in send order; clears the outbox. */
export function drainOutbox(view: ViewModel): { view: ViewModel; frames: CommandFrame[] } {
  return { view: { ...view, outbox: [] }, frames: view.outbox };
}

export function dismissToast(view: ViewModel, index: number): ViewModel {
  return { ...view, toasts: view.toasts.filter((_, i) => i !== index) };
}
