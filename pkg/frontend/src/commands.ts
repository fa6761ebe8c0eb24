/** Command composition and gating.
 *
 * Controls are mode-gated (nothing emits in autonomous mode) and lock while
 * an equivalent command awaits its ack, so a double click can't send twice.
 * When the stream is down, frames queue in the outbox and the connection
 * badge shows "reconnecting".
 */

import { CommandFrame } from "./protocol.js";
import { PendingCommand, ViewModel } from "./viewmodel.js";

export function classifyFrame(target: string, label: "casualty" | "no_casualty"): CommandFrame {
  return { type: "classify", target, label };
}

export function reassignFrame(agent: string, target: string | null): CommandFrame {
  return { type: "reassign", agent, target };
}

export function setModeFrame(mode: "autonomous" | "human_teaming"): CommandFrame {
  return { type: "set_mode", mode };
}

function sameIntent(a: CommandFrame, b: CommandFrame): boolean {
  if (a.type !== b.type) return false;
  if (a.type === "classify" && b.type === "classify") return a.target === b.target;
  if (a.type === "reassign" && b.type === "reassign") return a.agent === b.agent;
  return true;
}

export function isLocked(view: ViewModel, frame: CommandFrame): boolean {
  return view.pending.some((p: PendingCommand) => sameIntent(p.frame, frame));
}

export function inHumanTeaming(view: ViewModel): boolean {
  return view.snapshot !== null && view.snapshot.mode === "human_teaming";
}

/** Classify buttons light up only for an unknown target with a visible
 * feed, in human-teaming mode, with no classify already in flight. */
export function canClassify(view: ViewModel, targetId: string): boolean {
  if (!inHumanTeaming(view) || view.snapshot === null) return false;
  const target = view.snapshot.targets.find((t) => t.id === targetId);
  if (target === undefined || target.state !== "unknown") return false;
  const feed = view.snapshot.feeds.find((f) => f.target_id === targetId);
  if (feed === undefined) return false;
  return !isLocked(view, classifyFrame(targetId, "casualty"));
}

export function canReassign(view: ViewModel, agentId: string): boolean {
  if (!inHumanTeaming(view) || view.snapshot === null) return false;
  if (!view.snapshot.agents.some((a) => a.id === agentId)) return false;
  return !isLocked(view, reassignFrame(agentId, null));
}

export interface SendResult {
  view: ViewModel;
  /** Frame to put on the wire now; null when suppressed or queued. */
  frame: CommandFrame | null;
  queued: boolean;
}

/** Gate, lock, and route a frame: suppressed when an equivalent command is
 * pending; queued to the outbox when offline; otherwise emitted. */
export function trySend(view: ViewModel, frame: CommandFrame): SendResult {
  if (isLocked(view, frame)) {
    return { view, frame: null, queued: false };
  }
  const pending = [...view.pending, { frame, sentAt: Date.now() }];
  if (view.connection !== "live") {
    return {
      view: { ...view, pending, outbox: [...view.outbox, frame], connection: "reconnecting" },
      frame: null,
      queued: true,
    };
  }
  return { view: { ...view, pending }, frame, queued: false };
}

/** Pending reassignment for the task view's "pending" badge, if any. */
export function pendingReassign(view: ViewModel, agentId: string): CommandFrame | null {
  const entry = view.pending.find(
    (p) => p.frame.type === "reassign" && p.frame.agent === agentId,
  );
  return entry === undefined ? null : entry.frame;
}
