/** Operator console wiring: one stream connection feeding the view model,
 * DOM rendering for the map / feeds / task view / score display, and the
 * scenario editor overlay. All state shown here arrives in envelopes; this
 * file only draws it and emits command frames.
 */

import {
  canClassify,
  canReassign,
  classifyFrame,
  inHumanTeaming,
  pendingReassign,
  reassignFrame,
  setModeFrame,
  trySend,
} from "./commands.js";
import {
  EditorState,
  createEditor,
  demoEditorSession,
  exportScenario,
  importScenario,
  placeAt,
  removeEntity,
  renderModel,
  selectTool,
  serializeScenario,
  setReward,
  toggleGroundTruth,
  configureRun,
  PlacementTool,
  ScenarioDoc,
} from "./editor.js";
import { cellColor, clarityPercent, feedGrid } from "./feed.js";
import { boundsOf, makeProjection } from "./geo.js";
import { CommandFrame, FeedView, Snapshot } from "./protocol.js";
import {
  ViewModel,
  applyEnvelope,
  connectionClosed,
  connectionLost,
  createViewModel,
  drainOutbox,
  mapMarkers,
} from "./viewmodel.js";

type Page = "console" | "editor";

interface AppState {
  view: ViewModel;
  editor: EditorState;
  page: Page;
  socket: WebSocket | null;
  sessionId: string | null;
  clientId: string;
  reconnectTimer: number | null;
}

const app: AppState = {
  view: createViewModel(),
  editor: createEditor(),
  page: "console",
  socket: null,
  sessionId: null,
  clientId: `op-${Math.random().toString(36).slice(2, 8)}`,
  reconnectTimer: null,
};

function $(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (el === null) throw new Error(`missing element #${id}`);
  return el;
}

// ---------------------------------------------------------------- stream

function wsUrl(sessionId: string): string {
  const proto = location.protocol === "https:" ? "wss" : "ws";
  return `${proto}://${location.host}/sessions/${sessionId}/stream?client=${app.clientId}`;
}

function connect(sessionId: string): void {
  if (app.socket !== null) {
    app.socket.onclose = null;
    app.socket.close();
  }
  app.sessionId = sessionId;
  const socket = new WebSocket(wsUrl(sessionId));
  app.socket = socket;
  socket.onmessage = (msg) => {
    let parsed: unknown;
    try {
      parsed = JSON.parse(String(msg.data));
    } catch {
      parsed = null;
    }
    const before = app.view.connection;
    app.view = applyEnvelope(app.view, parsed);
    if (before !== "live" && app.view.connection === "live") {
      const drained = drainOutbox(app.view);
      app.view = drained.view;
      for (const frame of drained.frames) socket.send(JSON.stringify(frame));
    }
    render();
  };
  socket.onclose = (ev) => {
    if (ev.code === 4410 || ev.code === 4404) {
      app.view = connectionClosed(app.view);
      app.sessionId = null;
    } else {
      app.view = connectionLost(app.view);
      scheduleReconnect();
    }
    render();
  };
}

function scheduleReconnect(): void {
  if (app.reconnectTimer !== null || app.sessionId === null) return;
  app.reconnectTimer = window.setTimeout(() => {
    app.reconnectTimer = null;
    if (app.sessionId !== null) connect(app.sessionId);
  }, 1000);
}

function send(frame: CommandFrame): void {
  const result = trySend(app.view, frame);
  app.view = result.view;
  if (result.frame !== null && app.socket !== null && app.socket.readyState === WebSocket.OPEN) {
    app.socket.send(JSON.stringify(result.frame));
  }
  render();
}

// ------------------------------------------------------------- sessions

async function refreshSessions(): Promise<void> {
  const listing = $("session-list");
  try {
    const res = await fetch("/sessions");
    const body = (await res.json()) as {
      sessions: Array<{ id: string; clients: string[]; paused: boolean; mode: string }>;
    };
    listing.innerHTML = body.sessions.length === 0 ? "<em>no sessions yet</em>" : "";
    for (const s of body.sessions) {
      const row = document.createElement("button");
      row.className = "session-row";
      row.dataset.session = s.id;
      row.textContent = `${s.id} · ${s.mode}${s.paused ? " · paused" : ""} · ${s.clients.length} client(s)`;
      listing.appendChild(row);
    }
  } catch {
    listing.innerHTML = "<em>service unreachable</em>";
  }
}

async function createSession(doc: ScenarioDoc | null): Promise<void> {
  const res = await fetch("/sessions", {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: doc === null ? null : JSON.stringify(doc),
  });
  if (!res.ok) {
    const detail = (await res.json()) as { detail?: { message?: string } };
    window.alert(`scenario rejected: ${detail.detail?.message ?? res.status}`);
    return;
  }
  const body = (await res.json()) as { session: string };
  app.view = createViewModel();
  connect(body.session);
  void refreshSessions();
}

// ------------------------------------------------------------ rendering

function render(): void {
  $("console-page").style.display = app.page === "console" ? "" : "none";
  $("editor-page").style.display = app.page === "editor" ? "" : "none";
  if (app.page === "console") renderConsole();
  else renderEditor();
}

function renderConsole(): void {
  const view = app.view;
  const badge = $("conn-badge");
  badge.textContent = view.connection + (view.session === null ? "" : ` · ${view.session}`);
  badge.className = `badge ${view.connection}`;
  $("banner").textContent = view.banner ?? "";
  $("banner").style.display = view.banner === null ? "none" : "";

  const snap = view.snapshot;
  const score = $("score");
  if (snap === null) {
    score.textContent = "join a session to begin";
  } else {
    const s = snap.score;
    score.innerHTML =
      `<span class="stat">score <b>${s.score.toFixed(2)}</b></span>` +
      `<span class="stat">rate ${s.rate.toFixed(2)}/min</span>` +
      `<span class="stat">accuracy ${(s.accuracy * 100).toFixed(0)}%</span>` +
      `<span class="stat">${s.classifications} classified (${s.correct} correct)</span>` +
      `<span class="stat">t=${snap.sim_time.toFixed(1)}s</span>` +
      `<span class="stat mode">${snap.mode}${snap.paused ? " · paused" : ""}</span>`;
  }

  const modeButton = $("btn-mode") as HTMLButtonElement;
  const pauseButton = $("btn-pause") as HTMLButtonElement;
  modeButton.disabled = snap === null;
  pauseButton.disabled = snap === null;
  if (snap !== null) {
    modeButton.textContent =
      snap.mode === "human_teaming" ? "switch to autonomous" : "switch to human teaming";
    pauseButton.textContent = snap.paused ? "resume" : "pause";
  }

  drawMap(snap);
  renderFeeds(view, snap);
  renderTaskView(view, snap);
  renderActivity(view);
  renderToasts(view);
}

function drawMap(snap: Snapshot | null): void {
  const canvas = $("map") as HTMLCanvasElement;
  const ctx = canvas.getContext("2d");
  if (ctx === null) return;
  ctx.fillStyle = "#10141c";
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  if (snap === null) return;

  const everything = [
    ...snap.agents.map((a) => a.position),
    ...snap.targets.map((t) => t.position),
  ];
  const bounds = boundsOf(everything);
  const proj = makeProjection(bounds.centerLat, bounds.centerLon);
  const corner = proj.toPlane(
    bounds.centerLat + bounds.spanLat / 2,
    bounds.centerLon + bounds.spanLon / 2,
  );
  const extent = Math.max(Math.abs(corner.x), Math.abs(corner.y)) * 1.25 + 50;
  const scale = Math.min(canvas.width, canvas.height) / (2 * extent);
  const sx = (x: number): number => canvas.width / 2 + x * scale;
  const sy = (y: number): number => canvas.height / 2 - y * scale;

  ctx.strokeStyle = "#1d2634";
  for (let g = -5; g <= 5; g += 1) {
    const offset = (g * extent) / 5;
    ctx.beginPath();
    ctx.moveTo(sx(offset), sy(-extent));
    ctx.lineTo(sx(offset), sy(extent));
    ctx.stroke();
    ctx.beginPath();
    ctx.moveTo(sx(-extent), sy(offset));
    ctx.lineTo(sx(extent), sy(offset));
    ctx.stroke();
  }

  for (const target of snap.targets) {
    const p = proj.toPlane(target.position.lat, target.position.lon);
    ctx.beginPath();
    ctx.arc(sx(p.x), sy(p.y), 7, 0, Math.PI * 2);
    if (target.state === "classified") {
      ctx.fillStyle = target.classification?.label === "casualty" ? "#e05858" : "#4a9e62";
      ctx.fill();
    } else {
      ctx.strokeStyle = "#d8b44a";
      ctx.lineWidth = 2;
      ctx.stroke();
    }
    ctx.fillStyle = "#9aa7bd";
    ctx.font = "11px sans-serif";
    ctx.fillText(target.id, sx(p.x) + 10, sy(p.y) + 4);
  }

  for (const agent of snap.agents) {
    const p = proj.toPlane(agent.position.lat, agent.position.lon);
    if (agent.task !== null) {
      const task = snap.targets.find((t) => t.id === agent.task);
      if (task !== undefined) {
        const q = proj.toPlane(task.position.lat, task.position.lon);
        ctx.strokeStyle = "#3b76c0";
        ctx.setLineDash([4, 4]);
        ctx.beginPath();
        ctx.moveTo(sx(p.x), sy(p.y));
        ctx.lineTo(sx(q.x), sy(q.y));
        ctx.stroke();
        ctx.setLineDash([]);
      }
    }
    ctx.fillStyle = "#5aa2f0";
    ctx.beginPath();
    ctx.moveTo(sx(p.x), sy(p.y) - 8);
    ctx.lineTo(sx(p.x) - 6, sy(p.y) + 6);
    ctx.lineTo(sx(p.x) + 6, sy(p.y) + 6);
    ctx.closePath();
    ctx.fill();
    ctx.fillStyle = "#cfe0f7";
    ctx.font = "11px sans-serif";
    ctx.fillText(agent.id, sx(p.x) + 9, sy(p.y) - 6);
  }
}

function renderFeeds(view: ViewModel, snap: Snapshot | null): void {
  const host = $("feeds");
  host.innerHTML = "";
  if (snap === null) return;
  if (snap.feeds.length === 0) {
    host.innerHTML = "<em>no live camera feeds</em>";
    return;
  }
  for (const feed of snap.feeds) {
    host.appendChild(feedCard(view, feed));
  }
}

function feedCard(view: ViewModel, feed: FeedView): HTMLElement {
  const card = document.createElement("div");
  card.className = "feed-card";
  const title = document.createElement("div");
  title.className = "feed-title";
  title.textContent = `${feed.target_id} · level ${feed.resolution_level}`;
  card.appendChild(title);

  const canvas = document.createElement("canvas");
  canvas.width = 128;
  canvas.height = 128;
  const ctx = canvas.getContext("2d");
  if (ctx !== null) {
    const rows = feedGrid(feed);
    const cell = canvas.width / rows.length;
    rows.forEach((row, r) => {
      row.forEach((value, c) => {
        ctx.fillStyle = cellColor(value);
        ctx.fillRect(c * cell, r * cell, Math.ceil(cell), Math.ceil(cell));
      });
    });
  }
  card.appendChild(canvas);

  const bar = document.createElement("div");
  bar.className = "clarity";
  const fill = document.createElement("div");
  fill.style.width = `${clarityPercent(feed.clarity)}%`;
  bar.appendChild(fill);
  card.appendChild(bar);

  const buttons = document.createElement("div");
  buttons.className = "feed-buttons";
  const enabled = canClassify(view, feed.target_id);
  for (const label of ["casualty", "no_casualty"] as const) {
    const button = document.createElement("button");
    button.textContent = label === "casualty" ? "Casualty" : "No Casualty";
    button.disabled = !enabled;
    button.dataset.target = feed.target_id;
    button.dataset.label = label;
    button.className = "classify";
    buttons.appendChild(button);
  }
  card.appendChild(buttons);
  return card;
}

function renderTaskView(view: ViewModel, snap: Snapshot | null): void {
  const host = $("task-view");
  host.innerHTML = "";
  if (snap === null) return;
  const teaming = inHumanTeaming(view);
  for (const agent of snap.agents) {
    const row = document.createElement("div");
    row.className = "task-row";
    const info = document.createElement("span");
    const energy = agent.energy_budget > 0
      ? ` · ${(100 * (1 - agent.energy_used / agent.energy_budget)).toFixed(0)}% energy`
      : "";
    info.textContent =
      `${agent.id} -> ${agent.task ?? "idle"}` +
      (agent.schedule.length > 1 ? ` (then ${agent.schedule.slice(1).join(", ")})` : "") +
      energy;
    row.appendChild(info);

    const select = document.createElement("select");
    select.dataset.agent = agent.id;
    select.disabled = !teaming || !canReassign(view, agent.id);
    const placeholder = document.createElement("option");
    placeholder.value = "";
    placeholder.textContent = "reassign to…";
    select.appendChild(placeholder);
    const idle = document.createElement("option");
    idle.value = "__idle__";
    idle.textContent = "IDLE (hold position)";
    select.appendChild(idle);
    for (const target of snap.targets) {
      if (target.state !== "unknown") continue;
      const option = document.createElement("option");
      option.value = target.id;
      option.textContent = target.id;
      select.appendChild(option);
    }
    row.appendChild(select);

    const pendingFrame = pendingReassign(view, agent.id);
    if (pendingFrame !== null && pendingFrame.type === "reassign") {
      const pending = document.createElement("span");
      pending.className = "pending";
      pending.textContent = `pending: ${pendingFrame.target ?? "IDLE"}`;
      row.appendChild(pending);
    }
    const error = view.taskViewErrors[agent.id];
    if (error !== undefined) {
      const label = document.createElement("span");
      label.className = "inline-error";
      label.textContent = error;
      row.appendChild(label);
    }
    host.appendChild(row);
  }
}

function renderActivity(view: ViewModel): void {
  const host = $("activity");
  host.innerHTML = "";
  for (const entry of view.activity.slice(-30).reverse()) {
    const line = document.createElement("div");
    line.className = "activity-line";
    const detail =
      entry.type === "classification"
        ? ` ${String(entry.detail.target_id)} = ${String(entry.detail.label)} by ${String(entry.detail.actor_kind)}`
        : "";
    line.textContent = `[${entry.sim_time.toFixed(1)}s] ${entry.type}${detail}`;
    host.appendChild(line);
  }
}

function renderToasts(view: ViewModel): void {
  const host = $("toasts");
  host.innerHTML = "";
  view.toasts.slice(-4).forEach((toast) => {
    const el = document.createElement("div");
    el.className = `toast ${toast.tone}`;
    el.textContent = toast.text;
    host.appendChild(el);
  });
}

// -------------------------------------------------------------- editor

function renderEditor(): void {
  const state = app.editor;
  for (const tool of ["agent", "target", "hazard"] as const) {
    $(`tool-${tool}`).classList.toggle("active", state.tool === tool);
  }
  ($("editor-name") as HTMLInputElement).value = state.name;
  ($("editor-mode") as HTMLSelectElement).value = state.mode;
  ($("editor-tickhz") as HTMLInputElement).value = String(state.tick_hz);
  ($("editor-timelimit") as HTMLInputElement).value = String(state.time_limit);
  ($("editor-seed") as HTMLInputElement).value = String(state.rng_seed);
  $("editor-error").textContent = state.error ?? "";

  const listing = $("editor-entities");
  listing.innerHTML = "";
  for (const marker of renderModel(state)) {
    const row = document.createElement("div");
    row.className = "entity-row";
    const label = document.createElement("span");
    label.textContent = `${marker.id} (${marker.detail}) @ ${marker.lat.toFixed(5)},${marker.lon.toFixed(5)}`;
    row.appendChild(label);
    if (marker.kind === "target") {
      const toggle = document.createElement("button");
      toggle.dataset.toggleGt = marker.id;
      toggle.textContent = "toggle truth";
      row.appendChild(toggle);
    }
    const remove = document.createElement("button");
    remove.dataset.remove = marker.id;
    remove.textContent = "remove";
    row.appendChild(remove);
    listing.appendChild(row);
  }
  drawEditorMap(state);
}

const EDITOR_ORIGIN = { lat: 44.0, lon: -72.5, extent: 1800 };

function editorProjection() {
  return makeProjection(EDITOR_ORIGIN.lat, EDITOR_ORIGIN.lon);
}

function drawEditorMap(state: EditorState): void {
  const canvas = $("editor-map") as HTMLCanvasElement;
  const ctx = canvas.getContext("2d");
  if (ctx === null) return;
  ctx.fillStyle = "#10141c";
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  const proj = editorProjection();
  const scale = Math.min(canvas.width, canvas.height) / (2 * EDITOR_ORIGIN.extent);
  const sx = (x: number): number => canvas.width / 2 + x * scale;
  const sy = (y: number): number => canvas.height / 2 - y * scale;

  for (const marker of renderModel(state)) {
    const p = proj.toPlane(marker.lat, marker.lon);
    if (marker.kind === "hazard") {
      const hazard = state.hazards.find((h) => h.id === marker.id);
      ctx.strokeStyle = "#b05050";
      ctx.beginPath();
      ctx.arc(sx(p.x), sy(p.y), (hazard?.radius ?? 100) * scale, 0, Math.PI * 2);
      ctx.stroke();
    } else if (marker.kind === "agent") {
      ctx.fillStyle = "#5aa2f0";
      ctx.fillRect(sx(p.x) - 5, sy(p.y) - 5, 10, 10);
    } else {
      ctx.strokeStyle = marker.detail === "casualty" ? "#e05858" : "#d8b44a";
      ctx.lineWidth = 2;
      ctx.beginPath();
      ctx.arc(sx(p.x), sy(p.y), 6, 0, Math.PI * 2);
      ctx.stroke();
    }
    ctx.fillStyle = "#9aa7bd";
    ctx.font = "10px sans-serif";
    ctx.fillText(marker.id, sx(p.x) + 8, sy(p.y) + 3);
  }
}

function editorClick(event: MouseEvent): void {
  const canvas = $("editor-map") as HTMLCanvasElement;
  const rect = canvas.getBoundingClientRect();
  const scale = Math.min(canvas.width, canvas.height) / (2 * EDITOR_ORIGIN.extent);
  const x = (event.clientX - rect.left - canvas.width / 2) / scale;
  const y = (canvas.height / 2 - (event.clientY - rect.top)) / scale;
  const geo = editorProjection().toGeo({ x, y });
  app.editor = placeAt(app.editor, geo.lat, geo.lon);
  render();
}

function downloadScenario(): void {
  const result = exportScenario(app.editor);
  if (!result.ok) {
    app.editor = { ...app.editor, error: result.error };
    render();
    return;
  }
  const blob = new Blob([serializeScenario(result.doc)], { type: "application/json" });
  const link = document.createElement("a");
  link.href = URL.createObjectURL(blob);
  link.download = `${app.editor.name.replaceAll(/\s+/g, "-")}.scenario.json`;
  link.click();
  URL.revokeObjectURL(link.href);
}

// --------------------------------------------------------------- wiring

function wire(): void {
  $("btn-refresh").addEventListener("click", () => void refreshSessions());
  $("btn-new-default").addEventListener("click", () => void createSession(null));
  $("session-list").addEventListener("click", (event) => {
    const button = (event.target as HTMLElement).closest<HTMLElement>("[data-session]");
    if (button?.dataset.session !== undefined) {
      app.view = createViewModel();
      connect(button.dataset.session);
      render();
    }
  });

  $("btn-mode").addEventListener("click", () => {
    const snap = app.view.snapshot;
    if (snap === null) return;
    send(setModeFrame(snap.mode === "human_teaming" ? "autonomous" : "human_teaming"));
  });
  $("btn-pause").addEventListener("click", () => {
    const snap = app.view.snapshot;
    if (snap === null) return;
    send({ type: snap.paused ? "resume" : "pause" });
  });

  $("feeds").addEventListener("click", (event) => {
    const button = (event.target as HTMLElement).closest<HTMLElement>("button.classify");
    if (button === null || (button as HTMLButtonElement).disabled) return;
    const target = button.dataset.target;
    const label = button.dataset.label as "casualty" | "no_casualty" | undefined;
    if (target !== undefined && label !== undefined && canClassify(app.view, target)) {
      send(classifyFrame(target, label));
    }
  });

  $("task-view").addEventListener("change", (event) => {
    const select = event.target as HTMLSelectElement;
    const agent = select.dataset.agent;
    if (agent === undefined || select.value === "") return;
    const target = select.value === "__idle__" ? null : select.value;
    send(reassignFrame(agent, target));
    select.value = "";
  });

  $("btn-page-editor").addEventListener("click", () => {
    app.page = app.page === "editor" ? "console" : "editor";
    $("btn-page-editor").textContent = app.page === "editor" ? "back to console" : "scenario editor";
    render();
  });

  for (const tool of ["agent", "target", "hazard"] as const) {
    $(`tool-${tool}`).addEventListener("click", () => {
      app.editor = selectTool(app.editor, tool as PlacementTool);
      render();
    });
  }
  $("editor-map").addEventListener("click", editorClick);
  $("editor-entities").addEventListener("click", (event) => {
    const el = event.target as HTMLElement;
    if (el.dataset.toggleGt !== undefined) {
      app.editor = toggleGroundTruth(app.editor, el.dataset.toggleGt);
      render();
    } else if (el.dataset.remove !== undefined) {
      app.editor = removeEntity(app.editor, el.dataset.remove);
      render();
    }
  });
  $("editor-name").addEventListener("change", (event) => {
    app.editor = configureRun(app.editor, { name: (event.target as HTMLInputElement).value });
  });
  $("editor-mode").addEventListener("change", (event) => {
    const value = (event.target as HTMLSelectElement).value as "autonomous" | "human_teaming";
    app.editor = configureRun(app.editor, { mode: value });
  });
  for (const [id, key] of [
    ["editor-tickhz", "tick_hz"],
    ["editor-timelimit", "time_limit"],
    ["editor-seed", "rng_seed"],
  ] as const) {
    $(id).addEventListener("change", (event) => {
      const value = Number((event.target as HTMLInputElement).value);
      app.editor = configureRun(app.editor, { [key]: value });
    });
  }
  $("btn-editor-sample").addEventListener("click", () => {
    app.editor = demoEditorSession();
    render();
  });
  $("btn-editor-reward").addEventListener("click", () => {
    const id = window.prompt("target id?");
    const reward = Number(window.prompt("reward?") ?? "");
    if (id !== null && Number.isFinite(reward)) {
      app.editor = setReward(app.editor, id, reward);
      render();
    }
  });
  $("btn-editor-export").addEventListener("click", downloadScenario);
  $("btn-editor-upload").addEventListener("click", () => {
    const result = exportScenario(app.editor);
    if (!result.ok) {
      app.editor = { ...app.editor, error: result.error };
      render();
      return;
    }
    void createSession(result.doc);
    app.page = "console";
    render();
  });
  $("editor-import").addEventListener("change", (event) => {
    const input = event.target as HTMLInputElement;
    const file = input.files?.[0];
    if (file === undefined) return;
    void file.text().then((text) => {
      try {
        app.editor = importScenario(JSON.parse(text) as ScenarioDoc);
      } catch (error) {
        app.editor = { ...app.editor, error: `import failed: ${String(error)}` };
      }
      render();
    });
    input.value = "";
  });

  void refreshSessions();
  render();
}

document.addEventListener("DOMContentLoaded", wire);
