/** Scenario editor: place agents, targets, and hazards on the map plane,
 * toggle each target's ground truth, and export a scenario document ready
 * for `POST /sessions` (or the `validate` CLI command).
 *
 * The export mirrors the server's validation rules, so anything the editor
 * lets you save is accepted verbatim on upload; violations found earlier
 * surface inline instead of producing a document.
 */

export type PlacementTool = "agent" | "target" | "hazard";

export interface EditorAgent {
  id: string;
  lat: number;
  lon: number;
  alt: number;
  speed: number;
  energy_budget: number;
  visibility_radius: number;
  arrival_radius: number;
}

export interface EditorTarget {
  id: string;
  lat: number;
  lon: number;
  ground_truth: "casualty" | "no_casualty";
  reward: number;
}

export interface EditorHazard {
  id: string;
  lat: number;
  lon: number;
  radius: number;
  penalty: number;
}

export interface EditorState {
  name: string;
  tool: PlacementTool;
  agents: EditorAgent[];
  targets: EditorTarget[];
  hazards: EditorHazard[];
  mode: "autonomous" | "human_teaming";
  tick_hz: number;
  time_limit: number;
  rng_seed: number;
  counters: { agent: number; target: number; hazard: number };
  error: string | null;
}

export const EDITOR_DEFAULTS = {
  speed: 15,
  energy_budget: 20000,
  visibility_radius: 300,
  arrival_radius: 10,
  reward: 1000,
  hazard_radius: 120,
  hazard_penalty: 250,
  alt: 60,
};

export function createEditor(name = "untitled scenario"): EditorState {
  return {
    name,
    tool: "agent",
    agents: [],
    targets: [],
    hazards: [],
    mode: "human_teaming",
    tick_hz: 10,
    time_limit: 600,
    rng_seed: 0,
    counters: { agent: 0, target: 0, hazard: 0 },
    error: null,
  };
}

export function selectTool(state: EditorState, tool: PlacementTool): EditorState {
  return { ...state, tool };
}

function round7(value: number): number {
  return Math.round(value * 1e7) / 1e7;
}

/** Place an entity with the active tool at a map position. */
export function placeAt(state: EditorState, lat: number, lon: number): EditorState {
  const la = round7(lat);
  const lo = round7(lon);
  switch (state.tool) {
    case "agent": {
      const n = state.counters.agent + 1;
      const agent: EditorAgent = {
        id: `agent-${n}`,
        lat: la,
        lon: lo,
        alt: EDITOR_DEFAULTS.alt,
        speed: EDITOR_DEFAULTS.speed,
        energy_budget: EDITOR_DEFAULTS.energy_budget,
        visibility_radius: EDITOR_DEFAULTS.visibility_radius,
        arrival_radius: EDITOR_DEFAULTS.arrival_radius,
      };
      return {
        ...state,
        agents: [...state.agents, agent],
        counters: { ...state.counters, agent: n },
        error: null,
      };
    }
    case "target": {
      const n = state.counters.target + 1;
      const target: EditorTarget = {
        id: `target-${n}`,
        lat: la,
        lon: lo,
        ground_truth: "no_casualty",
        reward: EDITOR_DEFAULTS.reward,
      };
      return {
        ...state,
        targets: [...state.targets, target],
        counters: { ...state.counters, target: n },
        error: null,
      };
    }
    case "hazard": {
      const n = state.counters.hazard + 1;
      const hazard: EditorHazard = {
        id: `hazard-${n}`,
        lat: la,
        lon: lo,
        radius: EDITOR_DEFAULTS.hazard_radius,
        penalty: EDITOR_DEFAULTS.hazard_penalty,
      };
      return {
        ...state,
        hazards: [...state.hazards, hazard],
        counters: { ...state.counters, hazard: n },
        error: null,
      };
    }
  }
}

export function removeEntity(state: EditorState, id: string): EditorState {
  return {
    ...state,
    agents: state.agents.filter((a) => a.id !== id),
    targets: state.targets.filter((t) => t.id !== id),
    hazards: state.hazards.filter((h) => h.id !== id),
  };
}

export function toggleGroundTruth(state: EditorState, targetId: string): EditorState {
  return {
    ...state,
    targets: state.targets.map((t) =>
      t.id === targetId
        ? { ...t, ground_truth: t.ground_truth === "casualty" ? "no_casualty" : "casualty" }
        : t,
    ),
  };
}

export function setReward(state: EditorState, targetId: string, reward: number): EditorState {
  return {
    ...state,
    targets: state.targets.map((t) => (t.id === targetId ? { ...t, reward } : t)),
  };
}

export function configureRun(
  state: EditorState,
  config: Partial<Pick<EditorState, "name" | "mode" | "tick_hz" | "time_limit" | "rng_seed">>,
): EditorState {
  return { ...state, ...config };
}

/** Scenario JSON document in the shape the service accepts. */
export interface ScenarioDoc {
  name: string;
  agents: Array<{
    id: string;
    start: { lat: number; lon: number; alt: number };
    speed: number;
    energy_budget: number;
    visibility_radius: number;
    arrival_radius: number;
  }>;
  targets: Array<{
    id: string;
    position: { lat: number; lon: number; alt: number };
    ground_truth: "casualty" | "no_casualty";
    reward: number;
  }>;
  hazards: Array<{
    id: string;
    center: { lat: number; lon: number; alt: number };
    radius: number;
    penalty: number;
  }>;
  mode_config: {
    mode: "autonomous" | "human_teaming";
    tick_hz: number;
    time_limit: number;
    rng_seed: number;
  };
}

export type ExportResult =
  | { ok: true; doc: ScenarioDoc }
  | { ok: false; error: string };

function validate(state: EditorState): string | null {
  if (state.name.trim() === "") return "scenario needs a name";
  if (state.agents.length === 0) return "place at least one agent before exporting";
  const seen = new Set<string>();
  for (const entity of [...state.agents, ...state.targets, ...state.hazards]) {
    if (seen.has(entity.id)) return `duplicate id ${entity.id}`;
    seen.add(entity.id);
    if (entity.lat < -90 || entity.lat > 90) return `${entity.id}: latitude out of range`;
    if (entity.lon < -180 || entity.lon > 180) return `${entity.id}: longitude out of range`;
  }
  for (const agent of state.agents) {
    if (agent.speed <= 0) return `${agent.id}: speed must be positive`;
    if (agent.energy_budget <= 0) return `${agent.id}: energy budget must be positive`;
    if (agent.arrival_radius > agent.visibility_radius) {
      return `${agent.id}: arrival radius exceeds visibility radius`;
    }
  }
  for (const target of state.targets) {
    if (target.reward < 0) return `${target.id}: reward must not be negative`;
  }
  for (const hazard of state.hazards) {
    if (hazard.radius <= 0) return `${hazard.id}: radius must be positive`;
    if (hazard.penalty < 0) return `${hazard.id}: penalty must not be negative`;
  }
  if (state.tick_hz <= 0) return "tick rate must be positive";
  if (state.time_limit <= 0) return "time limit must be positive";
  if (!Number.isInteger(state.rng_seed) || state.rng_seed < 0) {
    return "seed must be a non-negative integer";
  }
  return null;
}

export function exportScenario(state: EditorState): ExportResult {
  const error = validate(state);
  if (error !== null) return { ok: false, error };
  return {
    ok: true,
    doc: {
      name: state.name,
      agents: state.agents.map((a) => ({
        id: a.id,
        start: { lat: a.lat, lon: a.lon, alt: a.alt },
        speed: a.speed,
        energy_budget: a.energy_budget,
        visibility_radius: a.visibility_radius,
        arrival_radius: a.arrival_radius,
      })),
      targets: state.targets.map((t) => ({
        id: t.id,
        position: { lat: t.lat, lon: t.lon, alt: 0 },
        ground_truth: t.ground_truth,
        reward: t.reward,
      })),
      hazards: state.hazards.map((h) => ({
        id: h.id,
        center: { lat: h.lat, lon: h.lon, alt: 0 },
        radius: h.radius,
        penalty: h.penalty,
      })),
      mode_config: {
        mode: state.mode,
        tick_hz: state.tick_hz,
        time_limit: state.time_limit,
        rng_seed: state.rng_seed,
      },
    },
  };
}

export function serializeScenario(doc: ScenarioDoc): string {
  return `${JSON.stringify(doc, null, 2)}\n`;
}

/** Load a scenario document back into the editor. */
export function importScenario(doc: ScenarioDoc): EditorState {
  const numberSuffix = (id: string): number => {
    const match = /-(\d+)$/.exec(id);
    return match === null ? 0 : Number(match[1]);
  };
  return {
    name: doc.name,
    tool: "agent",
    agents: doc.agents.map((a) => ({
      id: a.id,
      lat: a.start.lat,
      lon: a.start.lon,
      alt: a.start.alt ?? 0,
      speed: a.speed,
      energy_budget: a.energy_budget,
      visibility_radius: a.visibility_radius ?? 300,
      arrival_radius: a.arrival_radius ?? 10,
    })),
    targets: doc.targets.map((t) => ({
      id: t.id,
      lat: t.position.lat,
      lon: t.position.lon,
      ground_truth: t.ground_truth,
      reward: t.reward ?? 1000,
    })),
    hazards: (doc.hazards ?? []).map((h) => ({
      id: h.id,
      lat: h.center.lat,
      lon: h.center.lon,
      radius: h.radius,
      penalty: h.penalty,
    })),
    mode: doc.mode_config.mode,
    tick_hz: doc.mode_config.tick_hz ?? 10,
    time_limit: doc.mode_config.time_limit ?? 600,
    rng_seed: doc.mode_config.rng_seed ?? 0,
    counters: {
      agent: Math.max(0, ...doc.agents.map((a) => numberSuffix(a.id))),
      target: Math.max(0, ...doc.targets.map((t) => numberSuffix(t.id))),
      hazard: Math.max(0, ...(doc.hazards ?? []).map((h) => numberSuffix(h.id))),
    },
    error: null,
  };
}

/** Canonical marker list used to draw the editor map; equal render models
 * mean the map looks identical. */
export interface EditorMarker {
  kind: PlacementTool;
  id: string;
  lat: number;
  lon: number;
  detail: string;
}

export function renderModel(state: EditorState): EditorMarker[] {
  const markers: EditorMarker[] = [];
  for (const a of state.agents) {
    markers.push({ kind: "agent", id: a.id, lat: a.lat, lon: a.lon, detail: `speed ${a.speed}` });
  }
  for (const t of state.targets) {
    markers.push({ kind: "target", id: t.id, lat: t.lat, lon: t.lon, detail: t.ground_truth });
  }
  for (const h of state.hazards) {
    markers.push({ kind: "hazard", id: h.id, lat: h.lat, lon: h.lon, detail: `r=${h.radius}` });
  }
  return markers;
}

/** Built-in sample session; also the source of the committed round-trip
 * fixture (`npm run fixture` regenerates it). */
export function demoEditorSession(): EditorState {
  let state = createEditor("valley sweep");
  state = placeAt(state, 44.0, -72.5);
  state = placeAt(selectTool(state, "agent"), 44.0012, -72.4985);
  state = placeAt(selectTool(state, "target"), 44.0065, -72.4935);
  state = placeAt(selectTool(state, "target"), 44.0031, -72.507);
  state = placeAt(selectTool(state, "target"), 43.9958, -72.4895);
  state = toggleGroundTruth(state, "target-1");
  state = setReward(state, "target-3", 5000);
  state = placeAt(selectTool(state, "hazard"), 44.004, -72.5015);
  state = configureRun(state, { mode: "human_teaming", tick_hz: 10, time_limit: 480, rng_seed: 11 });
  return state;
}
