/**
 * Wire types for the gateway protocol and strict decoding of inbound
 * frames. Everything the server sends is validated here; the rest of the
 * console can trust the shapes. Malformed input throws Error with a
 * reason and never produces a half-parsed frame.
 */

export const PROTOCOL_VERSION = 1;

export type Role = "choreographer" | "observer";

export type RequestId = number | string;

export interface BoundaryView {
  x_min: number;
  x_max: number;
  y_min: number;
  y_max: number;
  margin_m: number;
}

export interface EngineConfigView {
  boundary: BoundaryView;
  tick_hz: number;
  [extra: string]: unknown;
}

export interface AgentView {
  id: number;
  kind: "robot" | "human";
  x: number;
  y: number;
  vx: number;
  vy: number;
  heading: number;
}

export interface ResponseView {
  robot_id: number;
  kind: string;
  elapsed_s: number;
  light_color: string;
}

export interface GazeView {
  robot_id: number;
  target: "center" | number;
}

export interface SnapshotView {
  tick: number;
  sim_time_s: number;
  agents: AgentView[];
  active_mode: string;
  condition: { condition: string; mode?: string } | null;
  responses: ResponseView[];
  gaze: GazeView[];
  lights: Record<string, string>;
  gesture_onsets: { human_id: number; gesture: string }[];
  running: boolean;
  error: string | null;
  gap_before?: boolean;
}

export interface HelloPayload {
  protocol_version: number;
  role: Role;
  config: EngineConfigView;
  state_interval_ticks: number;
}

export type Frame =
  | { kind: "hello"; sequence: number; payload: HelloPayload }
  | { kind: "state"; sequence: number; payload: SnapshotView }
  | { kind: "ack"; sequence: number; payload: { request_id: RequestId; detail: string | null } }
  | { kind: "error"; sequence: number; payload: { request_id?: RequestId; reason: string } };

export const MODE_IDS = [
  "default",
  "following",
  "linear",
  "circling",
  "cohesion",
  "alignment",
  "separation",
] as const;

export type ModeId = (typeof MODE_IDS)[number];

export type GestureId = "right_hand_up" | "left_hand_up" | "hands_together";

export type CommandObject =
  | { type: "set_mode"; mode: ModeId }
  | { type: "add_human"; human_id: number; x: number; y: number }
  | { type: "move_human"; human_id: number; x: number; y: number }
  | { type: "remove_human"; human_id: number }
  | { type: "set_gesture"; human_id: number; gesture: GestureId | null }
  | { type: "set_condition"; condition: string; mode?: ModeId }
  | { type: "start" }
  | { type: "pause" };

function isObject(value: unknown): value is Record<string, unknown> {
  return typeof value === "object" && value !== null && !Array.isArray(value);
}

function expectNumber(obj: Record<string, unknown>, field: string, where: string): number {
  const v = obj[field];
  if (typeof v !== "number" || !Number.isFinite(v)) {
    throw new Error(`${where}: '${field}' must be a finite number`);
  }
  return v;
}

export function parseFrame(text: string): Frame {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch (exc) {
    throw new Error(`frame is not valid JSON: ${(exc as Error).message}`);
  }
  if (!isObject(raw)) throw new Error("frame must be a JSON object");
  const kind = raw.kind;
  const sequence = expectNumber(raw, "sequence", "frame");
  const payload = raw.payload;
  if (!isObject(payload)) throw new Error("frame: 'payload' must be an object");

  switch (kind) {
    case "hello": {
      if (payload.role !== "choreographer" && payload.role !== "observer") {
        throw new Error("hello: unknown role");
      }
      expectNumber(payload, "protocol_version", "hello");
      expectNumber(payload, "state_interval_ticks", "hello");
      const config = payload.config;
      if (!isObject(config) || !isObject(config.boundary)) {
        throw new Error("hello: missing engine config boundary");
      }
      expectNumber(config, "tick_hz", "hello.config");
      return { kind, sequence, payload: payload as unknown as HelloPayload };
    }
    case "state": {
      if (!Array.isArray(payload.agents)) throw new Error("state: 'agents' must be a list");
      if (typeof payload.active_mode !== "string") {
        throw new Error("state: 'active_mode' must be a string");
      }
      expectNumber(payload, "tick", "state");
      return { kind, sequence, payload: payload as unknown as SnapshotView };
    }
    case "ack": {
      if (payload.request_id === undefined) throw new Error("ack: missing request_id");
      return {
        kind,
        sequence,
        payload: payload as unknown as { request_id: RequestId; detail: string | null },
      };
    }
    case "error": {
      if (typeof payload.reason !== "string") throw new Error("error frame: missing reason");
      return {
        kind,
        sequence,
        payload: payload as unknown as { request_id?: RequestId; reason: string },
      };
    }
    default:
      throw new Error(`unknown frame kind '${String(kind)}'`);
  }
}

export function helloMessage(role: Role): string {
  return JSON.stringify({ hello: { role, protocol_version: PROTOCOL_VERSION } });
}

export function commandMessage(requestId: RequestId, command: CommandObject): string {
  return JSON.stringify({ request_id: requestId, command });
}
