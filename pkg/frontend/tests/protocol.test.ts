import { describe, expect, it } from "vitest";

import {
  commandMessage,
  helloMessage,
  parseFrame,
  PROTOCOL_VERSION,
} from "../src/protocol.js";

const CONFIG = {
  boundary: { x_min: 0, x_max: 15, y_min: 0, y_max: 15, margin_m: 1 },
  tick_hz: 20,
};

function frameText(kind: string, sequence: number, payload: unknown): string {
  return JSON.stringify({ kind, sequence, payload });
}

describe("parseFrame", () => {
  it("accepts a hello frame", () => {
    const frame = parseFrame(
      frameText("hello", 0, {
        protocol_version: 1,
        role: "choreographer",
        config: CONFIG,
        state_interval_ticks: 2,
      }),
    );
    expect(frame.kind).toBe("hello");
    if (frame.kind === "hello") {
      expect(frame.payload.role).toBe("choreographer");
      expect(frame.payload.config.tick_hz).toBe(20);
    }
  });

  it("accepts a state frame", () => {
    const frame = parseFrame(
      frameText("state", 3, {
        tick: 10,
        sim_time_s: 0.5,
        agents: [
          { id: 0, kind: "robot", x: 1, y: 2, vx: 0, vy: 0, heading: 0 },
        ],
        active_mode: "circling",
        condition: null,
        responses: [],
        gaze: [],
        lights: { "0": "yellow" },
        gesture_onsets: [],
        running: true,
        error: null,
      }),
    );
    expect(frame.kind).toBe("state");
    if (frame.kind === "state") {
      expect(frame.payload.agents).toHaveLength(1);
      expect(frame.payload.active_mode).toBe("circling");
    }
  });

  it("accepts ack and error frames", () => {
    const ack = parseFrame(frameText("ack", 9, { request_id: "r1", detail: null }));
    expect(ack.kind).toBe("ack");
    const err = parseFrame(frameText("error", 10, { reason: "role taken" }));
    expect(err.kind).toBe("error");
  });

  it.each([
    ["not json", "not valid JSON"],
    ["[1,2,3]", "must be a JSON object"],
    [frameText("warp", 0, {}), "unknown frame kind"],
    [frameText("ack", 0, {}), "missing request_id"],
    [frameText("error", 0, {}), "missing reason"],
    [frameText("state", 0, { tick: 1, active_mode: "x" }), "'agents' must be a list"],
    [JSON.stringify({ kind: "state", payload: {} }), "'sequence' must be a finite number"],
    [frameText("hello", 0, { role: "pilot", protocol_version: 1 }), "unknown role"],
  ])("rejects malformed input %#", (text, message) => {
    expect(() => parseFrame(text)).toThrowError(message);
  });
});

describe("builders", () => {
  it("hello message carries role and version", () => {
    expect(JSON.parse(helloMessage("observer"))).toEqual({
      hello: { role: "observer", protocol_version: PROTOCOL_VERSION },
    });
  });

  it("command message echoes the request id", () => {
    const text = commandMessage(41, { type: "set_mode", mode: "linear" });
    expect(JSON.parse(text)).toEqual({
      request_id: 41,
      command: { type: "set_mode", mode: "linear" },
    });
  });
});
