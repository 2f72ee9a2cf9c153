/**
 * Keyboard and pointer mapping. Keyboard-first: digits 1-7 pick weight
 * modes, Q/W/E hold a gesture on the selected human, R releases it. The
 * mouse only places and drags humans (move commands throttled to 10 Hz).
 */

import { MODE_IDS, type CommandObject, type GestureId } from "./protocol.js";
import { humansInView, nextHumanId, type ViewState } from "./state.js";

export const DRAG_THROTTLE_MS = 100;

const GESTURE_KEYS: Record<string, GestureId> = {
  q: "right_hand_up",
  w: "left_hand_up",
  e: "hands_together",
};

export function keyToCommand(key: string, state: ViewState): CommandObject | null {
  const digit = Number.parseInt(key, 10);
  if (digit >= 1 && digit <= MODE_IDS.length) {
    const mode = MODE_IDS[digit - 1];
    return mode ? { type: "set_mode", mode } : null;
  }
  const lower = key.toLowerCase();
  const gesture = GESTURE_KEYS[lower];
  if (gesture && state.selectedHumanId !== null) {
    return { type: "set_gesture", human_id: state.selectedHumanId, gesture };
  }
  if (lower === "r" && state.selectedHumanId !== null) {
    return { type: "set_gesture", human_id: state.selectedHumanId, gesture: null };
  }
  if (lower === "x" && state.selectedHumanId !== null) {
    return { type: "remove_human", human_id: state.selectedHumanId };
  }
  return null;
}

export function conditionToCommand(value: string): CommandObject | null {
  switch (value) {
    case "human_choreographer":
    case "model_prediction":
    case "control":
      return { type: "set_condition", condition: value };
    case "none":
    default:
      return null;
  }
}

/** Nearest human within pick radius, else null (meaning: empty floor). */
export function pickHuman(
  state: ViewState,
  worldX: number,
  worldY: number,
  radius = 0.6,
): number | null {
  let best: number | null = null;
  let bestDist = radius;
  for (const h of humansInView(state)) {
    const d = Math.hypot(h.x - worldX, h.y - worldY);
    if (d <= bestDist) {
      best = h.id;
      bestDist = d;
    }
  }
  return best;
}

export interface FloorPointer {
  down(worldX: number, worldY: number, nowMs: number): CommandObject | null;
  move(worldX: number, worldY: number, nowMs: number): CommandObject | null;
  up(worldX: number, worldY: number, nowMs: number): CommandObject | null;
}

/**
 * Click empty floor: add a human (and select it). Click a human: select.
 * Drag a selected human: stream move commands, at most one per
 * DRAG_THROTTLE_MS, with a final flush on release.
 */
export function makeFloorPointer(state: ViewState): FloorPointer {
  let dragging: number | null = null;
  let lastMoveMs = -Infinity;
  let moved = false;

  return {
    down(worldX, worldY, nowMs) {
      const hit = pickHuman(state, worldX, worldY);
      moved = false;
      if (hit !== null) {
        state.selectedHumanId = hit;
        dragging = hit;
        lastMoveMs = nowMs;
        return null;
      }
      const id = nextHumanId(state);
      state.selectedHumanId = id;
      return { type: "add_human", human_id: id, x: worldX, y: worldY };
    },
    move(worldX, worldY, nowMs) {
      if (dragging === null) return null;
      if (nowMs - lastMoveMs < DRAG_THROTTLE_MS) return null;
      lastMoveMs = nowMs;
      moved = true;
      return { type: "move_human", human_id: dragging, x: worldX, y: worldY };
    },
    up(worldX, worldY, _nowMs) {
      const id = dragging;
      dragging = null;
      if (id === null || !moved) return null;
      return { type: "move_human", human_id: id, x: worldX, y: worldY };
    },
  };
}
