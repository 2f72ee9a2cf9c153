/**
 * Canvas renderer: a pure function of ViewState. Draws the boundary and
 * margin box, robots as oriented wedges tinted by light-ring color, humans
 * as circles, gaze lines, the mode banner, condition timer, and the two
 * rolling mini-histograms.
 */

import type { AgentView, BoundaryView } from "./protocol.js";
import { conditionElapsedS, pendingMode, type ViewState } from "./state.js";

export const LIGHT_COLOR_CSS: Record<string, string> = {
  light_blue: "#7fd4f5",
  yellow: "#f3c73a",
  orange: "#f08c00",
  green: "#43b649",
  dark_blue: "#2756c4",
};

const HUMAN_COLOR = "#d95f8a";
const SELECTED_RING = "#ffffff";

interface Transform {
  toX(wx: number): number;
  toY(wy: number): number;
  scale: number;
}

export function worldTransform(
  boundary: BoundaryView,
  width: number,
  height: number,
  padding = 30,
): Transform {
  const w = boundary.x_max - boundary.x_min;
  const l = boundary.y_max - boundary.y_min;
  const scale = Math.min((width - 2 * padding) / w, (height - 2 * padding) / l);
  const ox = (width - scale * w) / 2;
  const oy = (height - scale * l) / 2;
  return {
    // y flips: world y grows upward, canvas y grows downward
    toX: (wx) => ox + (wx - boundary.x_min) * scale,
    toY: (wy) => height - oy - (wy - boundary.y_min) * scale,
    scale,
  };
}

export function screenToWorld(
  boundary: BoundaryView,
  width: number,
  height: number,
  px: number,
  py: number,
): { x: number; y: number } {
  const t = worldTransform(boundary, width, height);
  return {
    x: boundary.x_min + (px - t.toX(boundary.x_min)) / t.scale,
    y: boundary.y_min + (t.toY(boundary.y_min) - py) / t.scale,
  };
}

export function drawScene(ctx: CanvasRenderingContext2D, state: ViewState): void {
  const { canvas } = ctx;
  ctx.fillStyle = "#101418";
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  const boundary = state.config?.boundary;
  if (!boundary || !state.snapshot) {
    banner(ctx, state.connection === "open" ? "waiting for state..." : "connecting...");
    return;
  }
  const t = worldTransform(boundary, canvas.width, canvas.height);
  const snapshot = state.snapshot;
  const disconnected = state.connection !== "open";
  ctx.globalAlpha = disconnected ? 0.45 : 1.0;

  // boundary + margin box
  const m = boundary.margin_m;
  ctx.strokeStyle = "#5c6670";
  ctx.lineWidth = 2;
  strokeWorldRect(ctx, t, boundary.x_min, boundary.y_min, boundary.x_max, boundary.y_max);
  ctx.strokeStyle = "#39424b";
  ctx.setLineDash([6, 6]);
  strokeWorldRect(
    ctx,
    t,
    boundary.x_min + m,
    boundary.y_min + m,
    boundary.x_max - m,
    boundary.y_max - m,
  );
  ctx.setLineDash([]);

  // gaze lines under the agents
  const agentById = new Map(snapshot.agents.map((a) => [a.id, a]));
  ctx.strokeStyle = "rgba(200, 210, 220, 0.35)";
  ctx.lineWidth = 1;
  for (const gaze of snapshot.gaze) {
    const robot = agentById.get(gaze.robot_id);
    if (!robot) continue;
    const target =
      gaze.target === "center"
        ? { x: (boundary.x_min + boundary.x_max) / 2, y: (boundary.y_min + boundary.y_max) / 2 }
        : agentById.get(gaze.target);
    if (!target) continue;
    ctx.beginPath();
    ctx.moveTo(t.toX(robot.x), t.toY(robot.y));
    ctx.lineTo(t.toX(target.x), t.toY(target.y));
    ctx.stroke();
  }

  for (const agent of snapshot.agents) {
    if (agent.kind === "robot") drawRobot(ctx, t, agent, snapshot.lights[String(agent.id)]);
    else drawHuman(ctx, t, agent, agent.id === state.selectedHumanId);
  }

  ctx.globalAlpha = 1.0;
  drawHud(ctx, state);
  if (disconnected) banner(ctx, "disconnected - reconnecting...");
  else if (snapshot.error) banner(ctx, `engine error: ${snapshot.error}`);
}

function strokeWorldRect(
  ctx: CanvasRenderingContext2D,
  t: Transform,
  x0: number,
  y0: number,
  x1: number,
  y1: number,
): void {
  ctx.strokeRect(t.toX(x0), t.toY(y1), (x1 - x0) * t.scale, (y1 - y0) * t.scale);
}

function drawRobot(
  ctx: CanvasRenderingContext2D,
  t: Transform,
  robot: AgentView,
  light: string | undefined,
): void {
  const x = t.toX(robot.x);
  const y = t.toY(robot.y);
  const r = Math.max(7, 0.3 * t.scale);
  ctx.save();
  ctx.translate(x, y);
  ctx.rotate(-robot.heading); // canvas y is flipped
  ctx.fillStyle = LIGHT_COLOR_CSS[light ?? "light_blue"] ?? "#888";
  ctx.beginPath();
  ctx.moveTo(r * 1.4, 0);
  ctx.lineTo(-r * 0.8, r * 0.8);
  ctx.lineTo(-r * 0.4, 0);
  ctx.lineTo(-r * 0.8, -r * 0.8);
  ctx.closePath();
  ctx.fill();
  ctx.restore();
  ctx.fillStyle = "#c6cdd4";
  ctx.font = "10px sans-serif";
  ctx.fillText(String(robot.id), x + r, y - r);
}

function drawHuman(
  ctx: CanvasRenderingContext2D,
  t: Transform,
  human: AgentView,
  selected: boolean,
): void {
  const x = t.toX(human.x);
  const y = t.toY(human.y);
  const r = Math.max(6, 0.25 * t.scale);
  ctx.fillStyle = HUMAN_COLOR;
  ctx.beginPath();
  ctx.arc(x, y, r, 0, 2 * Math.PI);
  ctx.fill();
  if (selected) {
    ctx.strokeStyle = SELECTED_RING;
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.arc(x, y, r + 3, 0, 2 * Math.PI);
    ctx.stroke();
  }
  ctx.fillStyle = "#e8b3c6";
  ctx.font = "10px sans-serif";
  ctx.fillText(`h${human.id}`, x + r + 2, y - r);
}

function drawHud(ctx: CanvasRenderingContext2D, state: ViewState): void {
  const snapshot = state.snapshot;
  if (!snapshot) return;
  ctx.fillStyle = "#e6ebf0";
  ctx.font = "bold 16px sans-serif";
  const pending = pendingMode(state);
  const modeText = pending
    ? `mode: ${snapshot.active_mode} (pending: ${pending}...)`
    : `mode: ${snapshot.active_mode}`;
  ctx.fillText(modeText, 12, 22);
  ctx.font = "12px sans-serif";
  ctx.fillStyle = "#9aa7b2";
  const condition = snapshot.condition
    ? `${snapshot.condition.condition}${snapshot.condition.mode ? `(${snapshot.condition.mode})` : ""}`
    : "free";
  const elapsed = conditionElapsedS(state);
  ctx.fillText(
    `condition: ${condition}${elapsed !== null ? ` ${elapsed.toFixed(0)}s` : ""}  ` +
      `tick ${snapshot.tick}  role: ${state.role ?? "-"}${state.gapSeen ? "  [gaps]" : ""}`,
    12,
    40,
  );
  drawHistogram(ctx, "mode occupancy (s)", state.modeOccupancyS, 12, 60);
  drawHistogram(ctx, "gestures", state.gestureCounts, 12, 170);
  let ty = ctx.canvas.height - 12;
  ctx.fillStyle = "#ff8787";
  for (const toast of state.toasts.slice(-3)) {
    ctx.fillText(toast.text, 12, ty);
    ty -= 16;
  }
}

function drawHistogram(
  ctx: CanvasRenderingContext2D,
  title: string,
  data: Record<string, number>,
  x: number,
  y: number,
): void {
  ctx.fillStyle = "#748088";
  ctx.font = "11px sans-serif";
  ctx.fillText(title, x, y);
  const entries = Object.entries(data).sort((a, b) => b[1] - a[1]).slice(0, 7);
  const max = Math.max(1e-9, ...entries.map(([, v]) => v));
  let row = y + 12;
  for (const [label, value] of entries) {
    ctx.fillStyle = "#3d4850";
    ctx.fillRect(x + 62, row - 8, (80 * value) / max, 9);
    ctx.fillStyle = "#aab6bf";
    ctx.fillText(label.slice(0, 10), x, row);
    ctx.fillText(value >= 10 ? value.toFixed(0) : value.toFixed(1), x + 148, row);
    row += 13;
  }
}

function banner(ctx: CanvasRenderingContext2D, text: string): void {
  const { canvas } = ctx;
  ctx.fillStyle = "rgba(16, 20, 24, 0.7)";
  ctx.fillRect(0, canvas.height / 2 - 24, canvas.width, 48);
  ctx.fillStyle = "#e6ebf0";
  ctx.font = "bold 18px sans-serif";
  ctx.textAlign = "center";
  ctx.fillText(text, canvas.width / 2, canvas.height / 2 + 6);
  ctx.textAlign = "left";
}
