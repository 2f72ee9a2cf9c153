/**
 * Console entry point: socket -> reducer -> canvas, inputs -> commands.
 */

import { makeFloorPointer, conditionToCommand, keyToCommand } from "./input.js";
import { commandMessage, parseFrame, type CommandObject } from "./protocol.js";
import { drawScene, screenToWorld } from "./render.js";
import {
  applyFrame,
  initialViewState,
  resetConnection,
  trackPending,
} from "./state.js";
import { GatewaySocket } from "./socket.js";

const canvas = document.getElementById("scene") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const conditionSelect = document.getElementById("condition") as HTMLSelectElement;
const state = initialViewState();

const url = `${location.protocol === "https:" ? "wss" : "ws"}://${location.host}/ws`;
let nextRequestId = 1;

const socket = new GatewaySocket({
  url,
  role: "choreographer",
  onFrameText: (text) => {
    try {
      applyFrame(state, parseFrame(text), performance.now());
    } catch (exc) {
      console.warn("bad frame dropped:", (exc as Error).message);
    }
  },
  onStatus: (status) => resetConnection(state, status),
});

function send(command: CommandObject): void {
  const requestId = nextRequestId++;
  if (socket.send(commandMessage(requestId, command))) {
    trackPending(state, requestId, command, performance.now());
  }
}

document.addEventListener("keydown", (ev) => {
  if (ev.target instanceof HTMLSelectElement || ev.target instanceof HTMLInputElement) return;
  const command = keyToCommand(ev.key, state);
  if (command) {
    send(command);
    ev.preventDefault();
  }
});

conditionSelect.addEventListener("change", () => {
  const command = conditionToCommand(conditionSelect.value);
  if (command) send(command);
});

const pointer = makeFloorPointer(state);

function pointerWorld(ev: PointerEvent): { x: number; y: number } | null {
  if (!state.config) return null;
  const rect = canvas.getBoundingClientRect();
  return screenToWorld(
    state.config.boundary,
    canvas.width,
    canvas.height,
    ((ev.clientX - rect.left) / rect.width) * canvas.width,
    ((ev.clientY - rect.top) / rect.height) * canvas.height,
  );
}

canvas.addEventListener("pointerdown", (ev) => {
  const world = pointerWorld(ev);
  if (!world) return;
  canvas.setPointerCapture(ev.pointerId);
  const command = pointer.down(world.x, world.y, performance.now());
  if (command) send(command);
});
canvas.addEventListener("pointermove", (ev) => {
  const world = pointerWorld(ev);
  if (!world) return;
  const command = pointer.move(world.x, world.y, performance.now());
  if (command) send(command);
});
canvas.addEventListener("pointerup", (ev) => {
  const world = pointerWorld(ev);
  if (!world) return;
  const command = pointer.up(world.x, world.y, performance.now());
  if (command) send(command);
});

function frameLoop(): void {
  drawScene(ctx, state);
  requestAnimationFrame(frameLoop);
}

socket.connect();
requestAnimationFrame(frameLoop);
