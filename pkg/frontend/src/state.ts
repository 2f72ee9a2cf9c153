/**
 * View state and the frame reducer.
 *
 * The console never simulates: every rendered position comes from a state
 * frame. Local intents (a pressed mode key, a placed human) are tracked as
 * pending request ids and shown as provisional until the server acks.
 */

import type {
  CommandObject,
  EngineConfigView,
  Frame,
  RequestId,
  Role,
  SnapshotView,
} from "./protocol.js";

export type ConnectionStatus = "connecting" | "open" | "closed";

export interface PendingCommand {
  command: CommandObject;
  sentAtMs: number;
}

export interface Toast {
  text: string;
  atMs: number;
}

export interface ViewState {
  connection: ConnectionStatus;
  role: Role | null;
  config: EngineConfigView | null;
  stateIntervalTicks: number;
  snapshot: SnapshotView | null;
  lastSequence: number;
  gapSeen: boolean;
  selectedHumanId: number | null;
  pending: Map<RequestId, PendingCommand>;
  /** Rolling occupancy from received frames (seconds, approximate at the
   * state-frame rate; the session log is the exact record). */
  modeOccupancyS: Record<string, number>;
  gestureCounts: Record<string, number>;
  conditionSinceTick: number | null;
  toasts: Toast[];
}

export function initialViewState(): ViewState {
  return {
    connection: "connecting",
    role: null,
    config: null,
    stateIntervalTicks: 2,
    snapshot: null,
    lastSequence: -1,
    gapSeen: false,
    selectedHumanId: null,
    pending: new Map(),
    modeOccupancyS: {},
    gestureCounts: {},
    conditionSinceTick: null,
    toasts: [],
  };
}

export function applyFrame(state: ViewState, frame: Frame, nowMs: number): void {
  if (frame.sequence <= state.lastSequence) {
    // out-of-order delivery cannot happen on one socket; a reconnect
    // resets the counter via resetConnection instead
    return;
  }
  state.lastSequence = frame.sequence;
  switch (frame.kind) {
    case "hello":
      state.role = frame.payload.role;
      state.config = frame.payload.config;
      state.stateIntervalTicks = frame.payload.state_interval_ticks;
      break;
    case "state":
      applySnapshot(state, frame.payload);
      break;
    case "ack":
      state.pending.delete(frame.payload.request_id);
      break;
    case "error":
      if (frame.payload.request_id !== undefined) {
        state.pending.delete(frame.payload.request_id);
      }
      state.toasts.push({ text: frame.payload.reason, atMs: nowMs });
      break;
  }
  pruneToasts(state, nowMs);
}

function applySnapshot(state: ViewState, snapshot: SnapshotView): void {
  const previousTick = state.snapshot?.tick ?? null;
  const previousCondition = JSON.stringify(state.snapshot?.condition ?? null);
  if (snapshot.gap_before) state.gapSeen = true;
  state.snapshot = snapshot;

  const tickHz = state.config?.tick_hz ?? 20;
  if (previousTick !== null && snapshot.tick > previousTick) {
    const seconds = (snapshot.tick - previousTick) / tickHz;
    state.modeOccupancyS[snapshot.active_mode] =
      (state.modeOccupancyS[snapshot.active_mode] ?? 0) + seconds;
  }
  for (const onset of snapshot.gesture_onsets) {
    state.gestureCounts[onset.gesture] = (state.gestureCounts[onset.gesture] ?? 0) + 1;
  }
  if (JSON.stringify(snapshot.condition) !== previousCondition) {
    state.conditionSinceTick = snapshot.tick;
  }
  if (
    state.selectedHumanId !== null &&
    !snapshot.agents.some((a) => a.kind === "human" && a.id === state.selectedHumanId)
  ) {
    state.selectedHumanId = null;
  }
}

export function resetConnection(state: ViewState, status: ConnectionStatus): void {
  state.connection = status;
  if (status !== "open") {
    state.role = null;
    state.pending.clear();
  }
  state.lastSequence = -1;
}

export function trackPending(
  state: ViewState,
  requestId: RequestId,
  command: CommandObject,
  nowMs: number,
): void {
  state.pending.set(requestId, { command, sentAtMs: nowMs });
}

export function pendingMode(state: ViewState): string | null {
  for (const entry of state.pending.values()) {
    if (entry.command.type === "set_mode") return entry.command.mode;
  }
  return null;
}

function pruneToasts(state: ViewState, nowMs: number, keepMs = 5000): void {
  state.toasts = state.toasts.filter((t) => nowMs - t.atMs < keepMs);
}

/** Seconds the current condition has been running, from frame data only. */
export function conditionElapsedS(state: ViewState): number | null {
  if (!state.snapshot || state.conditionSinceTick === null || !state.snapshot.condition) {
    return null;
  }
  const tickHz = state.config?.tick_hz ?? 20;
  return (state.snapshot.tick - state.conditionSinceTick) / tickHz;
}

export function humansInView(state: ViewState): { id: number; x: number; y: number }[] {
  if (!state.snapshot) return [];
  return state.snapshot.agents
    .filter((a) => a.kind === "human")
    .map((a) => ({ id: a.id, x: a.x, y: a.y }));
}

export function nextHumanId(state: ViewState): number {
  const humans = humansInView(state);
  return humans.length ? Math.max(...humans.map((h) => h.id)) + 1 : 100;
}
