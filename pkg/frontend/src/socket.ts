/**
 * Reconnecting gateway socket. The WebSocket constructor is injectable so
 * tests can drive the client with a scripted fake.
 */

import { helloMessage, type Role } from "./protocol.js";

export interface WebSocketLike {
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
  send(data: string): void;
  close(): void;
}

export type WebSocketFactory = (url: string) => WebSocketLike;

export interface GatewaySocketOptions {
  url: string;
  role: Role;
  onFrameText: (text: string) => void;
  onStatus: (status: "connecting" | "open" | "closed") => void;
  factory?: WebSocketFactory;
  /** Base reconnect delay; doubles up to 16x. */
  reconnectDelayMs?: number;
  scheduler?: (fn: () => void, ms: number) => unknown;
}

export class GatewaySocket {
  private ws: WebSocketLike | null = null;
  private attempts = 0;
  private stopped = false;
  private readonly opts: Required<Pick<GatewaySocketOptions, "reconnectDelayMs">> &
    GatewaySocketOptions;

  constructor(options: GatewaySocketOptions) {
    this.opts = { reconnectDelayMs: 1000, ...options };
  }

  connect(): void {
    if (this.stopped) return;
    const factory =
      this.opts.factory ?? ((url: string) => new WebSocket(url) as unknown as WebSocketLike);
    this.opts.onStatus("connecting");
    const ws = factory(this.opts.url);
    this.ws = ws;
    ws.onopen = () => {
      this.attempts = 0;
      ws.send(helloMessage(this.opts.role));
      this.opts.onStatus("open");
    };
    ws.onmessage = (ev) => {
      if (typeof ev.data === "string") this.opts.onFrameText(ev.data);
    };
    ws.onerror = () => {
      // close follows; nothing to do here
    };
    ws.onclose = () => {
      this.ws = null;
      this.opts.onStatus("closed");
      if (this.stopped) return;
      const delay = this.opts.reconnectDelayMs * Math.min(16, 2 ** this.attempts);
      this.attempts += 1;
      const schedule = this.opts.scheduler ?? setTimeout;
      schedule(() => this.connect(), delay);
    };
  }

  send(text: string): boolean {
    if (!this.ws) return false;
    this.ws.send(text);
    return true;
  }

  stop(): void {
    this.stopped = true;
    this.ws?.close();
  }
}
