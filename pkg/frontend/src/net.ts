/**
 * Engine link: one WebSocket, auto-reconnect with capped exponential
 * backoff.  The link owns no show state; it forwards raw frames and
 * connection transitions to a single callback and exposes a best-effort
 * send that reports failure instead of queueing.
 */

import type { ConnectionStatus } from "./model.js";
import type { Command } from "./types.js";

export type SocketLike = {
  send(data: string): void;
  close(): void;
  onopen: (() => void) | null;
  onclose: (() => void) | null;
  onerror: (() => void) | null;
  onmessage: ((event: { data: unknown }) => void) | null;
};

export type SocketFactory = (url: string) => SocketLike;

export type LinkEvent =
  | { type: "status"; status: ConnectionStatus }
  | { type: "message"; text: string };

export function backoffDelay(attempt: number): number {
  return Math.min(500 * 2 ** attempt, 5000);
}

export class ConsoleLink {
  private socket: SocketLike | null = null;
  private ready = false;
  private attempt = 0;
  private stopped = false;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private readonly url: string,
    private readonly onEvent: (event: LinkEvent) => void,
    private readonly makeSocket: SocketFactory = (url) =>
      new WebSocket(url) as unknown as SocketLike,
  ) {}

  connect(): void {
    if (this.stopped) return;
    this.onEvent({ type: "status", status: "connecting" });
    let socket: SocketLike;
    try {
      socket = this.makeSocket(this.url);
    } catch {
      this.scheduleReconnect();
      return;
    }
    this.socket = socket;
    socket.onopen = () => {
      this.attempt = 0;
      this.ready = true;
      this.onEvent({ type: "status", status: "open" });
    };
    socket.onmessage = (event) => this.onEvent({ type: "message", text: String(event.data) });
    socket.onerror = () => {
      // a close event always follows; reconnect is scheduled there
    };
    socket.onclose = () => {
      this.socket = null;
      this.ready = false;
      this.onEvent({ type: "status", status: "closed" });
      this.scheduleReconnect();
    };
  }

  private scheduleReconnect(): void {
    if (this.stopped || this.timer !== null) return;
    const delay = backoffDelay(this.attempt);
    this.attempt += 1;
    this.timer = setTimeout(() => {
      this.timer = null;
      this.connect();
    }, delay);
  }

  send(command: Command): boolean {
    if (this.socket === null || !this.ready) return false;
    try {
      this.socket.send(JSON.stringify(command));
      return true;
    } catch {
      return false;
    }
  }

  close(): void {
    this.stopped = true;
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = null;
    this.ready = false;
    if (this.socket !== null) {
      const socket = this.socket;
      this.socket = null;
      socket.onclose = null;
      socket.close();
    }
  }
}
