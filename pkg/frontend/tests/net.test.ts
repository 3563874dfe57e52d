import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { backoffDelay, ConsoleLink, type LinkEvent, type SocketLike } from "../src/net.js";

class FakeSocket implements SocketLike {
  sent: string[] = [];
  closed = false;
  onopen: (() => void) | null = null;
  onclose: (() => void) | null = null;
  onerror: (() => void) | null = null;
  onmessage: ((event: { data: unknown }) => void) | null = null;

  send(data: string): void {
    if (this.closed) throw new Error("socket is closed");
    this.sent.push(data);
  }

  close(): void {
    this.closed = true;
  }
}

function harness() {
  const sockets: FakeSocket[] = [];
  const events: LinkEvent[] = [];
  const link = new ConsoleLink(
    "ws://test",
    (event) => events.push(event),
    () => {
      const socket = new FakeSocket();
      sockets.push(socket);
      return socket;
    },
  );
  return { link, sockets, events };
}

describe("backoffDelay", () => {
  it("doubles from half a second and caps at five", () => {
    expect([0, 1, 2, 3, 4, 5, 9].map(backoffDelay)).toEqual([
      500, 1000, 2000, 4000, 5000, 5000, 5000,
    ]);
  });
});

describe("ConsoleLink", () => {
  beforeEach(() => {
    vi.useFakeTimers();
  });
  afterEach(() => {
    vi.useRealTimers();
  });

  it("reports open and forwards frames", () => {
    const { link, sockets, events } = harness();
    link.connect();
    sockets[0]!.onopen!();
    sockets[0]!.onmessage!({ data: '{"type":"hello"}' });
    expect(events).toEqual([
      { type: "status", status: "connecting" },
      { type: "status", status: "open" },
      { type: "message", text: '{"type":"hello"}' },
    ]);
  });

  it("send is refused before open and after close", () => {
    const { link, sockets } = harness();
    expect(link.send({ cmd: "go" })).toBe(false);
    link.connect();
    expect(link.send({ cmd: "go" })).toBe(false);
    sockets[0]!.onopen!();
    expect(link.send({ cmd: "go" })).toBe(true);
    expect(sockets[0]!.sent).toEqual(['{"cmd":"go"}']);
    sockets[0]!.onclose!();
    expect(link.send({ cmd: "go" })).toBe(false);
  });

  it("reconnects with growing delays", () => {
    const { link, sockets, events } = harness();
    link.connect();
    sockets[0]!.onclose!();
    expect(sockets).toHaveLength(1);
    vi.advanceTimersByTime(499);
    expect(sockets).toHaveLength(1);
    vi.advanceTimersByTime(1);
    expect(sockets).toHaveLength(2);
    sockets[1]!.onclose!();
    vi.advanceTimersByTime(999);
    expect(sockets).toHaveLength(2);
    vi.advanceTimersByTime(1);
    expect(sockets).toHaveLength(3);
    expect(events.filter((e) => e.type === "status" && e.status === "closed")).toHaveLength(2);
  });

  it("a successful open resets the backoff", () => {
    const { link, sockets } = harness();
    link.connect();
    sockets[0]!.onclose!();
    vi.advanceTimersByTime(500);
    sockets[1]!.onopen!();
    sockets[1]!.onclose!();
    // back to the shortest delay, not 1000
    vi.advanceTimersByTime(500);
    expect(sockets).toHaveLength(3);
  });

  it("close() stops reconnection for good", () => {
    const { link, sockets } = harness();
    link.connect();
    sockets[0]!.onclose!();
    link.close();
    vi.advanceTimersByTime(60_000);
    expect(sockets).toHaveLength(1);
  });

  it("closing a live link closes the socket quietly", () => {
    const { link, sockets, events } = harness();
    link.connect();
    sockets[0]!.onopen!();
    link.close();
    expect(sockets[0]!.closed).toBe(true);
    vi.advanceTimersByTime(60_000);
    expect(sockets).toHaveLength(1);
    expect(events.filter((e) => e.type === "status" && e.status === "closed")).toHaveLength(0);
  });
});
