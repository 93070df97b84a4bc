import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";
import { FocusSocket, SocketLike } from "../src/socket.js";
import { ConnectionState, FocusSnapshot } from "../src/types.js";

class MockSocket implements SocketLike {
  onopen: ((ev: unknown) => void) | null = null;
  onclose: ((ev: unknown) => void) | null = null;
  onerror: ((ev: unknown) => void) | null = null;
  onmessage: ((ev: { data: string }) => void) | null = null;
  closed = false;
  close(): void {
    this.closed = true;
    this.onclose?.({});
  }
  emit(snap: Partial<FocusSnapshot>): void {
    this.onmessage?.({ data: JSON.stringify({ ...BASE, ...snap }) });
  }
}

const BASE: FocusSnapshot = {
  t: 0,
  left_rate: 100,
  right_rate: 100,
  ratio_percent: 0,
  left_peak: 100,
  right_peak: 100,
  in_focus: false,
  window: 0.1,
};

const CADENCE_HZ = 10; // 2 periods = 200 ms

describe("FocusSocket state machine", () => {
  let sockets: MockSocket[];
  let socket: FocusSocket;
  let states: ConnectionState[];

  beforeEach(() => {
    vi.useFakeTimers();
    sockets = [];
    socket = new FocusSocket("ws://test/ws/focus", CADENCE_HZ, () => {
      const s = new MockSocket();
      sockets.push(s);
      return s;
    });
    states = [];
    socket.onState((s) => states.push(s));
  });

  afterEach(() => {
    vi.useRealTimers();
  });

  it("starts connecting and goes live on the first message", () => {
    socket.connect();
    expect(socket.state).toBe("connecting");
    sockets[0].emit({ t: 1 });
    expect(socket.state).toBe("live");
    expect(socket.latest?.t).toBe(1);
  });

  it("turns stale after two snapshot periods of silence", () => {
    socket.connect();
    sockets[0].emit({ t: 1 });
    expect(socket.state).toBe("live");
    vi.advanceTimersByTime(199);
    expect(socket.state).toBe("live");
    vi.advanceTimersByTime(2);
    expect(socket.state).toBe("stale");
  });

  it("returns to live when data resumes", () => {
    socket.connect();
    sockets[0].emit({ t: 1 });
    vi.advanceTimersByTime(250);
    expect(socket.state).toBe("stale");
    sockets[0].emit({ t: 2 });
    expect(socket.state).toBe("live");
    expect(states).toEqual(["live", "stale", "live"]);
  });

  it("closes and reconnects automatically", () => {
    socket.connect();
    sockets[0].emit({ t: 1 });
    sockets[0].close();
    expect(socket.state).toBe("closed");
    vi.advanceTimersByTime(250);
    expect(sockets.length).toBe(2); // reconnected
    expect(socket.state).toBe("connecting");
    sockets[1].emit({ t: 2 });
    expect(socket.state).toBe("live");
  });

  it("keeps only the latest snapshot (latest-value buffer)", () => {
    socket.connect();
    sockets[0].emit({ t: 1, left_rate: 10 });
    sockets[0].emit({ t: 2, left_rate: 20 });
    sockets[0].emit({ t: 3, left_rate: 30 });
    expect(socket.latest?.left_rate).toBe(30);
  });

  it("stop() closes without reconnecting", () => {
    socket.connect();
    sockets[0].emit({ t: 1 });
    socket.stop();
    vi.advanceTimersByTime(1000);
    expect(sockets.length).toBe(1);
    expect(socket.state).toBe("closed");
  });
});
