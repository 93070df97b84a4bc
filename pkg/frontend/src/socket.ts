import { ConnectionState, FocusSnapshot } from "./types.js";

export type SnapshotListener = (snap: FocusSnapshot) => void;
export type StateListener = (state: ConnectionState) => void;

/** Minimal surface of WebSocket we rely on; injectable for tests. */
export interface SocketLike {
  onopen: ((ev: unknown) => void) | null;
  onclose: ((ev: unknown) => void) | null;
  onerror: ((ev: unknown) => void) | null;
  onmessage: ((ev: { data: string }) => void) | null;
  close(): void;
}

export type SocketFactory = (url: string) => SocketLike;

/**
 * Connection state machine around the /ws/focus stream.
 *
 * States: connecting -> live (first message), live -> stale (no message for
 * 2 snapshot periods), stale -> live (message arrives), any -> closed
 * (socket closed; schedules a reconnect and goes back to connecting).
 *
 * Rendering reads `latest` at its own pace; message arrival only updates the
 * buffer (latest-value semantics, no queueing).
 */
export class FocusSocket {
  latest: FocusSnapshot | null = null;
  state: ConnectionState = "connecting";

  private url: string;
  private factory: SocketFactory;
  private socket: SocketLike | null = null;
  private snapshotListeners: SnapshotListener[] = [];
  private stateListeners: StateListener[] = [];
  private staleTimer: ReturnType<typeof setTimeout> | null = null;
  private reconnectTimer: ReturnType<typeof setTimeout> | null = null;
  private stalePeriods = 2;
  private cadenceHz: number;
  private stopped = false;

  constructor(
    url: string,
    cadenceHz: number,
    factory: SocketFactory = (u) => new WebSocket(u) as unknown as SocketLike,
  ) {
    this.url = url;
    this.cadenceHz = cadenceHz;
    this.factory = factory;
  }

  get staleAfterMs(): number {
    return (this.stalePeriods / this.cadenceHz) * 1000;
  }

  onSnapshot(fn: SnapshotListener): void {
    this.snapshotListeners.push(fn);
  }

  onState(fn: StateListener): void {
    this.stateListeners.push(fn);
  }

  connect(): void {
    this.stopped = false;
    this.setState("connecting");
    this.socket = this.factory(this.url);
    this.socket.onmessage = (ev) => this.handleMessage(ev.data);
    this.socket.onclose = () => this.handleClose();
    this.socket.onerror = () => {
      /* close follows; nothing else to do */
    };
  }

  stop(): void {
    this.stopped = true;
    this.clearTimers();
    this.socket?.close();
    this.socket = null;
  }

  private handleMessage(data: string): void {
    const snap = JSON.parse(data) as FocusSnapshot;
    this.latest = snap;
    this.setState("live");
    this.armStaleTimer();
    for (const fn of this.snapshotListeners) fn(snap);
  }

  private handleClose(): void {
    this.clearTimers();
    if (this.stopped) {
      this.setState("closed");
      return;
    }
    this.setState("closed");
    this.reconnectTimer = setTimeout(() => this.connect(), this.staleAfterMs);
  }

  private armStaleTimer(): void {
    if (this.staleTimer !== null) clearTimeout(this.staleTimer);
    this.staleTimer = setTimeout(() => {
      if (this.state === "live") this.setState("stale");
    }, this.staleAfterMs);
  }

  private clearTimers(): void {
    if (this.staleTimer !== null) clearTimeout(this.staleTimer);
    if (this.reconnectTimer !== null) clearTimeout(this.reconnectTimer);
    this.staleTimer = null;
    this.reconnectTimer = null;
  }

  private setState(next: ConnectionState): void {
    if (next === this.state) return;
    this.state = next;
    for (const fn of this.stateListeners) fn(next);
  }
}
