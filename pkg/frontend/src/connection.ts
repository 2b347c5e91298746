/** Websocket lifecycle: connect, feed ViewerState, reconnect with backoff.
 *
 * The socket is injected as a factory so unit tests drive fakes and the node
 * integration test plugs in the "ws" package; the browser passes the native
 * WebSocket constructor. Only the close event schedules a retry: errors are
 * always followed by close, and scheduling on both would double-book.
 */

import { Backoff } from "./backoff.js";
import { FrameMessage, parseFrameMessage } from "./protocol.js";
import { ViewerState } from "./state.js";

/** Minimal surface shared by the browser WebSocket and the ws package.
 * Handler params are any because the two implementations disagree on the
 * event types; our handlers only ever touch ev.data. */
export interface SocketLike {
  onopen: ((ev?: any) => void) | null;
  onmessage: ((ev: any) => void) | null;
  onclose: ((ev?: any) => void) | null;
  onerror: ((ev?: any) => void) | null;
  send(data: string): void;
  close(): void;
}

export type SocketFactory = (url: string) => SocketLike;

/** Injectable timers; unit tests swap in fakes, everything else uses the
 * globals (evaluated at call time so vitest fake timers still apply). */
export interface Scheduler {
  set(fn: () => void, ms: number): unknown;
  clear(id: unknown): void;
}

const globalScheduler: Scheduler = {
  set: (fn, ms) => setTimeout(fn, ms),
  clear: (id) => clearTimeout(id as Parameters<typeof clearTimeout>[0]),
};

export interface StreamClientOptions {
  backoff?: Backoff;
  scheduler?: Scheduler;
  /** User-facing status line; null clears it. Never throws page-side. */
  onBanner?: (text: string | null) => void;
  /** Every accepted frame, in arrival order. */
  onFrame?: (msg: FrameMessage) => void;
}

export class StreamClient {
  private socket: SocketLike | null = null;
  private timer: unknown = null;
  private stopped = false;
  private readonly backoff: Backoff;
  private readonly scheduler: Scheduler;

  constructor(
    readonly url: string,
    readonly state: ViewerState,
    private readonly factory: SocketFactory,
    private readonly opts: StreamClientOptions = {},
  ) {
    this.backoff = opts.backoff ?? new Backoff();
    this.scheduler = opts.scheduler ?? globalScheduler;
  }

  start(): void {
    this.stopped = false;
    this.connect();
  }

  stop(): void {
    this.stopped = true;
    if (this.timer !== null) {
      this.scheduler.clear(this.timer);
      this.timer = null;
    }
    this.state.status = "stopped";
    const sock = this.socket;
    this.socket = null;
    if (sock !== null) {
      try {
        sock.close();
      } catch {
        // already closed; nothing to release
      }
    }
  }

  /** Send a report upstream; silently a no-op while disconnected. */
  send(obj: unknown): void {
    if (this.socket === null || this.state.status !== "open") return;
    try {
      this.socket.send(JSON.stringify(obj));
    } catch {
      // socket raced shut between the check and the send; the close
      // handler owns recovery
    }
  }

  private connect(): void {
    this.timer = null;
    let sock: SocketLike;
    try {
      sock = this.factory(this.url);
    } catch {
      this.scheduleRetry();
      return;
    }
    this.socket = sock;
    sock.onopen = () => {
      if (this.stopped) return;
      this.backoff.reset();
      this.state.resetSession();
      this.state.status = "open";
      this.opts.onBanner?.(null);
    };
    sock.onmessage = (ev: { data: unknown }) => {
      if (this.stopped) return;
      const text = typeof ev.data === "string" ? ev.data : String(ev.data);
      const msg = parseFrameMessage(text);
      if (msg === null) {
        this.state.parseErrors += 1;
        return;
      }
      if (this.state.offer(msg)) this.opts.onFrame?.(msg);
    };
    sock.onerror = () => {
      // close always follows; the banner text comes from the close path
    };
    sock.onclose = () => {
      if (this.stopped) return;
      this.socket = null;
      this.scheduleRetry();
    };
  }

  private scheduleRetry(): void {
    if (this.stopped || this.timer !== null) return;
    const delay = this.backoff.nextMs();
    this.state.status = "retrying";
    this.opts.onBanner?.(`connection lost, retrying in ${(delay / 1000).toFixed(2)} s`);
    this.timer = this.scheduler.set(() => this.connect(), delay);
  }
}
