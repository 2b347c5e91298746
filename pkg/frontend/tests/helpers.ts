import { SocketLike, Scheduler } from "../src/connection.js";
import { FrameMessage, Point } from "../src/protocol.js";

/** Frame at the synthetic rest pose; override fields per test. */
export function makeFrame(seq: number, overrides: Partial<FrameMessage> = {}): FrameMessage {
  const points: Point[] = [
    [50, -5],
    [35, 2],
    [20, 4],
    [62, 8],
    [60, -10],
    [52, -22],
  ];
  return {
    seq,
    speech: true,
    ema: Array.from({ length: 12 }, (_, i) => 0.5 * i),
    pose: { points, theta: 0.1 },
    lat_ms: { model: 1.2, send: 0.3 },
    ...overrides,
  };
}

export function frameJson(seq: number, overrides: Partial<FrameMessage> = {}): string {
  return JSON.stringify(makeFrame(seq, overrides));
}

/** Scripted socket; tests fire the events by hand. */
export class FakeSocket implements SocketLike {
  onopen: ((ev?: unknown) => void) | null = null;
  onmessage: ((ev: { data: unknown }) => void) | null = null;
  onclose: ((ev?: unknown) => void) | null = null;
  onerror: ((ev?: unknown) => void) | null = null;
  sent: string[] = [];
  closed = false;

  send(data: string): void {
    this.sent.push(data);
  }

  close(): void {
    this.closed = true;
  }

  emitOpen(): void {
    this.onopen?.();
  }

  emitMessage(text: string): void {
    this.onmessage?.({ data: text });
  }

  emitError(): void {
    this.onerror?.();
  }

  emitClose(): void {
    this.onclose?.();
  }
}

/** Manual clock so reconnect timing is deterministic in unit tests. */
export class FakeScheduler implements Scheduler {
  now = 0;
  delays: number[] = [];
  private nextId = 1;
  private tasks: { id: number; fn: () => void; at: number }[] = [];

  set(fn: () => void, ms: number): unknown {
    this.delays.push(ms);
    const id = this.nextId++;
    this.tasks.push({ id, fn, at: this.now + ms });
    return id;
  }

  clear(id: unknown): void {
    this.tasks = this.tasks.filter((t) => t.id !== id);
  }

  get pending(): number {
    return this.tasks.length;
  }

  advance(ms: number): void {
    this.now += ms;
    const due = this.tasks.filter((t) => t.at <= this.now).sort((a, b) => a.at - b.at);
    this.tasks = this.tasks.filter((t) => t.at > this.now);
    for (const t of due) t.fn();
  }
}
