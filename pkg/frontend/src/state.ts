/** Render-side state: a latest-wins mailbox between the socket and the
 * animation loop, plus motion trails and frame-rate bookkeeping.
 *
 * The socket callback only calls offer(); the render loop only calls take().
 * A burst of frames therefore never queues render work: intermediate poses
 * still land in the trails, the loop draws whatever is newest, and the
 * pipeline upstream is never waited on.
 */

import { FrameMessage, NUM_POINTS, Point } from "./protocol.js";

export const TRAIL_LIMIT = 300;

export type ConnectionStatus = "connecting" | "open" | "retrying" | "stopped";

export class ViewerState {
  status: ConnectionStatus = "connecting";
  /** Malformed frames dropped since startup. */
  parseErrors = 0;
  /** Frames rejected to keep the displayed seq nondecreasing. */
  staleDrops = 0;
  /** Newest accepted seq this session; -1 before the first frame. */
  lastSeq = -1;
  /** Last frame handed to the renderer; redrawn while the stream idles. */
  displayed: FrameMessage | null = null;
  /** Smoothed draw cost in ms, reported back to the server once a second. */
  animateMs: number | null = null;

  private mailbox: FrameMessage | null = null;
  private trails: Point[][] = Array.from({ length: NUM_POINTS }, () => []);
  private frameClock: number[] = [];

  /** Ingest a frame from the wire. Seq must not go backwards within a
   * session (a reconnect calls resetSession first, so a restarted server
   * that numbers from zero again is not mistaken for stale traffic). */
  offer(msg: FrameMessage): boolean {
    if (msg.seq < this.lastSeq) {
      this.staleDrops += 1;
      return false;
    }
    this.lastSeq = msg.seq;
    this.mailbox = msg;
    for (let i = 0; i < NUM_POINTS; i++) {
      const trail = this.trails[i];
      trail.push(msg.pose.points[i]);
      if (trail.length > TRAIL_LIMIT) trail.shift();
    }
    return true;
  }

  /** Newest undisplayed frame, or null when the renderer is ahead. */
  take(): FrameMessage | null {
    const msg = this.mailbox;
    this.mailbox = null;
    if (msg !== null) this.displayed = msg;
    return msg;
  }

  trail(channel: number): readonly Point[] {
    return this.trails[channel];
  }

  allTrails(): readonly (readonly Point[])[] {
    return this.trails;
  }

  /** New websocket session: seq numbering may restart. Trails and the last
   * displayed pose are kept so the picture does not blank on reconnect. */
  resetSession(): void {
    this.lastSeq = -1;
    this.mailbox = null;
  }

  /** Record one completed draw; costMs feeds the animate_ms report and the
   * timestamps feed a one second fps window. */
  noteDraw(costMs: number, now: number): void {
    this.animateMs = this.animateMs === null ? costMs : 0.9 * this.animateMs + 0.1 * costMs;
    this.frameClock.push(now);
    const cutoff = now - 1000;
    while (this.frameClock.length > 0 && this.frameClock[0] <= cutoff) {
      this.frameClock.shift();
    }
  }

  fps(): number {
    return this.frameClock.length;
  }
}
