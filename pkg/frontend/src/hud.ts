/** HUD text: the server-side latencies riding each frame plus the local
 * render numbers. Pure formatting so it is testable without a DOM. */

import { FrameMessage } from "./protocol.js";
import { ConnectionStatus } from "./state.js";

export interface HudInputs {
  status: ConnectionStatus;
  frame: FrameMessage | null;
  fps: number;
  animateMs: number | null;
  parseErrors: number;
  staleDrops: number;
}

function ms(v: number | null | undefined): string {
  return v === null || v === undefined ? "--" : `${v.toFixed(1)} ms`;
}

export function hudLines(h: HudInputs): string[] {
  const f = h.frame;
  const lines = [
    `status  ${h.status}`,
    `seq     ${f === null ? "--" : f.seq}${f !== null && !f.speech ? "  (held)" : ""}`,
    `model   ${ms(f?.lat_ms?.model)}`,
    `send    ${ms(f?.lat_ms?.send)}`,
    `animate ${ms(h.animateMs)}`,
    `fps     ${h.fps}`,
  ];
  if (h.parseErrors > 0) lines.push(`bad frames  ${h.parseErrors}`);
  if (h.staleDrops > 0) lines.push(`stale drops ${h.staleDrops}`);
  return lines;
}
