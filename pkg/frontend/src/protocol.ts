/** Wire types for the /stream websocket feed.
 *
 * The server pushes one JSON text frame per published EMA frame:
 *
 *   {"seq": int, "speech": bool, "ema": [12 floats, mm],
 *    "pose": {"points": [[x, y] x 6, mm], "theta": radians},
 *    "lat_ms": {"model": ms, "send": ms} | null}
 *
 * and accepts {"animate_ms": ms} reports back from clients. Parsing is
 * strict: anything that does not match the schema exactly yields null so the
 * caller can count and drop it without a throw ever reaching the render loop.
 */

export const NUM_DIMS = 12;
export const NUM_POINTS = 6;

/** Channel order matches the server: tongue tip, body, dorsum, then lips
 * and lower incisor. pose.points and trails are indexed in this order. */
export const CHANNEL_NAMES = ["TT", "TB", "TD", "UL", "LL", "LI"] as const;

export type Point = [number, number];

export interface Latency {
  model: number;
  send: number;
}

export interface Pose {
  points: Point[];
  theta: number;
}

export interface FrameMessage {
  seq: number;
  speech: boolean;
  ema: number[];
  pose: Pose;
  lat_ms: Latency | null;
}

function finite(v: unknown): v is number {
  return typeof v === "number" && Number.isFinite(v);
}

function parsePoint(v: unknown): Point | null {
  if (!Array.isArray(v) || v.length !== 2) return null;
  if (!finite(v[0]) || !finite(v[1])) return null;
  return [v[0], v[1]];
}

function parsePose(v: unknown): Pose | null {
  if (typeof v !== "object" || v === null) return null;
  const o = v as Record<string, unknown>;
  if (!Array.isArray(o.points) || o.points.length !== NUM_POINTS) return null;
  const points: Point[] = [];
  for (const raw of o.points) {
    const p = parsePoint(raw);
    if (p === null) return null;
    points.push(p);
  }
  if (!finite(o.theta)) return null;
  return { points, theta: o.theta };
}

function parseLatency(v: unknown): Latency | null | undefined {
  if (v === null || v === undefined) return null;
  if (typeof v !== "object") return undefined;
  const o = v as Record<string, unknown>;
  if (!finite(o.model) || !finite(o.send)) return undefined;
  return { model: o.model, send: o.send };
}

export function parseFrameMessage(text: string): FrameMessage | null {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch {
    return null;
  }
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) return null;
  const o = raw as Record<string, unknown>;
  if (!finite(o.seq) || !Number.isInteger(o.seq) || o.seq < 0) return null;
  if (typeof o.speech !== "boolean") return null;
  if (!Array.isArray(o.ema) || o.ema.length !== NUM_DIMS || !o.ema.every(finite)) {
    return null;
  }
  const pose = parsePose(o.pose);
  if (pose === null) return null;
  const lat = parseLatency(o.lat_ms);
  if (lat === undefined) return null;
  return {
    seq: o.seq,
    speech: o.speech,
    ema: o.ema as number[],
    pose,
    lat_ms: lat,
  };
}
