/** Pose geometry to screen-space scene, plus the canvas stroking for it.
 *
 * computeScene is pure (arrays in, arrays out, no canvas types at runtime)
 * so tests can pin the geometry and the per-frame cost budget without a DOM;
 * drawScene is the thin stroke layer on top.
 */

import { CHANNEL_NAMES, FrameMessage, Point } from "./protocol.js";

/** World extents in mm. Cover the bundled calibration ranges (x 0..74,
 * y -30..24) plus the jaw pivot and a little slack for trails. */
export const WORLD = { xMin: -6, xMax: 80, yMin: -38, yMax: 30 };

/** Rotation center of the jaw hinge; must match the serving rig. */
export const JAW_PIVOT: Point = [20, -30];

export interface Viewport {
  width: number;
  height: number;
}

export interface Transform {
  scale: number;
  ox: number;
  oy: number;
}

/** Uniform scale, world y up mapped to screen y down, centred in the
 * viewport. Aspect is preserved; the short axis gets symmetric padding. */
export function fitTransform(vp: Viewport, world = WORLD): Transform {
  const w = world.xMax - world.xMin;
  const h = world.yMax - world.yMin;
  const scale = Math.min(vp.width / w, vp.height / h);
  const ox = (vp.width - scale * w) / 2 - scale * world.xMin;
  const oy = (vp.height + scale * h) / 2 + scale * world.yMin;
  return { scale, ox, oy };
}

export function toScreen(t: Transform, p: Point): Point {
  return [t.ox + t.scale * p[0], t.oy - t.scale * p[1]];
}

export function rotateAbout(p: Point, pivot: Point, theta: number): Point {
  const dx = p[0] - pivot[0];
  const dy = p[1] - pivot[1];
  const c = Math.cos(theta);
  const s = Math.sin(theta);
  return [pivot[0] + c * dx - s * dy, pivot[1] + s * dx + c * dy];
}

function catmullRom(p0: Point, p1: Point, p2: Point, p3: Point, t: number): Point {
  const t2 = t * t;
  const t3 = t2 * t;
  const blend = (a: number, b: number, c: number, d: number) =>
    0.5 * (2 * b + (c - a) * t + (2 * a - 5 * b + 4 * c - d) * t2 + (3 * b - a - 3 * c + d) * t3);
  return [blend(p0[0], p1[0], p2[0], p3[0]), blend(p0[1], p1[1], p2[1], p3[1])];
}

/** Uniform Catmull-Rom through the knots, endpoints clamped by duplication.
 * Interpolating, not approximating: the curve passes through every knot
 * (sample indices 0, n, 2n, ... and the appended final knot). */
export function splineThrough(knots: Point[], samplesPerSegment = 12): Point[] {
  if (knots.length < 2) return knots.slice();
  const pts: Point[] = [];
  for (let seg = 0; seg + 1 < knots.length; seg++) {
    const p0 = knots[Math.max(seg - 1, 0)];
    const p1 = knots[seg];
    const p2 = knots[seg + 1];
    const p3 = knots[Math.min(seg + 2, knots.length - 1)];
    for (let i = 0; i < samplesPerSegment; i++) {
      pts.push(catmullRom(p0, p1, p2, p3, i / samplesPerSegment));
    }
  }
  pts.push(knots[knots.length - 1]);
  return pts;
}

export interface Scene {
  /** Six articulator dots in screen space, channel order. */
  points: Point[];
  /** Polyline through TD, TB, TT (back of the tongue to the tip). */
  tongue: Point[];
  /** Upper lip, lower lip. */
  lips: [Point, Point];
  /** Pivot to lower incisor; the hinge line the server rotated by theta. */
  jaw: [Point, Point];
  /** Screen-space motion trails, channel order, oldest first. */
  trails: Point[][];
  /** True while speech is gated off and the pose is a hold. */
  dim: boolean;
  theta: number;
}

export function computeScene(
  msg: FrameMessage,
  trails: readonly (readonly Point[])[] | null,
  t: Transform,
): Scene {
  const world = msg.pose.points;
  const points = world.map((p) => toScreen(t, p));
  const tongue = splineThrough([world[2], world[1], world[0]]).map((p) => toScreen(t, p));
  return {
    points,
    tongue,
    lips: [points[3], points[4]],
    jaw: [toScreen(t, JAW_PIVOT), points[5]],
    trails: (trails ?? []).map((trail) => trail.map((p) => toScreen(t, p))),
    dim: !msg.speech,
    theta: msg.pose.theta,
  };
}

const TRAIL_STRIDE = 25; // alpha buckets; one stroke per bucket, not per point

export function drawScene(ctx: CanvasRenderingContext2D, scene: Scene, vp: Viewport): void {
  ctx.clearRect(0, 0, vp.width, vp.height);
  ctx.fillStyle = "#10141a";
  ctx.fillRect(0, 0, vp.width, vp.height);
  ctx.lineJoin = "round";
  ctx.lineCap = "round";

  ctx.globalAlpha = scene.dim ? 0.35 : 1.0;

  for (const trail of scene.trails) {
    for (let start = 0; start < trail.length - 1; start += TRAIL_STRIDE) {
      const end = Math.min(start + TRAIL_STRIDE, trail.length - 1);
      ctx.strokeStyle = "#3b82f6";
      ctx.globalAlpha = (scene.dim ? 0.35 : 1.0) * 0.05 * ((end / trail.length) * 6 + 1);
      ctx.lineWidth = 1;
      ctx.beginPath();
      ctx.moveTo(trail[start][0], trail[start][1]);
      for (let i = start + 1; i <= end; i++) ctx.lineTo(trail[i][0], trail[i][1]);
      ctx.stroke();
    }
  }
  ctx.globalAlpha = scene.dim ? 0.35 : 1.0;

  ctx.strokeStyle = "#f87171";
  ctx.lineWidth = 3;
  ctx.beginPath();
  ctx.moveTo(scene.tongue[0][0], scene.tongue[0][1]);
  for (let i = 1; i < scene.tongue.length; i++) ctx.lineTo(scene.tongue[i][0], scene.tongue[i][1]);
  ctx.stroke();

  ctx.strokeStyle = "#a3a3a3";
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.moveTo(scene.jaw[0][0], scene.jaw[0][1]);
  ctx.lineTo(scene.jaw[1][0], scene.jaw[1][1]);
  ctx.stroke();

  ctx.strokeStyle = "#fbbf24";
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.moveTo(scene.lips[0][0], scene.lips[0][1]);
  ctx.lineTo(scene.lips[1][0], scene.lips[1][1]);
  ctx.stroke();

  ctx.font = "12px system-ui, sans-serif";
  for (let i = 0; i < scene.points.length; i++) {
    const [x, y] = scene.points[i];
    ctx.fillStyle = i < 3 ? "#f87171" : "#fbbf24";
    ctx.beginPath();
    ctx.arc(x, y, 5, 0, 2 * Math.PI);
    ctx.fill();
    ctx.fillStyle = "#9ca3af";
    ctx.fillText(CHANNEL_NAMES[i], x + 8, y - 8);
  }

  ctx.globalAlpha = 1.0;
}
