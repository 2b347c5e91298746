/** Browser entry point: socket to ViewerState to canvas.
 *
 * Everything that can fail lands in the banner or a HUD counter; nothing
 * throws out of the render loop. The loop redraws the last pose while the
 * stream idles so resize and reconnect never blank the picture.
 */

import { StreamClient } from "./connection.js";
import { hudLines } from "./hud.js";
import { computeScene, drawScene, fitTransform } from "./render.js";
import { ViewerState } from "./state.js";

const params = new URLSearchParams(window.location.search);
const wsUrl = params.get("ws") ?? `ws://${window.location.host}/stream`;

const canvas = document.getElementById("stage") as HTMLCanvasElement;
const hud = document.getElementById("hud") as HTMLPreElement;
const banner = document.getElementById("banner") as HTMLDivElement;

const state = new ViewerState();
const client = new StreamClient(wsUrl, state, (url) => new WebSocket(url), {
  onBanner: (text) => {
    banner.textContent = text ?? "";
    banner.style.display = text === null ? "none" : "block";
  },
});

function resize(): void {
  const dpr = window.devicePixelRatio || 1;
  canvas.width = Math.max(1, Math.floor(canvas.clientWidth * dpr));
  canvas.height = Math.max(1, Math.floor(canvas.clientHeight * dpr));
}
window.addEventListener("resize", resize);
resize();

const ctx = canvas.getContext("2d");

function tick(): void {
  const frame = state.take() ?? state.displayed;
  if (frame !== null && ctx !== null) {
    const t0 = performance.now();
    const vp = { width: canvas.width, height: canvas.height };
    const scene = computeScene(frame, state.allTrails(), fitTransform(vp));
    drawScene(ctx, scene, vp);
    state.noteDraw(performance.now() - t0, performance.now());
  }
  hud.textContent = hudLines({
    status: state.status,
    frame: state.displayed,
    fps: state.fps(),
    animateMs: state.animateMs,
    parseErrors: state.parseErrors,
    staleDrops: state.staleDrops,
  }).join("\n");
  window.requestAnimationFrame(tick);
}
window.requestAnimationFrame(tick);

setInterval(() => {
  if (state.animateMs !== null) client.send({ animate_ms: state.animateMs });
}, 1000);

client.start();
