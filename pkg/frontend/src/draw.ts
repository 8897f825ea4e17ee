// Canvas interpreter for the scene display list.

import type { Primitive } from "./scene";

const BACKGROUND = "#14161a";

export function drawScene(
  ctx: CanvasRenderingContext2D,
  width: number,
  height: number,
  prims: Primitive[],
): void {
  ctx.globalAlpha = 1;
  ctx.fillStyle = BACKGROUND;
  ctx.fillRect(0, 0, width, height);

  for (const p of prims) {
    switch (p.kind) {
      case "disc":
        ctx.beginPath();
        ctx.arc(p.x, p.y, p.r, 0, 2 * Math.PI);
        ctx.fillStyle = p.fill;
        ctx.fill();
        break;
      case "ring":
        ctx.beginPath();
        ctx.arc(p.x, p.y, p.r, 0, 2 * Math.PI);
        ctx.strokeStyle = p.stroke;
        ctx.lineWidth = p.width;
        ctx.globalAlpha = p.alpha;
        ctx.stroke();
        ctx.globalAlpha = 1;
        break;
      case "ellipse":
        ctx.beginPath();
        ctx.ellipse(p.x, p.y, p.rx, p.ry, 0, 0, 2 * Math.PI);
        ctx.fillStyle = p.fill;
        ctx.fill();
        break;
      case "curve":
        ctx.beginPath();
        ctx.moveTo(p.x1, p.y1);
        ctx.quadraticCurveTo(p.cx, p.cy, p.x2, p.y2);
        ctx.strokeStyle = p.stroke;
        ctx.lineWidth = p.width;
        ctx.lineCap = "round";
        ctx.stroke();
        break;
      case "label":
        ctx.fillStyle = p.fill;
        ctx.font = `${p.sizePx}px system-ui, sans-serif`;
        ctx.textAlign = "center";
        ctx.textBaseline = "middle";
        ctx.fillText(p.text, p.x, p.y);
        break;
    }
  }
}
