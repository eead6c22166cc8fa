// Paint gestures: a pointer path plus brush settings becomes one stroke
// payload. Points are clipped into the canvas before they ever reach the
// network; the stroke is pending until the user commits.

import { clipPoint, type StrokePayload } from './schema';

export interface BrushSettings {
  radius: number;
  color: number[];
}

export function strokeFromPath(
  path: number[][],
  brush: BrushSettings,
  width: number,
  height: number,
): StrokePayload {
  if (path.length === 0) throw new Error('a stroke needs at least one point');
  if (brush.radius <= 0) throw new Error('brush radius must be positive');
  const polyline: number[][] = [];
  for (const [x, y] of path) {
    const [cx, cy] = clipPoint(x, y, width, height);
    const last = polyline[polyline.length - 1];
    // clipping can fold a run of off-canvas points onto one edge pixel
    if (last && last[0] === cx && last[1] === cy) continue;
    polyline.push([cx, cy]);
  }
  return { polyline, radius: brush.radius, color: [...brush.color] };
}
