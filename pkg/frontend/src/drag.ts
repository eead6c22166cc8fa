// Drag gestures and mask authoring. The mask is brushed client-side at the
// session resolution as a flat 0/1 raster; a press-to-release drag over it
// becomes the trajectory payload. Bad gestures are rejected here, before any
// network call, with the same rule the server applies.

import { clipPoint, encodeMask, type TrajectorySection } from './schema';

export function emptyMask(height: number, width: number): Uint8Array {
  return new Uint8Array(height * width);
}

// Opaque disc brush over pixel centers, matching the engine's region tools.
export function paintMaskDisc(
  mask: Uint8Array,
  height: number,
  width: number,
  cx: number,
  cy: number,
  radius: number,
  value: 0 | 1 = 1,
): void {
  const r2 = radius * radius;
  const x0 = Math.max(0, Math.floor(cx - radius));
  const x1 = Math.min(width - 1, Math.ceil(cx + radius));
  const y0 = Math.max(0, Math.floor(cy - radius));
  const y1 = Math.min(height - 1, Math.ceil(cy + radius));
  for (let y = y0; y <= y1; y++) {
    for (let x = x0; x <= x1; x++) {
      const dx = x - cx;
      const dy = y - cy;
      if (dx * dx + dy * dy <= r2) mask[y * width + x] = value;
    }
  }
}

export function maskIsEmpty(mask: Uint8Array): boolean {
  return !mask.some((v) => v !== 0);
}

export function pointOnMask(
  mask: Uint8Array,
  height: number,
  width: number,
  x: number,
  y: number,
): boolean {
  const px = Math.round(x);
  const py = Math.round(y);
  if (px < 0 || px >= width || py < 0 || py >= height) return false;
  return mask[py * width + px] !== 0;
}

export function dragPayload(
  press: [number, number],
  release: [number, number],
  mask: Uint8Array,
  height: number,
  width: number,
): TrajectorySection {
  if (maskIsEmpty(mask)) {
    throw new Error('brush a region mask before dragging');
  }
  const [hx, hy] = clipPoint(press[0], press[1], width, height);
  if (!pointOnMask(mask, height, width, hx, hy)) {
    throw new Error('drag must start inside the masked region');
  }
  const [tx, ty] = clipPoint(release[0], release[1], width, height);
  return {
    handles: [[hx, hy]],
    targets: [[tx, ty]],
    mask: encodeMask(mask, height, width),
  };
}
