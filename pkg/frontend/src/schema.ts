// Wire types for the session service, plus the canonical JSON form used by
// the recorded-fixture tests. Payloads built here must match the server's
// serializer byte for byte once canonicalized.

export interface ArrayPayload {
  shape: number[];
  dtype: 'float64';
  data: string;
}

export interface MaskPayload {
  shape: number[];
  data: string;
}

export interface StrokePayload {
  polyline: number[][];
  radius: number;
  color: number[];
}

export interface ContentSection {
  text: string;
  strokes: StrokePayload[];
}

export interface MotionSection {
  motion: string;
  magnitude: number | null;
}

export interface TrajectorySection {
  handles: number[][];
  targets: number[][];
  mask: MaskPayload;
}

// A partial edit: absent keys keep the server's current value, an explicit
// null under "trajectory" clears the drag.
export interface InstructionPatch {
  image?: { pixels: ArrayPayload };
  content?: ContentSection;
  motion?: MotionSection;
  trajectory?: TrajectorySection | null;
  lambda?: number;
}

export interface SessionView {
  id: string;
  revision: number;
  seed: number;
  busy: boolean;
  config: EngineConfigView;
  instructions: {
    image: { pixels: ArrayPayload };
    content: ContentSection;
    motion: MotionSection;
    trajectory: TrajectorySection | null;
    lambda: number;
  };
  has_result: boolean;
  frame_count: number | null;
  digests: Record<string, string> | null;
}

export interface EngineConfigView {
  height: number;
  width: number;
  channels: number;
  num_frames: number;
  [key: string]: unknown;
}

export const CONTENT_LABELS = ['one_blob', 'two_blobs', 'three_blobs', 'big_blob'];
export const MOTION_LABELS = ['static', 'drift_right', 'drift_down', 'drift_diag'];

// Canonical JSON: keys sorted, no whitespace. JSON.stringify already prints
// integral numbers without a fractional part, matching the server.
export function canonicalJson(value: unknown): string {
  return JSON.stringify(sortKeys(value));
}

function sortKeys(value: unknown): unknown {
  if (Array.isArray(value)) return value.map(sortKeys);
  if (value !== null && typeof value === 'object') {
    const out: Record<string, unknown> = {};
    for (const key of Object.keys(value as object).sort()) {
      out[key] = sortKeys((value as Record<string, unknown>)[key]);
    }
    return out;
  }
  return value;
}

export function bytesToBase64(bytes: Uint8Array): string {
  if (typeof btoa === 'function') {
    let binary = '';
    const chunk = 0x8000;
    for (let i = 0; i < bytes.length; i += chunk) {
      binary += String.fromCharCode(...bytes.subarray(i, i + chunk));
    }
    return btoa(binary);
  }
  return Buffer.from(bytes).toString('base64');
}

export function base64ToBytes(data: string): Uint8Array {
  if (typeof atob === 'function') {
    const binary = atob(data);
    const bytes = new Uint8Array(binary.length);
    for (let i = 0; i < binary.length; i++) bytes[i] = binary.charCodeAt(i);
    return bytes;
  }
  return new Uint8Array(Buffer.from(data, 'base64'));
}

// Arrays travel as little-endian float64; every client platform this runs on
// is little-endian, but go through a DataView so the bytes are right anyway.
export function decodeArray(payload: ArrayPayload): {
  shape: number[];
  values: Float64Array;
} {
  const bytes = base64ToBytes(payload.data);
  const count = bytes.byteLength / 8;
  const view = new DataView(bytes.buffer, bytes.byteOffset, bytes.byteLength);
  const values = new Float64Array(count);
  for (let i = 0; i < count; i++) values[i] = view.getFloat64(i * 8, true);
  return { shape: payload.shape, values };
}

export function encodeMask(mask: Uint8Array, height: number, width: number): MaskPayload {
  if (mask.length !== height * width) {
    throw new Error(`mask has ${mask.length} cells, expected ${height * width}`);
  }
  return { shape: [height, width], data: bytesToBase64(mask) };
}

// Gesture points may leave the canvas; the engine wants paint points and drag
// handles inside the frame, so clamp into pixel-center bounds.
export function clipPoint(x: number, y: number, width: number, height: number): [number, number] {
  const cx = Math.min(Math.max(x, 0), width - 1);
  const cy = Math.min(Math.max(y, 0), height - 1);
  return [cx, cy];
}
