// DOM assembly for the studio. All state lives in StudioState; this file
// only wires pointer events and controls into the pure modules and paints
// what the server sends back.

import { SessionClient, type Variant } from './api';
import { dragPayload, emptyMask, paintMaskDisc } from './drag';
import { strokeFromPath, type BrushSettings } from './paint';
import { FramePlayer } from './player';
import { CONTENT_LABELS, MOTION_LABELS, decodeArray } from './schema';
import { StudioState } from './state';

type Mode = 'paint' | 'mask' | 'drag';

const client = new SessionClient('/api');
const state = new StudioState();
let mode: Mode = 'paint';
let mask: Uint8Array = new Uint8Array(0);
let pointerPath: number[][] = [];
let dragStart: [number, number] | null = null;

// --- layout

const root = document.createElement('div');
root.className = 'studio';
document.body.append(root);

const title = document.createElement('h1');
title.textContent = 'videoloom studio';
root.append(title);

const columns = document.createElement('div');
columns.className = 'columns';
root.append(columns);

const editPane = document.createElement('div');
editPane.className = 'pane';
columns.append(editPane);

const playPane = document.createElement('div');
playPane.className = 'pane';
columns.append(playPane);

const status = document.createElement('div');
status.className = 'status';
root.append(status);

function note(text: string) {
  status.textContent = text;
}

// --- edit canvas

const canvas = document.createElement('canvas');
canvas.className = 'editor';
editPane.append(canvas);
const overlay = document.createElement('canvas');
overlay.className = 'editor overlay';
editPane.append(overlay);
const wrap = document.createElement('div');
wrap.className = 'canvas-wrap';
editPane.insertBefore(wrap, canvas);
wrap.append(canvas, overlay);

const ctx = canvas.getContext('2d')!;
const octx = overlay.getContext('2d')!;

function drawImage() {
  if (!state.imagePixels || !state.config) return;
  const { height, width, channels } = state.config;
  canvas.width = width;
  canvas.height = height;
  overlay.width = width;
  overlay.height = height;
  const { values } = decodeArray(state.imagePixels);
  const img = ctx.createImageData(width, height);
  const plane = height * width;
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      const p = y * width + x;
      for (let c = 0; c < 3; c++) {
        const source = channels === 1 ? 0 : Math.min(c, channels - 1);
        img.data[4 * p + c] = Math.round(255 * values[source * plane + p]);
      }
      img.data[4 * p + 3] = 255;
    }
  }
  ctx.putImageData(img, 0, 0);
}

function drawOverlay() {
  if (!state.config) return;
  const { height, width } = state.config;
  octx.clearRect(0, 0, width, height);
  // committed-but-local strokes, then the live path
  octx.fillStyle = 'rgba(255, 80, 80, 0.6)';
  for (const stroke of state.pendingStrokes) {
    for (const [x, y] of stroke.polyline) {
      octx.beginPath();
      octx.arc(x, y, stroke.radius, 0, 2 * Math.PI);
      octx.fill();
    }
  }
  if (mode === 'mask' || mode === 'drag') {
    octx.fillStyle = 'rgba(80, 160, 255, 0.35)';
    for (let y = 0; y < height; y++) {
      for (let x = 0; x < width; x++) {
        if (mask[y * width + x]) octx.fillRect(x, y, 1, 1);
      }
    }
  }
  if (dragStart && pointerPath.length > 0) {
    const [tx, ty] = pointerPath[pointerPath.length - 1];
    octx.strokeStyle = 'rgba(255, 255, 0, 0.9)';
    octx.beginPath();
    octx.moveTo(dragStart[0], dragStart[1]);
    octx.lineTo(tx, ty);
    octx.stroke();
  }
}

function canvasPoint(e: PointerEvent): [number, number] {
  const rect = overlay.getBoundingClientRect();
  const x = ((e.clientX - rect.left) / rect.width) * overlay.width;
  const y = ((e.clientY - rect.top) / rect.height) * overlay.height;
  return [x, y];
}

overlay.addEventListener('pointerdown', (e) => {
  if (!state.config) return;
  overlay.setPointerCapture(e.pointerId);
  const p = canvasPoint(e);
  pointerPath = [p];
  if (mode === 'drag') dragStart = p;
  if (mode === 'mask') {
    paintMaskDisc(mask, state.config.height, state.config.width, p[0], p[1], maskBrush.valueAsNumber);
  }
  drawOverlay();
});

overlay.addEventListener('pointermove', (e) => {
  if (pointerPath.length === 0 || !state.config) return;
  const p = canvasPoint(e);
  pointerPath.push(p);
  if (mode === 'mask') {
    paintMaskDisc(mask, state.config.height, state.config.width, p[0], p[1], maskBrush.valueAsNumber);
  }
  drawOverlay();
});

overlay.addEventListener('pointerup', () => {
  if (!state.config || pointerPath.length === 0) {
    pointerPath = [];
    dragStart = null;
    return;
  }
  const { height, width } = state.config;
  try {
    if (mode === 'paint') {
      const brush: BrushSettings = {
        radius: brushRadius.valueAsNumber,
        color: hexToColor(brushColor.value, state.config.channels),
      };
      state.addStroke(strokeFromPath(pointerPath, brush, width, height));
      note(`stroke pending (${state.pendingEditCount()} uncommitted edits)`);
    } else if (mode === 'drag' && dragStart) {
      const release = pointerPath[pointerPath.length - 1];
      state.setTrajectory(
        dragPayload(dragStart, [release[0], release[1]], mask, height, width),
      );
      note('drag pending; commit to apply');
    }
  } catch (err) {
    note(err instanceof Error ? err.message : String(err));
  }
  pointerPath = [];
  dragStart = null;
  drawOverlay();
});

function hexToColor(hex: string, channels: number): number[] {
  const rgb = [1, 3, 5].map((i) => parseInt(hex.slice(i, i + 2), 16) / 255);
  return rgb.slice(0, Math.max(1, Math.min(3, channels)));
}

// --- edit controls

const controls = document.createElement('div');
controls.className = 'controls';
editPane.append(controls);

function labeled(text: string, el: HTMLElement): HTMLLabelElement {
  const label = document.createElement('label');
  label.textContent = text;
  label.append(el);
  controls.append(label);
  return label;
}

const modeSelect = document.createElement('select');
for (const m of ['paint', 'mask', 'drag']) {
  const opt = document.createElement('option');
  opt.value = m;
  opt.textContent = m;
  modeSelect.append(opt);
}
modeSelect.addEventListener('change', () => {
  mode = modeSelect.value as Mode;
  drawOverlay();
});
labeled('tool', modeSelect);

const brushRadius = document.createElement('input');
brushRadius.type = 'range';
brushRadius.min = '0.5';
brushRadius.max = '6';
brushRadius.step = '0.5';
brushRadius.value = '1.5';
labeled('brush', brushRadius);

const brushColor = document.createElement('input');
brushColor.type = 'color';
brushColor.value = '#e6e6fa';
labeled('color', brushColor);

const maskBrush = document.createElement('input');
maskBrush.type = 'range';
maskBrush.min = '1';
maskBrush.max = '10';
maskBrush.step = '0.5';
maskBrush.value = '4';
labeled('mask brush', maskBrush);

const contentSelect = document.createElement('select');
for (const label of CONTENT_LABELS) {
  const opt = document.createElement('option');
  opt.value = label;
  opt.textContent = label;
  contentSelect.append(opt);
}
contentSelect.addEventListener('change', () => {
  state.contentLabel = contentSelect.value;
});
labeled('content', contentSelect);

const motionSelect = document.createElement('select');
for (const label of MOTION_LABELS) {
  const opt = document.createElement('option');
  opt.value = label;
  opt.textContent = label;
  motionSelect.append(opt);
}
motionSelect.addEventListener('change', () => {
  state.motionLabel = motionSelect.value;
});
labeled('motion', motionSelect);

const lambdaSlider = document.createElement('input');
lambdaSlider.type = 'range';
lambdaSlider.min = '0';
lambdaSlider.max = '1';
lambdaSlider.step = '0.05';
lambdaSlider.value = '0.5';
lambdaSlider.addEventListener('input', () => {
  state.lambda = lambdaSlider.valueAsNumber;
  lambdaLabel.textContent = lambdaText();
});
const lambdaLabel = labeled('', lambdaSlider);
function lambdaText() {
  return `keep original ↔ follow my edit (${state.lambda.toFixed(2)})`;
}
lambdaLabel.firstChild!.textContent = lambdaText();
lambdaSlider.addEventListener('input', () => {
  lambdaLabel.firstChild!.textContent = lambdaText();
});

const undoBtn = document.createElement('button');
undoBtn.textContent = 'undo stroke';
undoBtn.addEventListener('click', () => {
  state.undoStroke();
  drawOverlay();
});
controls.append(undoBtn);

const clearMaskBtn = document.createElement('button');
clearMaskBtn.textContent = 'clear mask';
clearMaskBtn.addEventListener('click', () => {
  mask.fill(0);
  state.setTrajectory(null);
  drawOverlay();
});
controls.append(clearMaskBtn);

const commitBtn = document.createElement('button');
commitBtn.textContent = 'commit edits';
commitBtn.addEventListener('click', async () => {
  if (!state.sessionId) return;
  const ok = await state.commit(client);
  note(ok ? `committed; revision ${state.serverRevision}` : state.lastError);
  drawOverlay();
});
controls.append(commitBtn);

// --- generation and playback

const genControls = document.createElement('div');
genControls.className = 'controls';
playPane.append(genControls);

const seedInput = document.createElement('input');
seedInput.type = 'number';
seedInput.placeholder = 'seed (optional)';
genControls.append(seedInput);

const generateBtn = document.createElement('button');
generateBtn.textContent = 'generate';
genControls.append(generateBtn);

const frameImg = document.createElement('img');
frameImg.className = 'frame';
frameImg.alt = 'generated frame';
playPane.append(frameImg);

const playerControls = document.createElement('div');
playerControls.className = 'controls';
playPane.append(playerControls);

const playBtn = document.createElement('button');
playBtn.textContent = 'play';
playerControls.append(playBtn);

const scrub = document.createElement('input');
scrub.type = 'range';
scrub.min = '0';
scrub.value = '0';
playerControls.append(scrub);

const variantToggle = document.createElement('button');
variantToggle.textContent = 'showing: aligned';
playerControls.append(variantToggle);

const player = new FramePlayer((variant, index) =>
  client.fetchFrame(state.sessionId, variant, index),
);

let frameObjectUrl = '';
player.onFrame = (index) => {
  const buf = player.current();
  if (!buf) return;
  if (frameObjectUrl) URL.revokeObjectURL(frameObjectUrl);
  frameObjectUrl = URL.createObjectURL(new Blob([buf], { type: 'image/png' }));
  frameImg.src = frameObjectUrl;
  scrub.value = String(index);
};

generateBtn.addEventListener('click', async () => {
  if (!state.sessionId) return;
  generateBtn.disabled = true;
  note('generating…');
  try {
    const seed = seedInput.value === '' ? undefined : Number(seedInput.value);
    const resp = await state.generateOnce(client, seed);
    if (resp === null) return; // a run is already in flight
    scrub.max = String(resp.frame_count - 1);
    await player.load(resp.frame_count);
    note(
      `generated ${resp.frame_count} frames in ` +
        `${(resp.timings.total * 1000).toFixed(0)} ms (seed ${resp.seed})`,
    );
  } catch {
    note(state.lastError || 'generation failed');
  } finally {
    generateBtn.disabled = false;
  }
});

playBtn.addEventListener('click', () => {
  if (player.playing) {
    player.stop();
    playBtn.textContent = 'play';
  } else {
    player.play(8);
    playBtn.textContent = 'pause';
  }
});

scrub.addEventListener('input', () => {
  player.stop();
  playBtn.textContent = 'play';
  player.seek(Number(scrub.value));
});

variantToggle.addEventListener('click', async () => {
  const next: Variant = player.variant === 'aligned' ? 'raw' : 'aligned';
  await player.setVariant(next);
  variantToggle.textContent = `showing: ${next}`;
});

// --- session management

const sessionControls = document.createElement('div');
sessionControls.className = 'controls';
root.insertBefore(sessionControls, columns);

const newBtn = document.createElement('button');
newBtn.textContent = 'new session';
sessionControls.append(newBtn);

const fileInput = document.createElement('input');
fileInput.placeholder = 'session file, e.g. demos/session_one_blob_static.json';
fileInput.size = 44;
sessionControls.append(fileInput);

const loadBtn = document.createElement('button');
loadBtn.textContent = 'load';
sessionControls.append(loadBtn);

const saveBtn = document.createElement('button');
saveBtn.textContent = 'save';
sessionControls.append(saveBtn);

function adoptView(view: Parameters<StudioState['loadView']>[0]) {
  state.loadView(view);
  mask = emptyMask(view.config.height, view.config.width);
  if (view.instructions.trajectory) {
    // show the stored mask so the drag can be adjusted
    const decoded = atob(view.instructions.trajectory.mask.data);
    for (let i = 0; i < decoded.length; i++) mask[i] = decoded.charCodeAt(i);
  }
  contentSelect.value = state.contentLabel;
  motionSelect.value = state.motionLabel;
  lambdaSlider.value = String(state.lambda);
  lambdaLabel.firstChild!.textContent = lambdaText();
  drawImage();
  drawOverlay();
  note(`session ${state.sessionId.slice(0, 8)} at revision ${state.serverRevision}`);
}

newBtn.addEventListener('click', async () => {
  try {
    adoptView(await client.createSession());
  } catch (err) {
    note(err instanceof Error ? err.message : String(err));
  }
});

loadBtn.addEventListener('click', async () => {
  try {
    adoptView(await client.loadSession(fileInput.value));
  } catch (err) {
    note(err instanceof Error ? err.message : String(err));
  }
});

saveBtn.addEventListener('click', async () => {
  if (!state.sessionId) return;
  try {
    const resp = await client.saveSession(state.sessionId, fileInput.value);
    note(`saved to ${resp.path}`);
  } catch (err) {
    note(err instanceof Error ? err.message : String(err));
  }
});

note('create or load a session to begin');
