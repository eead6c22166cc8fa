// Frame playback over fetched PNGs. Storage is plain ArrayBuffers so the
// logic runs identically in tests and in the browser; the DOM layer turns
// the current buffer into an object URL.

import type { Variant } from './api';

export type FrameFetcher = (variant: Variant, index: number) => Promise<ArrayBuffer>;

export class FramePlayer {
  frames: ArrayBuffer[] = [];
  index = 0;
  variant: Variant = 'aligned';
  playing = false;
  onFrame: (index: number) => void = () => {};

  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(private fetcher: FrameFetcher) {}

  get frameCount(): number {
    return this.frames.length;
  }

  async load(count: number): Promise<void> {
    this.stop();
    const fetched: ArrayBuffer[] = [];
    for (let i = 0; i < count; i++) {
      fetched.push(await this.fetcher(this.variant, i));
    }
    this.frames = fetched;
    this.index = 0;
    this.onFrame(0);
  }

  async setVariant(variant: Variant): Promise<void> {
    if (variant === this.variant) return;
    const count = this.frames.length;
    const keepIndex = this.index;
    this.variant = variant;
    if (count > 0) {
      await this.load(count);
      this.seek(keepIndex);
    }
  }

  seek(index: number): void {
    if (this.frames.length === 0) return;
    this.index = ((index % this.frames.length) + this.frames.length) % this.frames.length;
    this.onFrame(this.index);
  }

  step(delta = 1): void {
    this.seek(this.index + delta);
  }

  current(): ArrayBuffer | null {
    return this.frames[this.index] ?? null;
  }

  play(frameRate = 8): void {
    if (this.playing || this.frames.length === 0) return;
    this.playing = true;
    this.timer = setInterval(() => this.step(), 1000 / frameRate);
  }

  stop(): void {
    this.playing = false;
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }
}
