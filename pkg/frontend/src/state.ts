// Client-side session state. One writer (the UI thread), one in-flight
// generate at a time, and edits tracked against the server's revision
// counter so a stale client fails loudly instead of clobbering anything.

import type { SessionClient, GenerateResponse } from './api';
import { ApiError } from './api';
import type {
  InstructionPatch,
  SessionView,
  StrokePayload,
  TrajectorySection,
} from './schema';

export class StudioState {
  sessionId = '';
  serverRevision = 0;
  config: SessionView['config'] | null = null;
  imagePixels: SessionView['instructions']['image']['pixels'] | null = null;
  committedStrokes: StrokePayload[] = [];
  pendingStrokes: StrokePayload[] = [];
  trajectory: TrajectorySection | null = null;
  trajectoryDirty = false;
  lambda = 0.5;
  contentLabel = 'one_blob';
  motionLabel = 'static';
  busy = false;
  frameCount: number | null = null;
  lastError = '';

  loadView(view: SessionView): void {
    this.sessionId = view.id;
    this.serverRevision = view.revision;
    this.config = view.config;
    this.imagePixels = view.instructions.image.pixels;
    this.committedStrokes = view.instructions.content.strokes;
    this.pendingStrokes = [];
    this.trajectory = view.instructions.trajectory;
    this.trajectoryDirty = false;
    this.lambda = view.instructions.lambda;
    this.contentLabel = view.instructions.content.text;
    this.motionLabel = view.instructions.motion.motion;
    this.frameCount = view.frame_count;
    this.lastError = '';
  }

  pendingEditCount(): number {
    return this.pendingStrokes.length + (this.trajectoryDirty ? 1 : 0);
  }

  addStroke(stroke: StrokePayload): void {
    this.pendingStrokes.push(stroke);
  }

  undoStroke(): StrokePayload | undefined {
    return this.pendingStrokes.pop();
  }

  setTrajectory(trajectory: TrajectorySection | null): void {
    this.trajectory = trajectory;
    this.trajectoryDirty = true;
  }

  // The patch always restates the editable sections in full; the server
  // merges it over whatever it currently holds.
  buildPatch(): InstructionPatch {
    return {
      content: {
        text: this.contentLabel,
        strokes: [...this.committedStrokes, ...this.pendingStrokes],
      },
      motion: { motion: this.motionLabel, magnitude: null },
      trajectory: this.trajectory,
      lambda: this.lambda,
    };
  }

  async commit(client: SessionClient): Promise<boolean> {
    const patch = this.buildPatch();
    try {
      const resp = await client.putInstructions(
        this.sessionId,
        patch,
        this.serverRevision,
      );
      this.serverRevision = resp.revision;
      this.committedStrokes = [...this.committedStrokes, ...this.pendingStrokes];
      this.pendingStrokes = [];
      this.trajectoryDirty = false;
      this.lastError = '';
      return true;
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        // someone else moved the session; resync, keep local edits pending
        const fresh = await client.getSession(this.sessionId);
        const keepStrokes = this.pendingStrokes;
        const keepTrajectory = this.trajectoryDirty ? this.trajectory : undefined;
        this.loadView(fresh);
        this.pendingStrokes = keepStrokes;
        if (keepTrajectory !== undefined) this.setTrajectory(keepTrajectory);
        this.lastError = 'session changed elsewhere; edits reapplied, commit again';
        return false;
      }
      this.lastError = err instanceof Error ? err.message : String(err);
      return false;
    }
  }

  // Returns null when a generate is already in flight: the second click is
  // suppressed locally instead of bouncing off the server's busy response.
  async generateOnce(
    client: SessionClient,
    seed?: number,
  ): Promise<GenerateResponse | null> {
    if (this.busy) return null;
    this.busy = true;
    try {
      const resp = await client.generate(this.sessionId, seed);
      this.frameCount = resp.frame_count;
      this.lastError = '';
      return resp;
    } catch (err) {
      this.lastError = err instanceof Error ? err.message : String(err);
      throw err;
    } finally {
      this.busy = false;
    }
  }
}
