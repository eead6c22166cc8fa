// Typed client for the session service. Every pixel shown in the UI comes
// through these calls; there is no client-side generation.

import type { InstructionPatch, SessionView } from './schema';

export type Variant = 'raw' | 'aligned';

export interface GenerateResponse {
  id: string;
  frame_count: number;
  seed: number;
  lambda: number;
  timings: Record<string, number>;
  digests: Record<string, string>;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
    public path: string | null = null,
  ) {
    super(message);
  }
}

async function raise(resp: Response): Promise<never> {
  let detail: Record<string, unknown> = {};
  try {
    detail = (await resp.json()).detail ?? {};
  } catch {
    // non-JSON body, fall through to the generic error
  }
  throw new ApiError(
    resp.status,
    String(detail.error ?? 'http_error'),
    String(detail.message ?? resp.statusText),
    (detail.path as string | null) ?? null,
  );
}

export class SessionClient {
  constructor(private baseUrl: string = '') {}

  private async json<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await fetch(this.baseUrl + path, {
      headers: { 'content-type': 'application/json' },
      ...init,
    });
    if (!resp.ok) await raise(resp);
    return (await resp.json()) as T;
  }

  health(): Promise<{ status: string }> {
    return this.json('/health');
  }

  createSession(config?: Record<string, unknown>, seed?: number): Promise<SessionView> {
    return this.json('/sessions', {
      method: 'POST',
      body: JSON.stringify({ config: config ?? null, seed: seed ?? null }),
    });
  }

  getSession(id: string): Promise<SessionView> {
    return this.json(`/sessions/${id}`);
  }

  putInstructions(
    id: string,
    patch: InstructionPatch,
    expectedRevision: number,
  ): Promise<{ id: string; revision: number }> {
    return this.json(`/sessions/${id}/instructions`, {
      method: 'PUT',
      body: JSON.stringify({ instructions: patch, expected_revision: expectedRevision }),
    });
  }

  generate(id: string, seed?: number): Promise<GenerateResponse> {
    return this.json(`/sessions/${id}/generate`, {
      method: 'POST',
      body: JSON.stringify({ seed: seed ?? null }),
    });
  }

  // The player asks for one frame at a time; a single-frame range comes back
  // as a bare PNG.
  frameUrl(id: string, variant: Variant, index: number): string {
    return `${this.baseUrl}/sessions/${id}/frames?variant=${variant}&from=${index}&to=${index + 1}`;
  }

  async fetchFrame(id: string, variant: Variant, index: number): Promise<ArrayBuffer> {
    const resp = await fetch(this.frameUrl(id, variant, index));
    if (!resp.ok) await raise(resp);
    return resp.arrayBuffer();
  }

  saveSession(id: string, path: string): Promise<{ id: string; path: string }> {
    return this.json(`/sessions/${id}/save`, {
      method: 'POST',
      body: JSON.stringify({ path }),
    });
  }

  loadSession(path: string): Promise<SessionView> {
    return this.json('/sessions/load', {
      method: 'POST',
      body: JSON.stringify({ path }),
    });
  }
}
