// Client plumbing: URL construction and the error envelope parser, exercised
// against a stubbed fetch.

import { afterEach, describe, expect, it, vi } from 'vitest';

import { ApiError, SessionClient } from '../src/api';

afterEach(() => {
  vi.unstubAllGlobals();
});

describe('frame URLs', () => {
  it('requests a half-open single-frame range', () => {
    const client = new SessionClient('/api');
    expect(client.frameUrl('s1', 'aligned', 3)).toBe(
      '/api/sessions/s1/frames?variant=aligned&from=3&to=4',
    );
    expect(client.frameUrl('s1', 'raw', 0)).toBe(
      '/api/sessions/s1/frames?variant=raw&from=0&to=1',
    );
  });
});

describe('error envelope', () => {
  it('surfaces error code, message, and path from the detail body', async () => {
    vi.stubGlobal(
      'fetch',
      vi.fn(async () =>
        new Response(
          JSON.stringify({
            detail: {
              error: 'validation',
              message: 'unknown instruction field',
              path: 'instructions.imagee',
            },
          }),
          { status: 422 },
        ),
      ),
    );
    const client = new SessionClient();
    const err = await client.getSession('s1').catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    const apiErr = err as ApiError;
    expect(apiErr.status).toBe(422);
    expect(apiErr.code).toBe('validation');
    expect(apiErr.message).toBe('unknown instruction field');
    expect(apiErr.path).toBe('instructions.imagee');
  });

  it('falls back to the status text on a non-JSON body', async () => {
    vi.stubGlobal(
      'fetch',
      vi.fn(async () =>
        new Response('<html>gateway</html>', { status: 502, statusText: 'Bad Gateway' }),
      ),
    );
    const client = new SessionClient();
    const err = await client.health().catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    const apiErr = err as ApiError;
    expect(apiErr.status).toBe(502);
    expect(apiErr.code).toBe('http_error');
    expect(apiErr.path).toBeNull();
  });

  it('sends the expected revision alongside instruction patches', async () => {
    const calls: Array<{ url: string; body: string }> = [];
    vi.stubGlobal(
      'fetch',
      vi.fn(async (url: string, init?: RequestInit) => {
        calls.push({ url, body: String(init?.body) });
        return new Response(JSON.stringify({ id: 's1', revision: 8 }), { status: 200 });
      }),
    );
    const client = new SessionClient();
    const resp = await client.putInstructions('s1', { lambda: 0.25 }, 7);
    expect(resp.revision).toBe(8);
    expect(calls[0].url).toBe('/sessions/s1/instructions');
    expect(JSON.parse(calls[0].body)).toEqual({
      instructions: { lambda: 0.25 },
      expected_revision: 7,
    });
  });
});
