import { defineConfig } from 'vitest/config';

// The dev server proxies /api to a locally running session service, so the
// page itself never needs CORS headers.
export default defineConfig({
  server: {
    proxy: {
      '/api': {
        target: 'http://127.0.0.1:8000',
        changeOrigin: true,
        rewrite: (path) => path.replace(/^\/api/, ''),
      },
    },
  },
  test: {
    environment: 'node',
    include: ['tests/**/*.test.ts'],
    globalSetup: ['tests/e2e/setup.ts'],
    testTimeout: 30000,
    hookTimeout: 60000,
  },
});
