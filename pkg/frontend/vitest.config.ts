import { defineConfig } from 'vitest/config';

// The end-to-end test needs a running Python service, so it only joins the
// run when E2E=1 is set (package script test:e2e / test:all).
export default defineConfig({
  test: {
    include: ['tests/**/*.test.ts'],
    exclude: process.env.E2E ? [] : ['tests/e2e.test.ts'],
    testTimeout: 30_000,
    hookTimeout: 60_000,
  },
});
