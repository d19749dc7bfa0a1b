import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    environment: "node",
    // The end-to-end suite boots the Python service in a child process,
    // which needs time for the first import on a cold cache.
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
