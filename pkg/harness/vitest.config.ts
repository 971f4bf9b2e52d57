import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    globalSetup: "./test/setup.ts",
    testTimeout: 600_000,
    hookTimeout: 300_000,
    // tfjs keeps wasm/webgl state per process; run files serially
    pool: "forks",
    poolOptions: { forks: { singleFork: true } },
  },
});
