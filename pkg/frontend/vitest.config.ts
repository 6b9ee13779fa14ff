import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "jsdom",
    include: ["tests/**/*.test.ts"],
    testTimeout: 20_000,
    hookTimeout: 180_000,
    // worker app instances share documents within a file; keep files isolated
    fileParallelism: false,
  },
});
