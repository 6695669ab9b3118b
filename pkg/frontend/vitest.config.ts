import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "node",
    include: ["test/**/*.test.ts"],
    // the mirror suite spawns a real result service per file
    testTimeout: 30_000,
    hookTimeout: 30_000,
  },
});
