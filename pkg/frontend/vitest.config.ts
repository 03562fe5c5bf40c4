import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["test/**/*.test.ts"],
    // DOM tests opt into jsdom per file via @vitest-environment
    environment: "node",
    testTimeout: 30_000,
    hookTimeout: 60_000,
  },
});
