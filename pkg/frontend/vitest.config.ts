import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    // The protocol test boots the real annotation service in a child
    // process, so give it room beyond the default 5s.
    testTimeout: 30_000,
    hookTimeout: 30_000,
  },
});
