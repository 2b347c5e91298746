import { expect, test } from "vitest";

import { Backoff } from "../src/backoff.js";

test("delays double from the base and saturate at the cap", () => {
  const b = new Backoff();
  const seen = Array.from({ length: 6 }, () => b.nextMs());
  expect(seen).toEqual([250, 500, 1000, 2000, 4000, 4000]);
});

test("reset starts the ladder over", () => {
  const b = new Backoff();
  b.nextMs();
  b.nextMs();
  b.reset();
  expect(b.nextMs()).toBe(250);
});

test("custom base and cap", () => {
  const b = new Backoff(100, 300);
  expect([b.nextMs(), b.nextMs(), b.nextMs(), b.nextMs()]).toEqual([100, 200, 300, 300]);
});

test("the first four retries fit inside the 5 s reconnect budget", () => {
  const b = new Backoff();
  let elapsed = 0;
  for (let i = 0; i < 4; i++) elapsed += b.nextMs();
  expect(elapsed).toBeLessThan(5000);
});
