import { afterEach, describe, expect, it, vi } from "vitest";

import {
  Countdown,
  WARN_FRACTION,
  countdownState,
  formatRemaining,
} from "../src/countdown.js";

const ISSUED = 1_000_000; // epoch seconds
const TTL = 900;

describe("countdownState", () => {
  it("starts at the full ttl with no warning", () => {
    const state = countdownState(ISSUED, ISSUED + TTL, ISSUED * 1000);
    expect(state.remainingMs).toBe(TTL * 1000);
    expect(state.fraction).toBe(1);
    expect(state.warn).toBe(false);
    expect(state.expired).toBe(false);
  });

  it("warns exactly at the 20% boundary", () => {
    const warnAt = (ISSUED + TTL * (1 - WARN_FRACTION)) * 1000;
    expect(countdownState(ISSUED, ISSUED + TTL, warnAt - 1000).warn).toBe(false);
    expect(countdownState(ISSUED, ISSUED + TTL, warnAt).warn).toBe(true);
  });

  it("clamps past expiry to zero and reports expired", () => {
    const state = countdownState(ISSUED, ISSUED + TTL, (ISSUED + TTL + 5) * 1000);
    expect(state.remainingMs).toBe(0);
    expect(state.fraction).toBe(0);
    expect(state.warn).toBe(true);
    expect(state.expired).toBe(true);
  });

  it("survives a degenerate zero-length ttl", () => {
    const state = countdownState(ISSUED, ISSUED, ISSUED * 1000);
    expect(state.expired).toBe(true);
    expect(state.fraction).toBe(0);
  });
});

describe("formatRemaining", () => {
  it("renders m:ss", () => {
    expect(formatRemaining(0)).toBe("0:00");
    expect(formatRemaining(65_000)).toBe("1:05");
    expect(formatRemaining(899_999)).toBe("14:59");
  });
});

describe("Countdown", () => {
  afterEach(() => {
    vi.useRealTimers();
  });

  it("ticks immediately, then once per interval, and stops at expiry", () => {
    vi.useFakeTimers();
    vi.setSystemTime(ISSUED * 1000);
    const seen: number[] = [];
    const countdown = new Countdown(ISSUED, ISSUED + 3, Date.now);
    countdown.start((state) => seen.push(state.remainingMs), 1000);
    expect(seen).toEqual([3000]);
    vi.advanceTimersByTime(1000);
    expect(seen).toEqual([3000, 2000]);
    vi.advanceTimersByTime(2000);
    expect(seen).toEqual([3000, 2000, 1000, 0]);
    vi.advanceTimersByTime(5000); // expired: no further ticks
    expect(seen).toEqual([3000, 2000, 1000, 0]);
  });

  it("stop is idempotent and halts ticking", () => {
    vi.useFakeTimers();
    vi.setSystemTime(ISSUED * 1000);
    let ticks = 0;
    const countdown = new Countdown(ISSUED, ISSUED + TTL, Date.now);
    countdown.start(() => {
      ticks += 1;
    });
    countdown.stop();
    countdown.stop();
    vi.advanceTimersByTime(10_000);
    expect(ticks).toBe(1);
  });
});
