/** Lease countdown: remaining time, low-time warning, expiry. */

// warn once no more than this fraction of the lease TTL remains
export const WARN_FRACTION = 0.2;

export interface CountdownState {
  remainingMs: number;
  /** remaining / full TTL, clamped to [0, 1] */
  fraction: number;
  warn: boolean;
  expired: boolean;
}

/** @param issuedAt epoch seconds  @param expiresAt epoch seconds */
export function countdownState(
  issuedAt: number,
  expiresAt: number,
  nowMs: number,
): CountdownState {
  const ttlMs = Math.max((expiresAt - issuedAt) * 1000, 1);
  const remainingMs = Math.max(expiresAt * 1000 - nowMs, 0);
  const fraction = Math.min(remainingMs / ttlMs, 1);
  return {
    remainingMs,
    fraction,
    warn: fraction <= WARN_FRACTION,
    expired: remainingMs <= 0,
  };
}

/** "m:ss", rounded down to whole seconds. */
export function formatRemaining(remainingMs: number): string {
  const total = Math.floor(remainingMs / 1000);
  const minutes = Math.floor(total / 60);
  const seconds = total % 60;
  return `${minutes}:${String(seconds).padStart(2, "0")}`;
}

export type Ticker = (state: CountdownState) => void;

/** Calls `onTick` immediately and then once a second until stopped or expired. */
export class Countdown {
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(
    private issuedAt: number,
    private expiresAt: number,
    private now: () => number = Date.now,
  ) {}

  start(onTick: Ticker, intervalMs = 1000): void {
    const tick = () => {
      const state = countdownState(this.issuedAt, this.expiresAt, this.now());
      onTick(state);
      if (state.expired) this.stop();
    };
    tick();
    if (this.timer === null) {
      this.timer = setInterval(tick, intervalMs);
    }
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }
}
