/** Exponential reconnect delays: base * 2^attempt, capped.
 *
 * Defaults give 250, 500, 1000, 2000, 4000, 4000, ... ms. The first four
 * retries all land inside 5 s so a restarted server is picked up fast even
 * when a couple of attempts hit it mid-boot.
 */

export class Backoff {
  private attempt = 0;

  constructor(
    readonly baseMs = 250,
    readonly capMs = 4000,
  ) {}

  nextMs(): number {
    const delay = Math.min(this.capMs, this.baseMs * 2 ** this.attempt);
    this.attempt += 1;
    return delay;
  }

  reset(): void {
    this.attempt = 0;
  }
}
