// Session driver: a small state machine around the service client that
// guarantees at-most-one in-flight answer request and exactly-once answer
// submission per round (button lockout on this side, idempotent rounds on
// the server side).

import { ApiError, ServiceClient, SessionConfig, SessionView } from './api';

export type DriverState = {
  view: SessionView | null;
  busy: boolean;
  lastError: string | null;
};

export class SessionDriver {
  private view: SessionView | null = null;
  private inFlight = false;
  private lastError: string | null = null;
  private failedAnswer: 0 | 1 | null = null;
  private listeners: Array<(state: DriverState) => void> = [];
  submissions = 0; // answer POSTs actually sent, for tests and diagnostics

  constructor(private client: ServiceClient) {}

  onChange(listener: (state: DriverState) => void): void {
    this.listeners.push(listener);
  }

  state(): DriverState {
    return { view: this.view, busy: this.inFlight, lastError: this.lastError };
  }

  private emit(): void {
    const snapshot = this.state();
    for (const listener of this.listeners) listener(snapshot);
  }

  async start(config: SessionConfig): Promise<SessionView> {
    this.view = await this.client.createSession(config);
    this.lastError = null;
    this.emit();
    return this.view;
  }

  async resume(sessionId: string): Promise<SessionView> {
    this.view = await this.client.getSession(sessionId);
    this.lastError = null;
    this.emit();
    return this.view;
  }

  async refresh(): Promise<SessionView | null> {
    if (!this.view) return null;
    this.view = await this.client.getSession(this.view.session_id);
    this.emit();
    return this.view;
  }

  /** Submit the pending round's answer. Returns false when nothing was sent
   * (no pending query, or another request is still in flight). */
  async answer(value: 0 | 1): Promise<boolean> {
    if (this.inFlight || !this.view || this.view.state !== 'awaiting_answer' || !this.view.query) {
      return false;
    }
    const { session_id } = this.view;
    const round = this.view.query.round;
    this.inFlight = true;
    this.emit();
    try {
      this.submissions += 1;
      this.view = await this.client.submitAnswer(session_id, round, value);
      this.lastError = null;
      this.failedAnswer = null;
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        // Stale round: someone else advanced the session; fall back to
        // server state instead of resending.
        this.view = await this.client.getSession(session_id);
        this.lastError = null;
        this.failedAnswer = null;
      } else {
        // Transport or server failure: keep the view so the user can retry.
        this.lastError = err instanceof Error ? err.message : String(err);
        this.failedAnswer = value;
      }
    } finally {
      this.inFlight = false;
      this.emit();
    }
    return this.lastError === null;
  }

  /** Resend the answer whose submission failed. Safe even if the original
   * request did reach the server: rounds are idempotent there. */
  async retry(): Promise<boolean> {
    if (this.failedAnswer === null) return false;
    return this.answer(this.failedAnswer);
  }
}
