/**
 * Student chat view: one session, its turn thread, and the poll loop that
 * picks up TA answers for escalated turns.
 *
 * The view holds no authoritative state. Every render comes from GET /turns,
 * so a page reload (or a second tab) reconstructs the exact same thread.
 */

import { ApiError, PvtaApi, TurnView } from "./api.js";

export const POLL_INTERVAL_MS = 2000;

export interface ChatTurn {
  turn: TurnView;
  /** True while an escalated turn has no TA answer in the thread yet. */
  awaitingTa: boolean;
}

export interface ChatViewState {
  sessionId: string | null;
  studentId: string;
  turns: ChatTurn[];
  /** Last send that failed; kept so the user can retry, never dropped. */
  failedText: string | null;
  error: string | null;
  busy: boolean;
}

/** Pending flag per turn: escalated, unanswered, and no TA turn references it. */
export function markAwaiting(turns: TurnView[]): ChatTurn[] {
  const answered = new Set(
    turns
      .filter((t) => t.author === "ta" && t.escalation_id !== null)
      .map((t) => t.escalation_id as string),
  );
  return turns.map((turn) => ({
    turn,
    awaitingTa:
      turn.author === "assistant" &&
      turn.pending &&
      (turn.escalation_id === null || !answered.has(turn.escalation_id)),
  }));
}

export class ChatController {
  readonly state: ChatViewState;
  private timer: ReturnType<typeof setInterval> | null = null;
  private listeners: Array<() => void> = [];

  constructor(
    private readonly api: PvtaApi,
    studentId: string,
  ) {
    this.state = {
      sessionId: null,
      studentId,
      turns: [],
      failedText: null,
      error: null,
      busy: false,
    };
  }

  onChange(listener: () => void): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) {
      listener();
    }
  }

  /** Create the session server-side; also used to adopt an existing one. */
  async start(existingSessionId?: string): Promise<void> {
    if (existingSessionId !== undefined) {
      this.state.sessionId = existingSessionId;
    } else {
      const created = await this.api.createSession(this.state.studentId);
      this.state.sessionId = created.session_id;
    }
    await this.refresh();
  }

  async send(text: string): Promise<void> {
    if (this.state.sessionId === null) {
      throw new Error("session not started");
    }
    this.state.busy = true;
    this.notify();
    try {
      await this.api.sendMessage(this.state.sessionId, text);
      this.state.failedText = null;
      this.state.error = null;
      await this.refresh();
    } catch (error) {
      // Keep the text around for the retry affordance; no silent drops.
      this.state.failedText = text;
      this.state.error = describe(error);
      this.notify();
    } finally {
      this.state.busy = false;
      this.notify();
    }
  }

  /** Re-send the message that previously failed. */
  async retry(): Promise<void> {
    if (this.state.failedText !== null) {
      await this.send(this.state.failedText);
    }
  }

  /** Pull the authoritative thread from the server. */
  async refresh(): Promise<void> {
    if (this.state.sessionId === null) {
      return;
    }
    try {
      const turns = await this.api.getTurns(this.state.sessionId);
      this.state.turns = markAwaiting(turns);
      this.state.error = null;
    } catch (error) {
      this.state.error = describe(error);
    }
    this.notify();
  }

  hasAwaitingTurns(): boolean {
    return this.state.turns.some((t) => t.awaitingTa);
  }

  /** Poll while any turn awaits a TA; each tick re-reads the thread. */
  startPolling(intervalMs: number = POLL_INTERVAL_MS): void {
    if (this.timer !== null) {
      return;
    }
    this.timer = setInterval(() => {
      if (this.hasAwaitingTurns()) {
        void this.refresh();
      }
    }, intervalMs);
  }

  stopPolling(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }
}

function describe(error: unknown): string {
  if (error instanceof ApiError) {
    return error.code;
  }
  return "network_error";
}
