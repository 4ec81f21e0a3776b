/**
 * TA console: review the pending escalation queue and resolve items.
 *
 * Resolving needs a non-empty final answer and a corrected intent that
 * actually exists in the workspace (the list comes from /api/health), so the
 * resolve action stays disabled until both drafts validate.
 */

import { ApiError, EscalationView, PvtaApi } from "./api.js";

export interface TAConsoleState {
  token: string;
  pending: EscalationView[];
  intents: string[];
  selectedId: string | null;
  draftAnswer: string;
  draftIntent: string;
  /** Inline validation message for the intent field, if any. */
  intentError: string | null;
  toast: string | null;
  error: string | null;
  modelRevision: number | null;
}

export class TAConsoleController {
  readonly state: TAConsoleState;
  private listeners: Array<() => void> = [];

  constructor(
    private readonly api: PvtaApi,
    token: string,
  ) {
    this.state = {
      token,
      pending: [],
      intents: [],
      selectedId: null,
      draftAnswer: "",
      draftIntent: "",
      intentError: null,
      toast: null,
      error: null,
      modelRevision: null,
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

  /** Reload the queue and the intent list; run on open and after conflicts. */
  async refresh(): Promise<void> {
    try {
      const [pending, health] = await Promise.all([
        this.api.escalations("pending", this.state.token),
        this.api.health(),
      ]);
      this.state.pending = pending;
      this.state.intents = health.intents;
      this.state.modelRevision = health.revision;
      this.state.error = null;
      if (
        this.state.selectedId !== null &&
        !pending.some((item) => item.id === this.state.selectedId)
      ) {
        this.state.selectedId = null;
      }
    } catch (error) {
      this.state.error = describe(error);
    }
    this.notify();
  }

  select(id: string): void {
    const item = this.state.pending.find((candidate) => candidate.id === id);
    if (item === undefined) {
      return;
    }
    this.state.selectedId = id;
    // Prefill from the machine's own attempt; the TA corrects from there.
    this.state.draftAnswer = item.proposed_answer;
    this.state.draftIntent = item.proposed_intent;
    this.state.intentError = null;
    this.notify();
  }

  setDraftAnswer(text: string): void {
    this.state.draftAnswer = text;
    this.notify();
  }

  setDraftIntent(intent: string): void {
    this.state.draftIntent = intent;
    this.state.intentError = null;
    this.notify();
  }

  get selected(): EscalationView | null {
    return (
      this.state.pending.find((item) => item.id === this.state.selectedId) ?? null
    );
  }

  /** The resolve button stays disabled until this says yes. */
  canResolve(): boolean {
    return (
      this.state.selectedId !== null &&
      this.state.draftAnswer.trim().length > 0 &&
      this.state.intents.includes(this.state.draftIntent)
    );
  }

  async resolveSelected(): Promise<void> {
    const id = this.state.selectedId;
    if (id === null || !this.canResolve()) {
      return;
    }
    try {
      const resolved = await this.api.resolve(
        id,
        this.state.draftAnswer,
        this.state.draftIntent,
        this.state.token,
      );
      this.state.pending = this.state.pending.filter((item) => item.id !== id);
      this.state.selectedId = null;
      this.state.draftAnswer = "";
      this.state.draftIntent = "";
      this.state.toast =
        `resolved ${resolved.id}: example added to intent ` +
        `${resolved.resolution?.corrected_intent ?? "?"}`;
      this.state.error = null;
    } catch (error) {
      if (error instanceof ApiError && error.code === "already_resolved") {
        // Someone else got there first; drop our stale view of the queue.
        this.state.toast = `${id} was already resolved; queue refreshed`;
        await this.refresh();
        return;
      }
      if (error instanceof ApiError && error.code === "unknown_intent") {
        this.state.intentError = `unknown intent: ${this.state.draftIntent}`;
      } else {
        this.state.error = describe(error);
      }
    }
    this.notify();
  }

  async retrain(): Promise<void> {
    try {
      const report = await this.api.retrain(this.state.token);
      this.state.modelRevision = report.revision;
      this.state.toast =
        `retrained: revision ${report.revision}, ` +
        `${report.example_count} examples over ${report.intent_count} intents`;
      this.state.error = null;
    } catch (error) {
      this.state.error = describe(error);
    }
    this.notify();
  }
}

function describe(error: unknown): string {
  if (error instanceof ApiError) {
    return error.code;
  }
  return "network_error";
}
