/**
 * Typed client for the assistant's HTTP API.
 *
 * Every shape here mirrors the server's JSON exactly; the UI renders these
 * payloads verbatim and performs no language processing of its own.
 */

export interface EntityMentionView {
  entity: string;
  value: string;
  surface: string;
  span: [number, number];
}

export interface TurnView {
  author: "assistant" | "ta";
  raw_question: string;
  preprocessed_question: string;
  intent: string | null;
  confidence: number;
  mentions: EntityMentionView[];
  matched_node_id: string | null;
  answer: string | null;
  pending: boolean;
  escalated: boolean;
  escalation_id: string | null;
  timestamp: number;
}

export interface MessageReply {
  answer: string | null;
  pending: boolean;
  intent: string | null;
  confidence: number;
  escalated: boolean;
}

export interface ResolutionView {
  final_answer: string;
  corrected_intent: string;
  resolved_at: number;
}

export interface EscalationView {
  id: string;
  session_id: string;
  student_id: string;
  question: string;
  proposed_answer: string;
  proposed_intent: string;
  confidence: number;
  status: "pending" | "resolved";
  created_at: number;
  resolution: ResolutionView | null;
}

export interface HealthView {
  revision: number;
  intents: string[];
  entities: string[];
}

export interface RetrainReport {
  revision: number;
  intent_count: number;
  example_count: number;
}

export interface ClusterView {
  assignments: Record<string, number>;
  centroids: number[][];
  inertia: number;
}

/** Non-2xx responses carry {"error": code}; surfaced as a typed throw. */
export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
  ) {
    super(`api error ${status}: ${code}`);
    this.name = "ApiError";
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class PvtaApi {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  createSession(studentId: string): Promise<{ session_id: string }> {
    return this.request("POST", "/api/sessions", { student_id: studentId });
  }

  sendMessage(sessionId: string, text: string): Promise<MessageReply> {
    return this.request("POST", `/api/sessions/${sessionId}/messages`, { text });
  }

  getTurns(sessionId: string): Promise<TurnView[]> {
    return this.request("GET", `/api/sessions/${sessionId}/turns`);
  }

  health(): Promise<HealthView> {
    return this.request("GET", "/api/health");
  }

  escalations(
    status: "pending" | "resolved" | "all",
    token: string,
  ): Promise<EscalationView[]> {
    return this.request("GET", `/api/escalations?status=${status}`, undefined, token);
  }

  resolve(
    id: string,
    finalAnswer: string,
    correctedIntent: string,
    token: string,
  ): Promise<EscalationView> {
    return this.request(
      "POST",
      `/api/escalations/${id}/resolve`,
      { final_answer: finalAnswer, corrected_intent: correctedIntent },
      token,
    );
  }

  retrain(token: string): Promise<RetrainReport> {
    return this.request("POST", "/api/admin/retrain", undefined, token);
  }

  reloadKb(token: string): Promise<{ paths: string[] }> {
    return this.request("POST", "/api/admin/reload-kb", undefined, token);
  }

  clusters(k: number, seed: number, token: string): Promise<ClusterView> {
    return this.request(
      "GET",
      `/api/students/clusters?k=${k}&seed=${seed}`,
      undefined,
      token,
    );
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
    token?: string,
  ): Promise<T> {
    const headers: Record<string, string> = { "Content-Type": "application/json" };
    if (token !== undefined) {
      headers["X-Admin-Token"] = token;
    }
    const response = await this.fetchFn(this.baseUrl + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      let code = "unknown_error";
      try {
        const payload = (await response.json()) as { error?: string };
        if (typeof payload.error === "string") {
          code = payload.error;
        }
      } catch {
        // non-JSON error body; keep the generic code
      }
      throw new ApiError(response.status, code);
    }
    return (await response.json()) as T;
  }
}
