/**
 * In-memory stand-in for the assistant service, exposed as a fetch-compatible
 * function. It reproduces the API's observable behavior - sessions, turn
 * threads, escalation ids, resolve-and-deliver, error bodies - with a scripted
 * answer table instead of a classifier, so view tests can drive the whole
 * round trip without a backend.
 */

import { EscalationView, TurnView } from "../src/api.js";

interface ScriptEntry {
  intent: string;
  confidence: number;
  answer: string;
}

interface FakeSession {
  id: string;
  studentId: string;
  turns: TurnView[];
}

export class FakeServer {
  script = new Map<string, ScriptEntry>();
  intents: string[] = ["greeting", "exam_date", "office_hours"];
  revision = 1;
  adminToken = "secret";
  threshold = 0.6;
  /** When true every request fails at the network level. */
  offline = false;
  clustersByK = new Map<number, Record<string, number>>();

  private sessions = new Map<string, FakeSession>();
  private escalations: EscalationView[] = [];
  private nextSession = 1;
  private nextEscalation = 1;
  private clock = 1000;

  requests: Array<{ method: string; path: string }> = [];

  /** The fetch replacement handed to PvtaApi. */
  fetch = async (input: string, init?: RequestInit): Promise<Response> => {
    if (this.offline) {
      throw new TypeError("fetch failed");
    }
    const url = new URL(input);
    const method = init?.method ?? "GET";
    const path = url.pathname;
    this.requests.push({ method, path });
    const body =
      typeof init?.body === "string" ? (JSON.parse(init.body) as any) : undefined;
    const headers = (init?.headers ?? {}) as Record<string, string>;
    return this.route(method, path, url, body, headers);
  };

  private route(
    method: string,
    path: string,
    url: URL,
    body: any,
    headers: Record<string, string>,
  ): Response {
    if (method === "POST" && path === "/api/sessions") {
      if (typeof body?.student_id !== "string" || body.student_id.length === 0) {
        return json(400, { error: "bad_request" });
      }
      const id = `fake-session-${this.nextSession++}`;
      this.sessions.set(id, { id, studentId: body.student_id, turns: [] });
      return json(200, { session_id: id });
    }

    let match = path.match(/^\/api\/sessions\/([^/]+)\/messages$/);
    if (method === "POST" && match !== null) {
      const session = this.sessions.get(match[1]!);
      if (session === undefined) {
        return json(404, { error: "unknown_session" });
      }
      return json(200, this.handleMessage(session, String(body?.text ?? "")));
    }

    match = path.match(/^\/api\/sessions\/([^/]+)\/turns$/);
    if (method === "GET" && match !== null) {
      const session = this.sessions.get(match[1]!);
      if (session === undefined) {
        return json(404, { error: "unknown_session" });
      }
      return json(200, session.turns);
    }

    if (method === "GET" && path === "/api/health") {
      return json(200, {
        revision: this.revision,
        intents: this.intents,
        entities: ["assessment", "topic"],
      });
    }

    if (method === "GET" && path === "/api/escalations") {
      const denied = this.requireAdmin(headers);
      if (denied !== null) return denied;
      const status = url.searchParams.get("status") ?? "pending";
      if (status === "pending" || status === "resolved") {
        return json(200, this.escalations.filter((e) => e.status === status));
      }
      if (status === "all") {
        return json(200, this.escalations);
      }
      return json(400, { error: "bad_request" });
    }

    match = path.match(/^\/api\/escalations\/([^/]+)\/resolve$/);
    if (method === "POST" && match !== null) {
      const denied = this.requireAdmin(headers);
      if (denied !== null) return denied;
      return this.handleResolve(match[1]!, body);
    }

    if (method === "POST" && path === "/api/admin/retrain") {
      const denied = this.requireAdmin(headers);
      if (denied !== null) return denied;
      this.revision += 1;
      return json(200, {
        revision: this.revision,
        intent_count: this.intents.length,
        example_count: 57 + this.escalations.filter((e) => e.status === "resolved").length,
      });
    }

    if (method === "GET" && path === "/api/students/clusters") {
      const denied = this.requireAdmin(headers);
      if (denied !== null) return denied;
      const k = Number(url.searchParams.get("k") ?? "3");
      const assignments = this.clustersByK.get(k);
      if (assignments === undefined) {
        return json(422, { error: "too_few_distinct_points" });
      }
      const inertia = 0.25;
      return json(200, { assignments, centroids: [[0], [1]].slice(0, k), inertia });
    }

    return json(404, { error: "not_found" });
  }

  private handleMessage(session: FakeSession, text: string) {
    const entry = this.script.get(text);
    const confidence = entry?.confidence ?? 0.1;
    const intent = entry?.intent ?? "exam_date";
    const escalated = confidence < this.threshold;
    const turn: TurnView = {
      author: "assistant",
      raw_question: text,
      preprocessed_question: text,
      intent,
      confidence,
      mentions: [],
      matched_node_id: escalated ? "fallback" : "node",
      answer: escalated ? null : entry!.answer,
      pending: escalated,
      escalated,
      escalation_id: null,
      timestamp: this.clock++,
    };
    if (escalated) {
      const item: EscalationView = {
        id: `esc-${this.nextEscalation++}`,
        session_id: session.id,
        student_id: session.studentId,
        question: text,
        proposed_answer: entry?.answer ?? "",
        proposed_intent: intent,
        confidence,
        status: "pending",
        created_at: this.clock++,
        resolution: null,
      };
      this.escalations.push(item);
      turn.escalation_id = item.id;
    }
    session.turns.push(turn);
    return {
      answer: turn.answer,
      pending: turn.pending,
      intent: turn.intent,
      confidence: turn.confidence,
      escalated: turn.escalated,
    };
  }

  private handleResolve(id: string, body: any): Response {
    const item = this.escalations.find((candidate) => candidate.id === id);
    if (item === undefined) {
      return json(404, { error: "not_found" });
    }
    if (item.status === "resolved") {
      return json(409, { error: "already_resolved" });
    }
    if (!this.intents.includes(String(body?.corrected_intent))) {
      return json(422, { error: "unknown_intent" });
    }
    item.status = "resolved";
    item.resolution = {
      final_answer: String(body.final_answer),
      corrected_intent: String(body.corrected_intent),
      resolved_at: this.clock++,
    };
    const session = this.sessions.get(item.session_id);
    session?.turns.push({
      author: "ta",
      raw_question: item.question,
      preprocessed_question: item.question,
      intent: null,
      confidence: 1.0,
      mentions: [],
      matched_node_id: null,
      answer: item.resolution.final_answer,
      pending: false,
      escalated: false,
      escalation_id: item.id,
      timestamp: this.clock++,
    });
    return json(200, item);
  }

  private requireAdmin(headers: Record<string, string>): Response | null {
    if (headers["X-Admin-Token"] !== this.adminToken) {
      return json(401, { error: "unauthorized" });
    }
    return null;
  }
}

function json(status: number, payload: unknown): Response {
  return new Response(JSON.stringify(payload), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}
