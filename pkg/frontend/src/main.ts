/**
 * Browser entry point: wires the three views (student chat, TA console,
 * cluster inspector) to plain DOM. All logic lives in the controllers; this
 * file only renders their state and forwards events.
 */

import { PvtaApi } from "./api.js";
import { ChatController } from "./chat.js";
import { ClusterInspector } from "./clusters.js";
import { TAConsoleController } from "./taConsole.js";

const app = document.getElementById("app") as HTMLElement;

const baseUrl =
  localStorage.getItem("pvta-base-url") ?? "http://127.0.0.1:8000";
const api = new PvtaApi(baseUrl);

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className !== undefined) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

// ---------------------------------------------------------------- student chat

function buildChatView(): HTMLElement {
  const root = el("section", "view");
  const thread = el("div", "thread");
  const status = el("p", "status");
  const form = el("form", "composer");
  const nameInput = el("input") as HTMLInputElement;
  nameInput.placeholder = "student id";
  nameInput.value = "student";
  const startButton = el("button", undefined, "start session");
  startButton.type = "button";
  const textInput = el("input") as HTMLInputElement;
  textInput.placeholder = "ask the assistant...";
  textInput.disabled = true;
  const sendButton = el("button", undefined, "send");
  sendButton.disabled = true;
  const retryButton = el("button", "retry", "retry last message");
  retryButton.type = "button";
  retryButton.hidden = true;

  let chat: ChatController | null = null;

  function render(): void {
    if (chat === null) return;
    thread.replaceChildren();
    for (const { turn, awaitingTa } of chat.state.turns) {
      if (turn.author === "assistant") {
        thread.append(el("div", "bubble student", turn.raw_question));
        if (awaitingTa) {
          thread.append(
            el("div", "bubble bot pending",
               "forwarded to a human teaching assistant; answer pending"),
          );
        } else if (turn.answer !== null) {
          thread.append(el("div", "bubble bot", turn.answer));
        }
      } else {
        thread.append(el("div", "bubble ta", `TA: ${turn.answer ?? ""}`));
      }
    }
    status.textContent = chat.state.error ?? "";
    retryButton.hidden = chat.state.failedText === null;
    sendButton.disabled = chat.state.busy;
  }

  startButton.addEventListener("click", async () => {
    chat = new ChatController(api, nameInput.value || "student");
    chat.onChange(render);
    await chat.start();
    chat.startPolling();
    nameInput.disabled = true;
    startButton.disabled = true;
    textInput.disabled = false;
    sendButton.disabled = false;
  });

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    if (chat !== null && textInput.value.trim() !== "") {
      void chat.send(textInput.value);
      textInput.value = "";
    }
  });

  retryButton.addEventListener("click", () => {
    void chat?.retry();
  });

  form.append(textInput, sendButton);
  root.append(
    el("h2", undefined, "Student chat"),
    nameInput, startButton, thread, status, form, retryButton,
  );
  return root;
}

// ------------------------------------------------------------------ TA console

function buildConsoleView(): HTMLElement {
  const root = el("section", "view");
  const tokenInput = el("input") as HTMLInputElement;
  tokenInput.placeholder = "admin token";
  tokenInput.type = "password";
  const openButton = el("button", undefined, "open queue");
  const list = el("ul", "queue");
  const detail = el("div", "detail");
  const toast = el("p", "toast");
  const status = el("p", "status");

  let console_: TAConsoleController | null = null;

  function render(): void {
    if (console_ === null) return;
    const state = console_.state;
    list.replaceChildren();
    for (const item of state.pending) {
      const entry = el(
        "li", state.selectedId === item.id ? "selected" : undefined,
        `${item.id} [${item.student_id}] ${item.question} ` +
          `(proposed ${item.proposed_intent}, ${item.confidence.toFixed(3)})`,
      );
      entry.addEventListener("click", () => console_?.select(item.id));
      list.append(entry);
    }

    detail.replaceChildren();
    const selected = console_.selected;
    if (selected !== null) {
      const answerBox = el("textarea") as HTMLTextAreaElement;
      answerBox.value = state.draftAnswer;
      answerBox.addEventListener("input", () =>
        console_?.setDraftAnswer(answerBox.value),
      );
      const intentPicker = el("select") as HTMLSelectElement;
      intentPicker.append(new Option("choose the corrected intent", ""));
      for (const intent of state.intents) {
        intentPicker.append(new Option(intent, intent));
      }
      intentPicker.value = state.intents.includes(state.draftIntent)
        ? state.draftIntent
        : "";
      intentPicker.addEventListener("change", () =>
        console_?.setDraftIntent(intentPicker.value),
      );
      const resolveButton = el("button", undefined, "resolve");
      resolveButton.disabled = !console_.canResolve();
      resolveButton.addEventListener("click", () => {
        void console_?.resolveSelected();
      });
      detail.append(
        el("p", undefined, `question: ${selected.question}`),
        answerBox, intentPicker, resolveButton,
      );
      if (state.intentError !== null) {
        detail.append(el("p", "error", state.intentError));
      }
    }

    toast.textContent = state.toast ?? "";
    status.textContent =
      (state.error !== null ? `error: ${state.error}  ` : "") +
      (state.modelRevision !== null ? `model revision ${state.modelRevision}` : "");
  }

  openButton.addEventListener("click", async () => {
    console_ = new TAConsoleController(api, tokenInput.value);
    console_.onChange(render);
    await console_.refresh();
  });

  const refreshButton = el("button", undefined, "refresh");
  refreshButton.addEventListener("click", () => void console_?.refresh());
  const retrainButton = el("button", undefined, "retrain model");
  retrainButton.addEventListener("click", () => void console_?.retrain());

  root.append(
    el("h2", undefined, "TA console"),
    tokenInput, openButton, refreshButton, retrainButton,
    list, detail, toast, status,
  );
  return root;
}

// ------------------------------------------------------------ cluster inspector

function buildClusterView(): HTMLElement {
  const root = el("section", "view");
  const tokenInput = el("input") as HTMLInputElement;
  tokenInput.placeholder = "admin token";
  tokenInput.type = "password";
  const kInput = el("input") as HTMLInputElement;
  kInput.type = "number";
  kInput.value = "2";
  const seedInput = el("input") as HTMLInputElement;
  seedInput.type = "number";
  seedInput.value = "42";
  const loadButton = el("button", undefined, "load");
  const table = el("table", "clusters");
  const status = el("p", "status");

  loadButton.addEventListener("click", async () => {
    const inspector = new ClusterInspector(api, tokenInput.value);
    await inspector.load(Number(kInput.value), Number(seedInput.value));
    table.replaceChildren();
    for (const row of inspector.state.rows) {
      const tr = el("tr");
      tr.append(
        el("td", undefined, `cluster ${row.cluster}`),
        el("td", undefined, row.students.join(", ")),
      );
      table.append(tr);
    }
    status.textContent =
      inspector.state.error !== null
        ? `error: ${inspector.state.error}`
        : `inertia ${inspector.state.inertia?.toFixed(4)}`;
  });

  root.append(
    el("h2", undefined, "Cluster inspector"),
    tokenInput, kInput, seedInput, loadButton, table, status,
  );
  return root;
}

app.append(buildChatView(), buildConsoleView(), buildClusterView());
