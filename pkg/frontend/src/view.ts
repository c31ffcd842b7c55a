// Plain-DOM rendering of the consent form, history timeline, and receipt.
// Controls are real radio inputs, one YES and one NO per question, never
// pre-checked; the submit button stays disabled while any question is
// unanswered.

import type { ConsentStatus, Template } from "./api.js";
import type { FormModel } from "./form.js";
import type { Choice } from "./tx.js";

export interface FormHandlers {
  onChoice(questionId: string, choice: Choice): void;
  onSubmit(): void;
}

const NOTICE_ORDER = ["a", "b", "c", "d", "e", "f"];

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderCidMismatch(container: HTMLElement, cid: string): void {
  container.replaceChildren();
  const banner = el(container.ownerDocument, "div",
    { class: "error-banner", "data-testid": "cid-mismatch" },
    `The consent document failed verification against ${cid}. ` +
    "Nothing was displayed and nothing will be submitted.");
  container.append(banner);
}

export function renderForm(
  container: HTMLElement,
  model: FormModel,
  handlers: FormHandlers,
): void {
  const doc = container.ownerDocument;
  container.replaceChildren();
  const template: Template = model.template;

  container.append(el(doc, "h1", {}, template.title));
  container.append(el(doc, "p", { "data-testid": "controller" },
    `Controller: ${template.controller_identity}`));

  const notices = el(doc, "ul", { "data-testid": "notices" });
  for (const key of NOTICE_ORDER) {
    notices.append(el(doc, "li", { "data-notice": key },
      `(${key}) ${template.notices[key]}`));
  }
  container.append(notices);

  const purposeByQuestion = new Map(
    template.purposes.map((p) => [p.question_id, p.purpose_text]));

  const form = el(doc, "form", { "data-testid": "consent-form" });
  for (const question of template.questions) {
    const row = el(doc, "fieldset", { "data-question": question.question_id });
    row.append(el(doc, "legend", {},
      `${question.question_id}. ${question.prompt}`));
    const purpose = purposeByQuestion.get(question.question_id);
    if (purpose) {
      row.append(el(doc, "p", { class: "purpose" }, `Purpose: ${purpose}`));
    }
    for (const choice of ["YES", "NO"] as Choice[]) {
      const label = el(doc, "label");
      const input = el(doc, "input", {
        type: "radio",
        name: question.question_id,
        value: choice,
        "data-testid": `${question.question_id}-${choice}`,
      }) as HTMLInputElement;
      input.addEventListener("change", () => {
        handlers.onChoice(question.question_id, choice);
      });
      label.append(input, doc.createTextNode(` ${choice}`));
      row.append(label);
    }
    form.append(row);
  }

  const submit = el(doc, "button", {
    type: "submit",
    "data-testid": "submit",
  }, "Submit consent") as HTMLButtonElement;
  submit.disabled = !model.isComplete();
  form.append(submit);
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    if (model.isComplete()) handlers.onSubmit();
  });
  container.append(form);
}

export function refreshSubmitState(container: HTMLElement, model: FormModel): void {
  const submit = container.querySelector<HTMLButtonElement>(
    '[data-testid="submit"]');
  if (submit) submit.disabled = !model.isComplete();
}

export function renderReceipt(
  container: HTMLElement,
  txId: string,
  status: string,
): void {
  const doc = container.ownerDocument;
  let receipt = container.querySelector<HTMLElement>('[data-testid="receipt"]');
  if (!receipt) {
    receipt = el(doc, "div", { "data-testid": "receipt" });
    container.append(receipt);
  }
  receipt.replaceChildren(
    el(doc, "p", { "data-testid": "receipt-tx" }, `Transaction ${txId}`),
    el(doc, "p", { "data-testid": "receipt-status" }, `Status: ${status}`),
  );
}

export function renderRejections(
  container: HTMLElement,
  rejections: { element: string; question_id: string | null; message: string }[],
): void {
  const doc = container.ownerDocument;
  const list = el(doc, "ul", { "data-testid": "rejections" });
  for (const rejection of rejections) {
    list.append(el(doc, "li", {},
      `${rejection.question_id ?? ""} ${rejection.element}: ${rejection.message}`.trim()));
  }
  container.append(list);
}

export interface TimelineHandlers {
  onWithdraw(): void;
}

export function renderTimeline(
  container: HTMLElement,
  status: ConsentStatus,
  handlers: TimelineHandlers,
): void {
  const doc = container.ownerDocument;
  let panel = container.querySelector<HTMLElement>('[data-testid="timeline"]');
  if (!panel) {
    panel = el(doc, "section", { "data-testid": "timeline" });
    container.append(panel);
  }
  panel.replaceChildren();
  panel.append(el(doc, "h2", {}, "Your consent history"));

  if (status.history.length === 0) {
    panel.append(el(doc, "p", { "data-testid": "no-consents" },
      "No consents recorded for this study."));
    return;
  }

  const rows = el(doc, "ol", { "data-testid": "timeline-rows" });
  for (const row of status.history) {
    const when = new Date(row.timestamp * 1000).toISOString();
    rows.append(el(doc, "li", { "data-height": String(row.height) },
      `${when} — ${row.tx.action} (block ${row.height})`));
  }
  panel.append(rows);

  const state = el(doc, "dl", { "data-testid": "state" });
  for (const [qid, decision] of Object.entries(status.per_question)) {
    state.append(el(doc, "dt", {}, qid));
    state.append(el(doc, "dd", { "data-state": qid }, decision));
  }
  panel.append(state);

  const withdraw = el(doc, "button", {
    type: "button",
    "data-testid": "withdraw",
  }, "Withdraw consent") as HTMLButtonElement;
  withdraw.addEventListener("click", () => handlers.onWithdraw());
  panel.append(withdraw);
}
