// Form state for one consent template. Every selection starts UNSET and
// the submission payload is only constructible once no selection is UNSET:
// an unanswered question can never reach the wire, and nothing is ever
// pre-selected on the subject's behalf.

import type { Answer, Choice } from "./tx.js";
import type { Template } from "./api.js";

export type Selection = Choice | "UNSET";

export class FormModel {
  readonly templateCid: string;
  readonly template: Template;
  private selections: Map<string, Selection>;

  constructor(templateCid: string, template: Template) {
    this.templateCid = templateCid;
    this.template = template;
    this.selections = new Map(
      template.questions.map((q) => [q.question_id, "UNSET"]));
  }

  questionIds(): string[] {
    return this.template.questions.map((q) => q.question_id);
  }

  selection(questionId: string): Selection {
    const value = this.selections.get(questionId);
    if (value === undefined) throw new Error(`unknown question ${questionId}`);
    return value;
  }

  choose(questionId: string, choice: Choice): void {
    if (!this.selections.has(questionId)) {
      throw new Error(`unknown question ${questionId}`);
    }
    this.selections.set(questionId, choice);
  }

  isComplete(): boolean {
    return [...this.selections.values()].every((s) => s !== "UNSET");
  }

  // Answers in template question order; throws while any choice is UNSET.
  answers(): Answer[] {
    return this.template.questions.map((q) => {
      const selection = this.selections.get(q.question_id)!;
      if (selection === "UNSET") {
        throw new Error(`${q.question_id} has no explicit choice`);
      }
      return [q.question_id, selection] as Answer;
    });
  }
}
