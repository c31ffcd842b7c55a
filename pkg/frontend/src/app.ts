// Application flow: fetch-and-verify the template, collect explicit
// choices, sign locally, submit, then show the receipt and the sealed
// per-question state. Kept separate from main.ts so tests can drive the
// whole flow against a mounted container.

import { CidMismatchError, GatewayClient, GatewayError } from "./api.js";
import { FormModel } from "./form.js";
import { buildConsentRequest, type Choice } from "./tx.js";
import {
  refreshSubmitState,
  renderCidMismatch,
  renderForm,
  renderReceipt,
  renderRejections,
  renderTimeline,
} from "./view.js";
import type { Wallet } from "./wallet.js";

export class ConsentApp {
  model: FormModel | null = null;

  constructor(
    private readonly container: HTMLElement,
    private readonly client: GatewayClient,
    private readonly wallet: Wallet,
  ) {}

  async start(templateCid: string): Promise<void> {
    let template;
    try {
      ({ template } = await this.client.fetchTemplate(templateCid));
    } catch (error) {
      if (error instanceof CidMismatchError) {
        renderCidMismatch(this.container, templateCid);
        return;
      }
      throw error;
    }
    this.model = new FormModel(templateCid, template);
    renderForm(this.container, this.model, {
      onChoice: (questionId, choice) => this.choose(questionId, choice),
      onSubmit: () => void this.submit(),
    });
    await this.refreshTimeline();
  }

  choose(questionId: string, choice: Choice): void {
    if (!this.model) throw new Error("form not started");
    this.model.choose(questionId, choice);
    refreshSubmitState(this.container, this.model);
  }

  async submit(): Promise<void> {
    if (!this.model) throw new Error("form not started");
    const request = buildConsentRequest(
      this.wallet, "GRANT", this.model.templateCid, this.model.answers());
    try {
      const receipt = await this.client.submitConsent(request);
      renderReceipt(this.container, receipt.tx_id, receipt.status);
    } catch (error) {
      if (error instanceof GatewayError && error.rejections.length) {
        renderRejections(this.container, error.rejections);
        return;
      }
      throw error;
    }
    await this.refreshTimeline();
  }

  async withdraw(): Promise<void> {
    if (!this.model) throw new Error("form not started");
    const request = buildConsentRequest(
      this.wallet, "WITHDRAW", this.model.templateCid, []);
    const receipt = await this.client.submitConsent(request);
    renderReceipt(this.container, receipt.tx_id, receipt.status);
    await this.refreshTimeline();
  }

  async refreshTimeline(): Promise<void> {
    if (!this.model) return;
    const status = await this.client.consentStatus(
      this.wallet.address, this.model.templateCid);
    renderTimeline(this.container, status, {
      onWithdraw: () => void this.withdraw(),
    });
  }
}
