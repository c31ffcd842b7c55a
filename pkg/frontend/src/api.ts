// Gateway client. Templates are re-hashed client-side before use; a body
// that does not hash to the requested cid is rejected here, before any
// rendering happens.

import { verifyContent } from "./cid.js";
import type { ConsentRequest } from "./tx.js";

export interface TemplateQuestion {
  question_id: string;
  prompt: string;
  options: string[];
}

export interface Template {
  title: string;
  controller_identity: string;
  questions: TemplateQuestion[];
  purposes: { question_id: string; purpose_text: string }[];
  notices: Record<string, string>;
  jurisdiction_tags: string[];
}

export interface Receipt {
  tx_id: string;
  status: string;
}

export interface HistoryRow {
  tx_id: string;
  height: number;
  timestamp: number;
  tx: { action: string };
}

export interface ConsentStatus {
  wallet: string;
  template_cid: string;
  as_of: number;
  per_question: Record<string, string>;
  history: HistoryRow[];
}

export interface Rejection {
  element: string;
  question_id: string | null;
  message: string;
}

export class GatewayError extends Error {
  status: number;
  rejections: Rejection[];

  constructor(status: number, message: string, rejections: Rejection[] = []) {
    super(message);
    this.status = status;
    this.rejections = rejections;
  }
}

export class CidMismatchError extends Error {
  constructor(cid: string) {
    super(`fetched bytes do not hash to ${cid}`);
  }
}

async function fail(response: Response): Promise<never> {
  let message = `${response.status}`;
  let rejections: Rejection[] = [];
  try {
    const body = await response.json();
    message = body.message ?? body.detail ?? body.error ?? message;
    rejections = body.rejections ?? [];
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new GatewayError(response.status, message, rejections);
}

export class GatewayClient {
  constructor(
    private readonly base: string,
    private token: string | null = null,
  ) {}

  private headers(): Record<string, string> {
    return this.token ? { Authorization: `Bearer ${this.token}` } : {};
  }

  async login(role: string, wallet?: string): Promise<void> {
    const response = await fetch(`${this.base}/v1/auth/login`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(wallet ? { role, wallet } : { role }),
    });
    if (!response.ok) await fail(response);
    this.token = (await response.json()).token;
  }

  async fetchTemplate(cid: string): Promise<{ template: Template; raw: Uint8Array }> {
    const response = await fetch(`${this.base}/v1/templates/${cid}`, {
      headers: this.headers(),
    });
    if (!response.ok) await fail(response);
    const raw = new Uint8Array(await response.arrayBuffer());
    if (!verifyContent(cid, raw)) throw new CidMismatchError(cid);
    const template = JSON.parse(new TextDecoder().decode(raw)) as Template;
    return { template, raw };
  }

  async submitConsent(request: ConsentRequest): Promise<Receipt> {
    const response = await fetch(`${this.base}/v1/consents`, {
      method: "POST",
      headers: { "Content-Type": "application/json", ...this.headers() },
      body: JSON.stringify(request),
    });
    if (!response.ok) await fail(response);
    return (await response.json()) as Receipt;
  }

  async consentStatus(wallet: string, templateCid: string): Promise<ConsentStatus> {
    const response = await fetch(
      `${this.base}/v1/consents/${wallet}?template=${templateCid}`,
      { headers: this.headers() },
    );
    if (!response.ok) await fail(response);
    return (await response.json()) as ConsentStatus;
  }
}
