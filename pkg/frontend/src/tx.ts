// Consent transaction bodies, serialized exactly like the ledger's
// canonical signing payload and signed locally with the wallet key.

import { canonicalBytes, bytesToHex, type Json } from "./canonical.js";
import { sign, type Wallet } from "./wallet.js";

export type Action = "GRANT" | "EXTEND" | "WITHDRAW";
export type Choice = "YES" | "NO";
export type Answer = [questionId: string, choice: Choice];

export interface ConsentRequest {
  action: Action;
  template_cid: string;
  wallet: string;
  public_key: string;
  answers: Answer[];
  signature: string;
}

export function signingPayload(
  walletAddress: string,
  publicKeyHex: string,
  action: Action,
  templateCid: string,
  answers: Answer[],
): Uint8Array {
  return canonicalBytes({
    action,
    answers: answers.map(([q, c]) => [q, c]) as Json,
    public_key: publicKeyHex,
    template_cid: templateCid,
    wallet: walletAddress,
  });
}

export function buildConsentRequest(
  wallet: Wallet,
  action: Action,
  templateCid: string,
  answers: Answer[],
): ConsentRequest {
  const publicKeyHex = bytesToHex(wallet.publicKey);
  const payload = signingPayload(
    wallet.address, publicKeyHex, action, templateCid, answers);
  return {
    action,
    template_cid: templateCid,
    wallet: wallet.address,
    public_key: publicKeyHex,
    answers,
    signature: bytesToHex(sign(wallet, payload)),
  };
}
