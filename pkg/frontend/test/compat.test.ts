// Byte-compatibility with the backend: content ids, wallet addresses,
// signing payloads, and Ed25519 signatures must all reproduce the values
// in the generated fixture exactly (0 mismatches across 50 transactions).

import { describe, expect, it } from "vitest";

import { bytesToHex, canonicalBytes, hexToBytes, type Json } from "../src/canonical.js";
import { CHUNK_SIZE, cidOf, rootCid, verifyContent } from "../src/cid.js";
import { signingPayload, type Action, type Answer } from "../src/tx.js";
import { sign, verify, walletFromSecret } from "../src/wallet.js";

import vectors from "./fixtures/compat_vectors.json";

describe("content ids", () => {
  it("empty and known digests", () => {
    expect(cidOf(new Uint8Array(0))).toBe(
      "aic1e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    expect(cidOf(new TextEncoder().encode("abc"))).toBe(
      "aic1ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  });

  it("template canonical bytes hash to the published cid", () => {
    const raw = hexToBytes(vectors.template_canonical_hex);
    expect(rootCid(raw)).toBe(vectors.template_cid);
    expect(verifyContent(vectors.template_cid, raw)).toBe(true);
  });

  it("template document re-serializes to the canonical bytes", () => {
    const got = bytesToHex(canonicalBytes(vectors.template_document as Json));
    expect(got).toBe(vectors.template_canonical_hex);
  });

  it("multi-chunk DAG root matches the backend", () => {
    const { length, cid } = vectors.multichunk;
    expect(length).toBeGreaterThan(CHUNK_SIZE);
    const blob = new Uint8Array(length);
    for (let i = 0; i < length; i++) blob[i] = i % 251;
    expect(rootCid(blob)).toBe(cid);
  });
});

describe("transaction fixtures", () => {
  it("reproduces every payload, address, and signature (0 mismatches)", () => {
    let mismatches = 0;
    for (const tx of vectors.transactions) {
      const wallet = walletFromSecret(hexToBytes(tx.seed));
      const payload = signingPayload(
        wallet.address,
        bytesToHex(wallet.publicKey),
        tx.action as Action,
        tx.template_cid,
        tx.answers as Answer[],
      );
      const ok =
        wallet.address === tx.wallet &&
        bytesToHex(wallet.publicKey) === tx.public_key &&
        bytesToHex(payload) === tx.payload_hex &&
        bytesToHex(sign(wallet, payload)) === tx.signature &&
        verify(wallet.publicKey, payload, hexToBytes(tx.signature));
      if (!ok) mismatches += 1;
    }
    expect(vectors.transactions.length).toBe(50);
    expect(mismatches).toBe(0);
  });

  it("a flipped payload byte no longer verifies", () => {
    const tx = vectors.transactions[0];
    const wallet = walletFromSecret(hexToBytes(tx.seed));
    const payload = hexToBytes(tx.payload_hex);
    payload[10] ^= 0x01;
    expect(verify(wallet.publicKey, payload, hexToBytes(tx.signature))).toBe(false);
  });
});
