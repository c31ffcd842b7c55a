// Client-side content ids, byte-compatible with the store: aic1 + SHA-256
// hex, fixed 262144-byte chunks, one interior DAG node above the chunks of
// multi-chunk content. Fetched templates are re-hashed before rendering so
// a tampered transport surfaces as a cid mismatch, never as a form.

import { sha256 } from "@noble/hashes/sha2.js";

import { bytesToHex } from "./canonical.js";

export const CHUNK_SIZE = 262144;
export const CID_RE = /^aic1[0-9a-f]{64}$/;

const DAG_MAGIC = new TextEncoder().encode("AICD");
const DAG_VERSION = 1;
const DAG_INTERIOR = 1;

export function cidOf(bytes: Uint8Array): string {
  return "aic1" + bytesToHex(sha256(bytes));
}

function chunkCids(bytes: Uint8Array): string[] {
  if (bytes.length === 0) return [cidOf(bytes)];
  const cids: string[] = [];
  for (let off = 0; off < bytes.length; off += CHUNK_SIZE) {
    cids.push(cidOf(bytes.subarray(off, off + CHUNK_SIZE)));
  }
  return cids;
}

function interiorNodeBytes(children: string[], totalLength: number): Uint8Array {
  const body = new TextEncoder().encode(children.join(""));
  const out = new Uint8Array(4 + 14 + body.length);
  out.set(DAG_MAGIC, 0);
  const view = new DataView(out.buffer);
  view.setUint8(4, DAG_VERSION);
  view.setUint8(5, DAG_INTERIOR);
  view.setBigUint64(6, BigInt(totalLength));
  view.setUint32(14, children.length);
  out.set(body, 18);
  return out;
}

export function rootCid(bytes: Uint8Array): string {
  const chunks = chunkCids(bytes);
  if (chunks.length === 1) return chunks[0];
  return cidOf(interiorNodeBytes(chunks, bytes.length));
}

export function verifyContent(cid: string, bytes: Uint8Array): boolean {
  if (!CID_RE.test(cid)) return false;
  return rootCid(bytes) === cid;
}
