// The subject's wallet: an Ed25519 keypair generated in the browser at
// first use and kept in local storage (demo-grade key handling). The
// address is 0x + the last 20 bytes of SHA-256 of the raw public key,
// matching the ledger's derivation.

import * as ed from "@noble/ed25519";
import { sha256, sha512 } from "@noble/hashes/sha2.js";

import { bytesToHex, hexToBytes } from "./canonical.js";

// noble's sync API needs the hash function wired in once.
ed.hashes.sha512 = sha512;

const STORAGE_KEY = "aic-wallet-secret";

export interface Wallet {
  secret: Uint8Array;
  publicKey: Uint8Array;
  address: string;
}

export function deriveAddress(publicKey: Uint8Array): string {
  return "0x" + bytesToHex(sha256(publicKey).subarray(-20));
}

export function walletFromSecret(secret: Uint8Array): Wallet {
  if (secret.length !== 32) throw new Error("wallet secret must be 32 bytes");
  const publicKey = ed.getPublicKey(secret);
  return { secret, publicKey, address: deriveAddress(publicKey) };
}

export function walletFromHex(secretHex: string): Wallet {
  return walletFromSecret(hexToBytes(secretHex));
}

export function generateWallet(): Wallet {
  const secret = crypto.getRandomValues(new Uint8Array(32));
  return walletFromSecret(secret);
}

export function exportWalletHex(wallet: Wallet): string {
  return bytesToHex(wallet.secret);
}

export function loadOrCreateWallet(storage: Storage): Wallet {
  const stored = storage.getItem(STORAGE_KEY);
  if (stored) return walletFromHex(stored);
  const wallet = generateWallet();
  storage.setItem(STORAGE_KEY, exportWalletHex(wallet));
  return wallet;
}

export function sign(wallet: Wallet, message: Uint8Array): Uint8Array {
  return ed.sign(message, wallet.secret);
}

export function verify(
  publicKey: Uint8Array,
  message: Uint8Array,
  signature: Uint8Array,
): boolean {
  try {
    return ed.verify(signature, message, publicKey);
  } catch {
    return false;
  }
}
