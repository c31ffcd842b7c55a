import { describe, expect, it } from "vitest";

import { bytesToHex, canonicalBytes, canonicalJson, hexToBytes } from "../src/canonical.js";

import vectors from "./fixtures/compat_vectors.json";

describe("canonicalJson", () => {
  it("sorts keys recursively and uses compact separators", () => {
    expect(canonicalJson({ b: 1, a: { d: 2, c: 3 } }))
      .toBe('{"a":{"c":3,"d":2},"b":1}');
  });

  it("keeps array order", () => {
    expect(canonicalJson([3, 1, 2])).toBe("[3,1,2]");
  });

  it("rejects non-integer numbers", () => {
    expect(() => canonicalJson({ x: 1.5 })).toThrow();
  });

  it("matches the backend encoding byte for byte", () => {
    for (const testCase of vectors.canonical_cases) {
      const got = bytesToHex(canonicalBytes(testCase.value));
      expect(got).toBe(testCase.expected);
    }
  });
});

describe("hex helpers", () => {
  it("round-trips", () => {
    const bytes = new Uint8Array([0, 1, 0xab, 0xff]);
    expect(hexToBytes(bytesToHex(bytes))).toEqual(bytes);
  });

  it("rejects malformed hex", () => {
    expect(() => hexToBytes("abc")).toThrow();
    expect(() => hexToBytes("zz")).toThrow();
  });
});
