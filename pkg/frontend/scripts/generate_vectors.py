"""Regenerates test/fixtures/compat_vectors.json from the backend package.

The front end must reproduce these bytes exactly: canonical JSON, content
ids (including the multi-chunk DAG root), wallet addresses, signing
payloads, and Ed25519 signatures.

Run from the frontend directory: python3 scripts/generate_vectors.py
"""

import json
import random
from pathlib import Path

from aic.canonical import canonical_json
from aic.cas import cid_of, verify
from aic.keys import KeyPair
from aic.ledger import Action, sign_draft
from aic.templates import parse_template, serialize_template

HERE = Path(__file__).resolve().parent.parent
FIXTURES = HERE.parent / "fixtures"
OUT = HERE / "test" / "fixtures" / "compat_vectors.json"

ACTIONS = [Action.GRANT, Action.EXTEND, Action.WITHDRAW]


def deterministic_blob(length: int) -> bytes:
    return bytes(i % 251 for i in range(length))


def main() -> None:
    template = parse_template(json.loads(
        (FIXTURES / "sample_template.json").read_text()))
    template_bytes = serialize_template(template)
    template_cid = cid_of(template_bytes).text

    rng = random.Random(501)
    transactions = []
    for i in range(50):
        seed = bytes([rng.randrange(1, 256) for _ in range(32)])
        keypair = KeyPair.from_secret(seed)
        action = ACTIONS[i % 3]
        if action is Action.GRANT:
            answers = tuple((q, rng.choice(["YES", "NO"]))
                            for q in template.question_ids())
        elif action is Action.EXTEND:
            qids = rng.sample(template.question_ids(),
                              rng.randrange(1, len(template.question_ids()) + 1))
            answers = tuple((q, rng.choice(["YES", "NO"])) for q in sorted(qids))
        else:
            answers = ()
        draft = sign_draft(keypair, action, template_cid, answers)
        transactions.append({
            "seed": seed.hex(),
            "wallet": draft.wallet,
            "public_key": draft.public_key,
            "action": draft.action.value,
            "template_cid": draft.template_cid,
            "answers": [list(a) for a in draft.answers],
            "payload_hex": draft.payload().hex(),
            "signature": draft.signature,
            "body_digest": draft.body_digest,
        })

    big = deterministic_blob(3 * 262144 + 12345)
    vectors = {
        "template_document": json.loads(template_bytes),
        "template_canonical_hex": template_bytes.hex(),
        "template_cid": template_cid,
        "multichunk": {
            "rule": "bytes[i] = i % 251",
            "length": len(big),
            "cid": cid_of_root(big),
        },
        "canonical_cases": [
            {"value": case, "expected": canonical_json(case).hex()}
            for case in (
                {"b": 1, "a": [False, None, "x"],
                 "nested": {"z": "ż", "a": "ä"}},
                {"text": "quotes \" and \\ and \n tab \t end"},
            )
        ],
        "transactions": transactions,
    }
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(vectors, indent=2, ensure_ascii=False) + "\n")
    print(f"wrote {OUT} ({len(transactions)} transactions)")


def cid_of_root(data: bytes) -> str:
    from aic.cas import _plan
    root, _chunks, _node = _plan(data)
    assert verify(root, data)
    return root.text


if __name__ == "__main__":
    main()
