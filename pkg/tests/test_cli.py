import json
import re
import struct

import pytest
from click.testing import CliRunner

from aic.cli import main
from aic.ledger import Action, sign_draft

from conftest import FIXTURES, make_node, wallet

GRANT_ALL = (("Q1", "YES"), ("Q2", "YES"), ("Q3", "NO"))


@pytest.fixture
def runner():
    return CliRunner()


def run(runner, tmp_path, *args):
    return runner.invoke(main, ["--data-dir", str(tmp_path / "node"), *args])


@pytest.fixture
def seeded(tmp_path, clock, sample_template):
    """Data dir with a published template and one sealed grant."""
    node = make_node(tmp_path, clock)
    cid = node.publish_template(sample_template).text
    node.submit_consent(sign_draft(wallet("alice"), Action.GRANT, cid, GRANT_ALL))
    return node, cid


class TestTemplateCommands:
    def test_publish_prints_stable_cid(self, runner, tmp_path):
        first = run(runner, tmp_path, "template", "publish",
                    str(FIXTURES / "sample_template.json"))
        assert first.exit_code == 0, first.output
        cid = first.output.strip()
        assert re.fullmatch(r"aic1[0-9a-f]{64}", cid)
        second = run(runner, tmp_path, "template", "publish",
                     str(FIXTURES / "sample_template.json"))
        assert second.output.strip() == cid

    def test_show_round_trips_canonical_document(self, runner, tmp_path):
        published = run(runner, tmp_path, "template", "publish",
                        str(FIXTURES / "sample_template.json"))
        cid = published.output.strip()
        shown = run(runner, tmp_path, "template", "show", cid)
        assert shown.exit_code == 0
        assert json.loads(shown.output)["title"].startswith("Tissue biobank")

    def test_show_unknown_cid_fails(self, runner, tmp_path):
        result = run(runner, tmp_path, "template", "show", "aic1" + "0" * 64)
        assert result.exit_code == 1
        assert result.stderr.startswith("ERR:UNKNOWN_TEMPLATE:")

    def test_publish_invalid_template(self, runner, tmp_path):
        doc = json.loads((FIXTURES / "sample_template.json").read_text())
        doc["notices"]["d"] = ""
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(doc))
        result = run(runner, tmp_path, "template", "publish", str(bad))
        assert result.exit_code == 1
        assert result.stderr.startswith("ERR:INVALID_TEMPLATE:")


class TestChainCommands:
    def test_verify_ok(self, runner, tmp_path, seeded):
        result = run(runner, tmp_path, "chain", "verify")
        assert result.exit_code == 0
        assert result.output.strip() == "ok"

    def test_verify_tampered_store(self, runner, tmp_path, seeded):
        node, _cid = seeded
        path = node.config.data_dir / "chain.log"
        raw = bytearray(path.read_bytes())
        (genesis_len,) = struct.unpack(">I", raw[0:4])
        target = 4 + genesis_len + 4 + 40  # inside block 1's record
        raw[target] ^= 0x04
        path.write_bytes(bytes(raw))
        result = run(runner, tmp_path, "chain", "verify")
        assert result.exit_code == 1
        assert result.stderr.startswith("ERR:TAMPER:height=1")

    def test_dump_emits_canonical_blocks(self, runner, tmp_path, seeded):
        result = run(runner, tmp_path, "chain", "dump")
        assert result.exit_code == 0
        lines = result.output.strip().splitlines()
        assert len(lines) == 2  # genesis + one sealed block
        genesis = json.loads(lines[0])
        assert genesis["height"] == 0
        assert json.loads(lines[1])["height"] == 1

    def test_dump_is_byte_stable(self, runner, tmp_path, seeded):
        first = run(runner, tmp_path, "chain", "dump")
        second = run(runner, tmp_path, "chain", "dump")
        assert first.output == second.output


class TestConsentStatus:
    def test_status_lines(self, runner, tmp_path, seeded):
        _node, cid = seeded
        result = run(runner, tmp_path, "consent", "status",
                     wallet("alice").address, cid)
        assert result.exit_code == 0
        assert result.output.splitlines() == [
            "Q1 GRANTED", "Q2 GRANTED", "Q3 DENIED"]

    def test_status_json(self, runner, tmp_path, seeded):
        _node, cid = seeded
        result = run(runner, tmp_path, "--json", "consent", "status",
                     wallet("alice").address, cid)
        body = json.loads(result.output)
        assert body["per_question"] == {
            "Q1": "GRANTED", "Q2": "GRANTED", "Q3": "DENIED"}
        assert len(body["history"]) == 1


class TestVaultCommands:
    def test_erase(self, runner, tmp_path, seeded):
        node, _cid = seeded
        subject_id, _addr = node.enroll("Carla Winterbottom", {},
                                        wallet("alice").public, actor="CONTROLLER")
        result = run(runner, tmp_path, "vault", "erase", subject_id)
        assert result.exit_code == 0
        assert "unlinked 1" in result.output

    def test_erase_unknown_subject(self, runner, tmp_path, seeded):
        result = run(runner, tmp_path, "vault", "erase", "missing-subject")
        assert result.exit_code == 1
        assert result.stderr.startswith("ERR:UNKNOWN_SUBJECT:")


class TestKeygen:
    def test_wallet_address_format(self, runner, tmp_path):
        result = run(runner, tmp_path, "keygen", "wallet")
        assert result.exit_code == 0
        assert re.search(r"address: 0x[0-9a-f]{40}\n", result.output)
        assert re.search(r"secret_key: [0-9a-f]{64}\n", result.output)

    def test_keygen_json_and_out_file(self, runner, tmp_path):
        out = tmp_path / "authority.key"
        result = run(runner, tmp_path, "--json", "keygen", "authority",
                     "--out", str(out))
        body = json.loads(result.output)
        assert "secret_key" not in body
        assert re.fullmatch(r"[0-9a-f]{64}", out.read_text().strip())


class TestUsageErrors:
    def test_unknown_command_exits_2(self, runner, tmp_path):
        result = run(runner, tmp_path, "frobnicate")
        assert result.exit_code == 2

    def test_bad_flag_exits_2(self, runner, tmp_path):
        result = run(runner, tmp_path, "chain", "verify", "--bogus")
        assert result.exit_code == 2
