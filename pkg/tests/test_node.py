import pytest

from aic.config import Config
from aic.ledger import Action, sign_draft
from aic.node import Node

from conftest import AUTHORITY_SEED, wallet

GRANT_ALL = (("Q1", "YES"), ("Q2", "YES"), ("Q3", "NO"))


def make_batch_node(tmp_path, clock, **kwargs) -> Node:
    data_dir = tmp_path / "batch-node"
    data_dir.mkdir(parents=True, exist_ok=True)
    (data_dir / "authority.key").write_text(AUTHORITY_SEED.hex() + "\n")
    return Node(Config(data_dir=data_dir, seal_policy="batch", **kwargs),
                clock=clock)


class TestBatchSealing:
    def test_seals_when_batch_size_reached(self, tmp_path, clock, sample_template):
        node = make_batch_node(tmp_path, clock, batch_max_txs=2,
                               batch_max_seconds=10_000)
        cid = node.publish_template(sample_template).text
        node.submit_consent(sign_draft(wallet("alice"), Action.GRANT, cid, GRANT_ALL))
        assert node.ledger.height == 0
        assert len(node.ledger.pending) == 1
        node.submit_consent(sign_draft(wallet("bob"), Action.GRANT, cid, GRANT_ALL))
        assert node.ledger.height == 1
        assert node.ledger.pending == ()

    def test_seals_when_batch_window_elapses(self, tmp_path, clock, sample_template):
        node = make_batch_node(tmp_path, clock, batch_max_txs=100,
                               batch_max_seconds=30)
        cid = node.publish_template(sample_template).text
        node.submit_consent(sign_draft(wallet("alice"), Action.GRANT, cid, GRANT_ALL))
        assert node.ledger.height == 0
        clock.tick(31)
        node.submit_consent(sign_draft(wallet("bob"), Action.GRANT, cid, GRANT_ALL))
        assert node.ledger.height == 1

    def test_batched_block_keeps_submission_order(self, tmp_path, clock, sample_template):
        node = make_batch_node(tmp_path, clock, batch_max_txs=3,
                               batch_max_seconds=10_000)
        cid = node.publish_template(sample_template).text
        ids = [
            node.submit_consent(sign_draft(wallet(name), Action.GRANT, cid, GRANT_ALL))
            for name in ("alice", "bob", "carol")
        ]
        block = node.ledger.blocks[-1]
        assert [tx.tx_id for tx in block.transactions] == ids
