import json
from pathlib import Path

import pytest

from aic.cas import CasStore
from aic.clocks import ManualClock
from aic.config import Config
from aic.keys import KeyPair
from aic.node import Node
from aic.templates import ConsentTemplate, parse_template

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

# Fixed seeds make wallets reproducible across runs and processes.
WALLET_SEEDS = {name: bytes([i + 1]) * 32
                for i, name in enumerate(["alice", "bob", "carol", "dave"])}
AUTHORITY_SEED = bytes([0xA0]) * 32


@pytest.fixture
def sample_template() -> ConsentTemplate:
    return parse_template(json.loads((FIXTURES / "sample_template.json").read_text()))


@pytest.fixture
def clock() -> ManualClock:
    return ManualClock(1_700_000_000)


@pytest.fixture
def store(tmp_path) -> CasStore:
    return CasStore(tmp_path / "cas")


def wallet(name: str) -> KeyPair:
    return KeyPair.from_secret(WALLET_SEEDS[name])


def make_node(tmp_path, clock, seal_policy: str = "interactive",
              subdir: str = "node") -> Node:
    data_dir = tmp_path / subdir
    data_dir.mkdir(parents=True, exist_ok=True)
    authority_path = data_dir / "authority.key"
    authority_path.write_text(AUTHORITY_SEED.hex() + "\n")
    config = Config(data_dir=data_dir, seal_policy=seal_policy)
    return Node(config, clock=clock)


@pytest.fixture
def node(tmp_path, clock) -> Node:
    return make_node(tmp_path, clock)
