"""Service configuration: JSON file with environment overrides (``AIC_*``)."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

SEAL_INTERACTIVE = "interactive"
SEAL_BATCH = "batch"


@dataclass
class Config:
    data_dir: Path = Path("aic-data")
    authority_key_path: Path | None = None
    master_key_path: Path | None = None
    listen_host: str = "127.0.0.1"
    listen_port: int = 8080
    seal_policy: str = SEAL_INTERACTIVE
    batch_max_txs: int = 8
    batch_max_seconds: int = 30
    session_ttl: int = 86400

    def __post_init__(self):
        self.data_dir = Path(self.data_dir)
        if self.authority_key_path is None:
            self.authority_key_path = self.data_dir / "authority.key"
        if self.master_key_path is None:
            self.master_key_path = self.data_dir / "vault" / "master.key"
        if self.seal_policy not in (SEAL_INTERACTIVE, SEAL_BATCH):
            raise ValueError(f"unknown seal policy {self.seal_policy!r}")


def _parse_listen(value: str) -> tuple[str, int]:
    host, _, port = value.rpartition(":")
    return host or "127.0.0.1", int(port)


def load_config(path: str | Path | None = None,
                env: Mapping[str, str] | None = None,
                data_dir: str | Path | None = None) -> Config:
    """File values first, then ``AIC_*`` environment variables, then explicit
    arguments (the CLI's ``--data-dir``) win."""
    env = os.environ if env is None else env
    values: dict = {}
    if path is not None:
        obj = json.loads(Path(path).read_text())
        for key in ("data_dir", "authority_key_path", "master_key_path",
                    "seal_policy"):
            if key in obj:
                values[key] = obj[key]
        for key in ("batch_max_txs", "batch_max_seconds", "session_ttl"):
            if key in obj:
                values[key] = int(obj[key])
        if "listen" in obj:
            values["listen_host"], values["listen_port"] = _parse_listen(obj["listen"])
    if "AIC_DATA_DIR" in env:
        values["data_dir"] = env["AIC_DATA_DIR"]
    if "AIC_AUTHORITY_KEY_PATH" in env:
        values["authority_key_path"] = env["AIC_AUTHORITY_KEY_PATH"]
    if "AIC_MASTER_KEY_PATH" in env:
        values["master_key_path"] = env["AIC_MASTER_KEY_PATH"]
    if "AIC_SEAL_POLICY" in env:
        values["seal_policy"] = env["AIC_SEAL_POLICY"]
    if "AIC_BATCH_MAX_TXS" in env:
        values["batch_max_txs"] = int(env["AIC_BATCH_MAX_TXS"])
    if "AIC_BATCH_MAX_SECONDS" in env:
        values["batch_max_seconds"] = int(env["AIC_BATCH_MAX_SECONDS"])
    if "AIC_LISTEN" in env:
        values["listen_host"], values["listen_port"] = _parse_listen(env["AIC_LISTEN"])
    if data_dir is not None:
        values["data_dir"] = data_dir
        values.setdefault("authority_key_path", None)
        values.setdefault("master_key_path", None)
    for key in ("data_dir", "authority_key_path", "master_key_path"):
        if values.get(key) is not None:
            values[key] = Path(values[key])
    return Config(**values)
