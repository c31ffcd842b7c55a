"""Operator command line.

Exit codes: 0 success, 1 domain error, 2 usage error. Domain errors print
``ERR:<code>:<detail>`` on stderr so scripts can parse them.
"""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click

from .cas import Cid
from .config import Config, load_config
from .errors import AicError
from .keys import KeyPair
from .node import Node
from .templates import parse_template


def _fail(code: str, detail: str) -> None:
    click.echo(f"ERR:{code}:{detail}", err=True)
    sys.exit(1)


def domain_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except AicError as exc:
            _fail(exc.code, exc.message)
    return wrapper


class Context:
    def __init__(self, config: Config, as_json: bool):
        self.config = config
        self.as_json = as_json
        self._node: Node | None = None

    @property
    def node(self) -> Node:
        if self._node is None:
            self._node = Node(self.config)
        return self._node


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Path to a JSON config file.")
@click.option("--data-dir", type=click.Path(file_okay=False), default=None,
              help="Override the data directory.")
@click.option("--json", "as_json", is_flag=True, default=False,
              help="Emit machine-readable JSON.")
@click.pass_context
def main(ctx, config_path, data_dir, as_json):
    """Consent platform operator tool."""
    ctx.obj = Context(load_config(config_path, data_dir=data_dir), as_json)


@main.command()
@click.option("--listen", default=None, help="host:port to bind.")
@click.pass_obj
@domain_errors
def serve(obj: Context, listen):
    """Run the HTTP gateway."""
    import uvicorn

    from .gateway import create_app

    host, port = obj.config.listen_host, obj.config.listen_port
    if listen:
        host, _, port_text = listen.rpartition(":")
        port = int(port_text)
    uvicorn.run(create_app(obj.node), host=host or "127.0.0.1", port=port)


@main.group()
def template():
    """Publish and inspect consent templates."""


@template.command("publish")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.pass_obj
@domain_errors
def template_publish(obj: Context, file):
    """Validate FILE and store its canonical form; prints the Cid."""
    try:
        doc = json.loads(Path(file).read_text())
        tpl = parse_template(doc)
    except (ValueError, json.JSONDecodeError) as exc:
        _fail("INVALID_TEMPLATE", str(exc))
        return
    cid = obj.node.publish_template(tpl)
    if obj.as_json:
        click.echo(json.dumps({"cid": cid.text}))
    else:
        click.echo(cid.text)


@template.command("show")
@click.argument("cid")
@click.pass_obj
@domain_errors
def template_show(obj: Context, cid):
    """Print the canonical template document for CID."""
    click.echo(obj.node.template_bytes(cid).decode("utf-8"))


@main.group()
def chain():
    """Inspect and verify the consent chain."""


@chain.command("verify")
@click.pass_obj
@domain_errors
def chain_verify(obj: Context):
    """Re-verify every hash, link, seal, and signature in the chain."""
    report = obj.node.ledger.validate_chain()
    if report.ok:
        click.echo(json.dumps({"ok": True}) if obj.as_json else "ok")
        return
    _fail("TAMPER", f"height={report.height} {report.reason}")


@chain.command("dump")
@click.pass_obj
@domain_errors
def chain_dump(obj: Context):
    """Emit the full chain, one canonical block record per line."""
    for line in obj.node.ledger.dump():
        click.echo(line)


@main.group()
def consent():
    """Query consent state."""


@consent.command("status")
@click.argument("wallet")
@click.argument("cid")
@click.pass_obj
@domain_errors
def consent_status(obj: Context, wallet, cid):
    """Per-question consent state of WALLET for template CID."""
    state, rows = obj.node.consent_status(wallet, cid)
    if obj.as_json:
        click.echo(json.dumps({
            "wallet": wallet,
            "template_cid": cid,
            "as_of": state.as_of,
            "per_question": {q: d.value for q, d in state.per_question.items()},
            "history": [
                {"tx_id": tx.tx_id, "action": tx.action.value,
                 "height": h, "timestamp": ts}
                for tx, h, ts in rows
            ],
        }, sort_keys=True))
        return
    for qid in sorted(state.per_question, key=lambda q: int(q[1:])):
        click.echo(f"{qid} {state.per_question[qid].value}")


@main.group()
def vault():
    """Manage the off-chain identity vault."""


@vault.command("erase")
@click.argument("subject_id")
@click.pass_obj
@domain_errors
def vault_erase(obj: Context, subject_id):
    """Crypto-shred every identity link of SUBJECT_ID."""
    count = obj.node.erase_subject(subject_id, actor="CONTROLLER")
    if obj.as_json:
        click.echo(json.dumps({"unlinked": count}))
    else:
        click.echo(f"unlinked {count} wallet(s)")


@main.command()
@click.argument("kind", type=click.Choice(["wallet", "authority"]))
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Write the secret key hex to this file instead of stdout.")
@click.pass_obj
def keygen(obj: Context, kind, out):
    """Generate an Ed25519 keypair for a wallet or the sealing authority."""
    pair = KeyPair.generate()
    info = {"public_key": pair.public.hex()}
    if kind == "wallet":
        info["address"] = pair.address
    if out:
        Path(out).write_text(pair.secret.hex() + "\n")
        info["secret_key_path"] = out
    else:
        info["secret_key"] = pair.secret.hex()
    if obj.as_json:
        click.echo(json.dumps(info, sort_keys=True))
    else:
        for key, value in info.items():
            click.echo(f"{key}: {value}")


if __name__ == "__main__":
    main()
