"""Synthetic arithmetic-vulnerability corpus.

Half of the contracts debit a balance without checking it first (the
withdraw-like function is labeled 1); the other half guard the subtraction
with ``require`` or ``if`` (labeled 0). Identifier names and filler
functions are drawn from shared pools so that names carry no label signal.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Union

import numpy as np

MAPS = ("balances", "funds", "credit", "deposits", "ledger", "stake", "shares", "holdings")
AMOUNTS = ("amount", "value", "qty", "wad", "sum", "units")
TEMPS = ("left", "rest", "remaining", "newBalance", "after")
WITHDRAWS = ("withdraw", "take", "redeem", "pull", "claim", "cashOut")
DEPOSITS = ("deposit", "fund", "topUp", "addFunds", "put")
GETTERS = ("balanceOf", "creditOf", "fundsOf", "getBalance")
WHO = ("owner", "who", "account", "user")
STAMPS = ("lastUpdate", "updatedAt", "touched", "stamp")
CONTRACTS = ("Bank", "Vault", "Wallet", "Purse", "Treasury", "Escrow", "Fund", "Safe")


def _debit(rng, m: str, a: str) -> list[str]:
    variant = rng.integers(3)
    if variant == 0:
        return [f"{m}[msg.sender] -= {a};"]
    if variant == 1:
        t = rng.choice(TEMPS)
        return [f"uint {t} = {m}[msg.sender] - {a};", f"{m}[msg.sender] = {t};"]
    return [f"{m}[msg.sender] = {m}[msg.sender] - {a};"]


def contract_source(rng: np.random.Generator, vulnerable: bool, index: int) -> tuple[str, list[dict]]:
    m, a = rng.choice(MAPS), rng.choice(AMOUNTS)
    body = _debit(rng, m, a) + [f"msg.sender.transfer({a});"]
    if not vulnerable:
        guard = rng.integers(3)
        if guard == 0:
            body = [f"require({m}[msg.sender] >= {a});"] + body
        elif guard == 1:
            body = [f"require({a} <= {m}[msg.sender]);"] + body
        else:
            body = [f"if ({m}[msg.sender] >= {a}) {{"] + ["    " + s for s in body] + ["}"]
    w, d = rng.choice(WITHDRAWS), rng.choice(DEPOSITS)
    name = f"{rng.choice(CONTRACTS)}{index}"
    lines = [f"contract {name} {{", f"    mapping(address => uint) {m};"]
    funcs = []
    stamp = rng.choice(STAMPS) if rng.random() < 0.5 else None
    if stamp:
        lines.append(f"    uint public {stamp};")
    lines += ["", f"    function {d}() public payable {{", f"        {m}[msg.sender] += msg.value;"]
    if stamp:
        lines.append(f"        {stamp} = block.timestamp;")
    lines.append("    }")
    funcs.append({"name": d, "arity": 0, "label": 0})
    lines += ["", f"    function {w}(uint {a}) public {{"] + ["        " + s for s in body] + ["    }"]
    funcs.append({"name": w, "arity": 1, "label": int(vulnerable)})
    if rng.random() < 0.6:
        g, who = rng.choice(GETTERS), rng.choice(WHO)
        lines += [
            "",
            f"    function {g}(address {who}) public view returns (uint) {{",
            f"        return {m}[{who}];",
            "    }",
        ]
        funcs.append({"name": g, "arity": 1, "label": 0})
    lines.append("}")
    return "\n".join(lines) + "\n", funcs


def generate_corpus(out_dir: Union[str, Path], n: int = 60, seed: int = 0) -> Path:
    """Write ``n`` contracts (half vulnerable) and ``manifest.jsonl`` into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    flags = rng.permutation([True] * (n // 2) + [False] * (n - n // 2))
    rows = []
    for i, vulnerable in enumerate(flags):
        source, funcs = contract_source(rng, bool(vulnerable), i)
        path = out / f"c{i:03d}.sol"
        path.write_text(source, encoding="utf-8")
        rows.append({"path": path.name, "class": "arithmetic", "functions": funcs})
    manifest = out / "manifest.jsonl"
    manifest.write_text("".join(json.dumps(r, sort_keys=True) + "\n" for r in rows), encoding="utf-8")
    return manifest
