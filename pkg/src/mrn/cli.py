"""Command-line entry point: ``mrn parse|graph|train|eval|locate|synth``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from collections import Counter
from pathlib import Path
from typing import Optional, Sequence

from .errors import MrnError
from .frontend import list_functions, parse_source
from .graph import build_mrng, serialize_graph, to_dot

log = logging.getLogger("mrn")


def _write(target: Optional[str], text: str) -> None:
    if target in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(target).write_text(text, encoding="utf-8")


def _seed(flag: Optional[int]) -> int:
    if flag is not None:
        return flag
    env = os.environ.get("MRN_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise MrnError(f"MRN_SEED must be an integer, got {env!r}") from None
    return 0


def cmd_parse(args) -> int:
    ast = parse_source(Path(args.file).read_bytes(), args.file)
    if args.emit_ast:
        _write(args.emit_ast, ast.dumps())
    if args.emit_ast != "-":
        for fn in list_functions(ast):
            print(f"{fn.contract}.{fn.name or '<fallback>'}/{fn.arity}")
    return 0


def cmd_graph(args) -> int:
    path = Path(args.file)
    mrng = build_mrng(parse_source(path.read_bytes(), str(path)), contract=path.stem)
    if args.out or not args.dot:
        out = serialize_graph(mrng)
        if args.out in (None, "-"):
            sys.stdout.buffer.write(out)
        else:
            Path(args.out).write_bytes(out)
    if args.dot:
        _write(args.dot, to_dot(mrng))
    return 0


def cmd_train(args) -> int:
    from .harness import TrainingConfig, evaluate, load_dataset, split_dataset, train_model
    from .model import ModelConfig, save_checkpoint

    seed = _seed(args.seed)
    samples = load_dataset(args.manifest)
    tcfg = TrainingConfig(
        epochs=args.epochs,
        batch_size=args.batch,
        learning_rate=args.lr,
        momentum=args.momentum,
        seed=seed,
        pos_weight=args.pos_weight,
        min_frequency=args.min_frequency,
    )
    train, val, test = split_dataset(samples, tcfg.ratios, seed)
    mcfg = ModelConfig(no_self_attention=args.no_self_attention, no_nested=args.no_nested)

    def report(e):
        val_f1 = "-" if e.val_f1 is None else f"{e.val_f1:.4f}"
        print(f"epoch {e.epoch:3d}  loss {e.train_loss:.6f}  train_acc {e.train_accuracy:.4f}  val_f1 {val_f1}", flush=True)

    result = train_model(train, val, mcfg, tcfg, on_epoch=None if args.quiet else report)
    ckpt = result.checkpoint
    classes = Counter(s.vuln_class for s in samples)
    ckpt.metadata["class"] = classes.most_common(1)[0][0]
    ckpt.metadata["split"] = {"train": len(train), "validation": len(val), "test": len(test)}
    if test:
        ckpt.metadata["test_metrics"] = evaluate(ckpt.model, test).to_json()
    save_checkpoint(ckpt, args.out)
    if args.log:
        Path(args.log).write_text(json.dumps([e.to_json() for e in result.log], indent=1) + "\n", encoding="utf-8")
    print(f"saved {args.out} (best epoch {result.best_epoch})")
    return 0


def cmd_eval(args) -> int:
    from .harness import evaluate, load_dataset
    from .model import load_checkpoint

    ckpt = load_checkpoint(args.model)
    report = evaluate(ckpt.model, load_dataset(args.manifest), args.threshold)
    print(json.dumps(report.to_json(), indent=1, sort_keys=True))
    if args.roc_csv:
        if report.roc is None:
            raise MrnError("ROC undefined: the manifest labels contain a single class")
        with open(args.roc_csv, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["fpr", "tpr"])
            writer.writerows(report.roc)
    return 0


def cmd_locate(args) -> int:
    from .harness.locate import exit_code, locate
    from .model import load_checkpoint

    report = locate(args.file, load_checkpoint(args.model), args.threshold)
    text = json.dumps(report, indent=1, sort_keys=True) + "\n"
    if args.json:
        _write(args.json, text)
    if args.json != "-":
        for f in report["functions"]:
            mark = "VULNERABLE" if f["verdict"] else "ok"
            print(f"{f['span']['start_line']:5d}  {f['name']}/{f['arity']}  p={f['probability']:.4f}  {mark}")
    return exit_code(report)


def cmd_synth(args) -> int:
    from .harness.synth import generate_corpus

    print(generate_corpus(args.out, args.n, _seed(args.seed)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mrn", description="Locate vulnerable functions in Solidity contracts.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse a source file and list its functions")
    p.add_argument("file")
    p.add_argument("--emit-ast", metavar="FILE", help="write the normalized AST as JSON ('-' for stdout)")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("graph", help="build the contract graph (mrn-graph/1 JSON)")
    p.add_argument("file")
    p.add_argument("--out", metavar="FILE", help="JSON output (default stdout)")
    p.add_argument("--dot", metavar="FILE", help="also write Graphviz DOT")
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("train", help="train a model on a labeled manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, metavar="CKPT")
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--batch", type=int, default=32)
    p.add_argument("--lr", type=float, default=0.002)
    p.add_argument("--momentum", type=float, default=0.0005)
    p.add_argument("--seed", type=int, default=None, help="defaults to $MRN_SEED, then 0")
    p.add_argument("--pos-weight", type=float, default=None, help="weight of positive labels in the loss")
    p.add_argument("--min-frequency", type=int, default=2, help="vocabulary cut-off for node labels")
    p.add_argument("--no-self-attention", action="store_true")
    p.add_argument("--no-nested", action="store_true")
    p.add_argument("--log", metavar="FILE", help="write the per-epoch log as JSON")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on a labeled manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--model", required=True, metavar="CKPT")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--roc-csv", metavar="FILE")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("locate", help="report per-function verdicts for one file")
    p.add_argument("file")
    p.add_argument("--model", required=True, metavar="CKPT")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--json", metavar="FILE", help="write the JSON report ('-' for stdout)")
    p.set_defaults(func=cmd_locate)

    p = sub.add_parser("synth", help="generate the synthetic arithmetic corpus")
    p.add_argument("--out", required=True, metavar="DIR")
    p.add_argument("--n", type=int, default=60)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except (MrnError, OSError, ValueError) as exc:
        print(f"mrn: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
