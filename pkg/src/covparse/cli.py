"""Command line: ``covparse {train,parse,eval,merge-treebanks}``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 model error.
Set ``COVPARSE_LOG`` to ``error``, ``info`` or ``debug`` for log verbosity.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .evaluation import EvaluationError, Score, evaluate, macro_average
from .parser import TrainConfig, parse_sentences, train
from .scorer import Hyperparams, Model, build_vocab, load_external_embeddings
from .serialization import ModelFormatError, load_model, save_model
from .treebank import ConlluError, GoldTree, Sentence, TreeError, read_conllu, write_conllu

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_MODEL = 0, 1, 2, 3

log = logging.getLogger("covparse")


class DataError(Exception):
    pass


class ModelError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read(path: str | Path, strict: bool = True) -> list[Sentence]:
    try:
        with open(path, "rb") as f:
            return read_conllu(f, strict=strict)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from None
    except (ConlluError, UnicodeDecodeError) as exc:
        raise DataError(f"{path}: {exc}") from None


def _load(path: str) -> Model:
    try:
        return load_model(path)
    except OSError as exc:
        raise ModelError(f"cannot read model {path}: {exc.strerror}") from None
    except (ModelFormatError, ValueError, KeyError) as exc:
        raise ModelError(f"{path}: {exc}") from None


# --- train -------------------------------------------------------------------

_HYPER_FLAGS = {
    "epochs": int,
    "bilstm_out": int,
    "bilstm_layers": int,
    "dim_word": int,
    "dim_upos": int,
    "dim_xpos": int,
    "dim_feats": int,
    "dim_external": int,
    "mlp_hidden": int,
    "p_explore": float,
    "learning_rate": float,
    "word_dropout_alpha": float,
    "min_count": int,
}


def resolve_hyperparams(args: argparse.Namespace) -> Hyperparams:
    """Flags override the config file, which overrides the defaults."""
    values: dict = {}
    if args.config:
        try:
            values.update(json.loads(Path(args.config).read_text(encoding="utf-8")))
        except OSError as exc:
            raise DataError(f"cannot read config {args.config}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise DataError(f"{args.config}: {exc}") from None
    for name in _HYPER_FLAGS:
        value = getattr(args, name, None)
        if value is not None:
            values[name] = value
    if args.no_xpos:
        values["use_xpos"] = False
    if args.no_feats:
        values["use_feats"] = False
    try:
        return Hyperparams.from_dict(values)
    except (TypeError, ValueError) as exc:
        raise DataError(f"bad hyperparameters: {exc}") from None


def cmd_train(args: argparse.Namespace) -> int:
    hyper = resolve_hyperparams(args)
    sentences = _read(args.train)
    try:
        pairs = [(s, GoldTree.from_sentence(s)) for s in sentences]
    except TreeError as exc:
        raise DataError(f"{args.train}: {exc}") from None
    if not pairs:
        raise DataError(f"{args.train}: no sentences")
    dev = _read(args.dev) if args.dev else None
    external = None
    if args.external_embeddings:
        try:
            with open(args.external_embeddings, encoding="utf-8") as f:
                external = load_external_embeddings(f, hyper.dim_external)
        except OSError as exc:
            raise DataError(f"cannot read {args.external_embeddings}: {exc.strerror}") from None
        except ValueError as exc:
            raise DataError(f"{args.external_embeddings}: {exc}") from None
    rng = np.random.default_rng(args.seed)
    model = Model.init(hyper, build_vocab(sentences, hyper.min_count), rng, external)
    cfg = TrainConfig(seed=args.seed, checkpoint_every=args.checkpoint_every)

    def on_epoch(stats, m):
        print(stats, flush=True)
        if cfg.checkpoint_every and stats.epoch % cfg.checkpoint_every == 0:
            save_model(m, f"{args.out}.epoch{stats.epoch}")

    train(model, pairs, cfg, dev=dev, on_epoch=on_epoch)
    save_model(model, args.out)
    log.info("model written to %s", args.out)
    return EXIT_OK


# --- parse -------------------------------------------------------------------


def cmd_parse(args: argparse.Namespace) -> int:
    model = _load(args.model)
    sentences = _read(args.input, strict=False)
    parsed = parse_sentences(model, sentences, jobs=args.jobs, extra_root_label=args.extra_root_label)
    with open(args.output, "wb") as f:
        write_conllu(parsed, f)
    return EXIT_OK


# --- eval --------------------------------------------------------------------


def cmd_eval(args: argparse.Namespace) -> int:
    if len(args.system) != len(args.gold):
        print("error: --system and --gold must be given the same number of times", file=sys.stderr)
        return EXIT_USAGE
    scores: dict[str, Score] = {}
    for sys_path, gold_path in zip(args.system, args.gold):
        try:
            score = evaluate(_read(sys_path, strict=False), _read(gold_path, strict=False), args.exact_labels)
        except EvaluationError as exc:
            raise DataError(f"{sys_path} vs {gold_path}: {exc}") from None
        scores[sys_path] = score
        if len(args.system) > 1:
            print(f"{sys_path}\t{score.summary()}")
    if len(scores) == 1:
        print(next(iter(scores.values())).summary())
    else:
        print(f"macro-average\t{macro_average(scores).summary()}")
    return EXIT_OK


# --- merge-treebanks ---------------------------------------------------------


def merge_treebanks(sources: Sequence[Sequence[Sentence]], take: int = 2000) -> list[Sentence]:
    """Concatenate the first ``take`` sentences of every source, in order."""
    merged: list[Sentence] = []
    for sentences in sources:
        merged.extend(sentences[:take])
    return merged


def model_las(model_path: str, sample: Sequence[Sentence]) -> float:
    model = _load(model_path)
    return evaluate(parse_sentences(model, sample), sample).las


def rank_sources(names: Sequence[str], scorer: Callable[[int], float]) -> list[tuple[str, float]]:
    """Sources sorted by decreasing score; ties keep argument order."""
    scored = [(name, scorer(k)) for k, name in enumerate(names)]
    return sorted(scored, key=lambda item: -item[1])


def cmd_merge_treebanks(args: argparse.Namespace) -> int:
    if args.rank:
        if not args.model or len(args.model) != len(args.source) or not args.sample:
            print("error: --rank needs --sample and one --model per --source", file=sys.stderr)
            return EXIT_USAGE
        sample = _read(args.sample)
        ranking = rank_sources(args.source, lambda k: model_las(args.model[k], sample))
        for name, las in ranking:
            print(f"{name}\tLAS={las:.2f}")
        return EXIT_OK
    if not args.out:
        print("error: --out is required unless --rank is given", file=sys.stderr)
        return EXIT_USAGE
    merged = merge_treebanks([_read(path) for path in args.source], args.take)
    with open(args.out, "wb") as f:
        write_conllu(merged, f)
    print(f"{len(merged)} sentences written to {args.out}")
    return EXIT_OK


# --- wiring ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="covparse", description="Covington dependency parser: train, parse, evaluate, merge treebanks.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="train a model on a gold CoNLL-U file")
    p.add_argument("--train", required=True)
    p.add_argument("--dev", help="reported after each epoch, never trained on")
    p.add_argument("--external-embeddings")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--config", help="JSON file with hyperparameter overrides")
    p.add_argument("--checkpoint-every", type=int, default=0, metavar="EPOCHS")
    for name, kind in _HYPER_FLAGS.items():
        flag = "--" + name.replace("_", "-")
        if name == "bilstm_out":
            p.add_argument(flag, type=int, choices=(512, 256), default=None)
        else:
            p.add_argument(flag, type=kind, default=None)
    p.add_argument("--no-xpos", action="store_true")
    p.add_argument("--no-feats", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("parse", help="parse a CoNLL-U file")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--extra-root-label", default="parataxis")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("eval", help="LAS/UAS of system output against gold")
    p.add_argument("--system", action="append", required=True)
    p.add_argument("--gold", action="append", required=True)
    p.add_argument("--exact-labels", action="store_true", help="compare full deprels including subtypes")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("merge-treebanks", help="merge the first N sentences of several treebanks")
    p.add_argument("--source", action="append", required=True)
    p.add_argument("--take", type=int, default=2000)
    p.add_argument("--out")
    p.add_argument("--rank", action="store_true", help="rank sources by the LAS of their models on --sample")
    p.add_argument("--model", action="append")
    p.add_argument("--sample")
    p.set_defaults(func=cmd_merge_treebanks)
    return parser


def _setup_logging() -> None:
    level = os.environ.get("COVPARSE_LOG", "error").upper()
    logging.basicConfig(level=getattr(logging, level, logging.ERROR), format="%(levelname)s %(name)s: %(message)s")


def main(argv: Sequence[str] | None = None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODEL


if __name__ == "__main__":
    sys.exit(main())
