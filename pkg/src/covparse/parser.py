"""Training with the dynamic oracle, greedy decoding and single-root repair."""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .evaluation import evaluate
from .neural import autograd as ag
from .neural.optim import Adam
from .oracle import ExplorationPolicy, explore_next, oracle_label, zero_cost_transitions
from .scorer import Model, encode_sentence, feature_vector, score_labels, score_transitions
from .transition import ARC_KINDS, KINDS, Kind, apply, initial_config, legal_transitions
from .treebank import GoldTree, Sentence

__all__ = [
    "TrainConfig",
    "EpochStats",
    "Parse",
    "train",
    "parse_sentence",
    "parse_sentences",
    "postprocess_single_root",
]

log = logging.getLogger(__name__)

ROOT_LABEL = "root"


@dataclass(frozen=True)
class TrainConfig:
    seed: int = 1
    explore_from_epoch: int = 2
    hinge_margin: float = 1.0
    train_eval_sample: int = 100
    checkpoint_every: int = 0
    extra_root_label: str = "parataxis"


@dataclass
class EpochStats:
    epoch: int
    loss: float
    train_las: float
    dev_las: float | None = None
    updates: int = 0
    explored: int = 0

    def __str__(self) -> str:
        dev = "" if self.dev_las is None else f" dev_las={self.dev_las:.2f}"
        return (f"epoch={self.epoch} loss={self.loss:.4f} train_las={self.train_las:.2f}{dev} "
                f"updates={self.updates} explored={self.explored}")


class Parse(NamedTuple):
    heads: list[int]
    deprels: list[str]
    transitions: int


def _argmax(values: np.ndarray, candidates: Sequence[int]) -> int:
    best = None
    for k in candidates:
        if best is None or values[k] > values[best]:
            best = k
    return best  # type: ignore[return-value]


def postprocess_single_root(heads: Sequence[int], upos: Sequence[str]) -> list[int]:
    """Leave exactly one word attached to the root.

    ``heads[k]`` is the head of word ``k + 1``.  Among the words headed by
    0, the first VERB (or, failing that, the first such word) is kept and
    every other one is reattached to it.
    """
    roots = [k + 1 for k, h in enumerate(heads) if h == 0]
    if not roots:
        raise ValueError("no word is attached to the root")
    out = list(heads)
    if len(roots) > 1:
        keep = roots[0]
        for r in roots:
            if upos[r - 1] == "VERB":
                keep = r
                break
        for r in roots:
            if r != keep:
                out[r - 1] = keep
    return out


def _decode(model: Model, sentence: Sentence) -> tuple[list[int], list[str | None], int]:
    n = sentence.n
    labels = model.vocab.labels
    with ag.no_grad():
        contexts = encode_sentence(model, sentence, train_mode=False)
        c = initial_config(n)
        steps = 0
        while c.beta:
            legal = legal_transitions(c)
            if legal == {Kind.SHIFT}:
                kind = Kind.SHIFT
                label = None
            else:
                h = feature_vector(contexts, c, model)
                scores = score_transitions(model, h).value
                kind = Kind(_argmax(scores, [k for k in KINDS if k in legal]))
                label = None
                if kind in ARC_KINDS:
                    label = labels[int(np.argmax(score_labels(model, h).value))]
            c = apply(c, kind, label)
            steps += 1
    return list(c.heads[1:]), list(c.labels[1:]), steps


def parse_sentence(model: Model, sentence: Sentence, extra_root_label: str = "parataxis") -> Parse:
    """Greedy parse followed by single-root repair.

    Words left without a head are attached to node 0 before the repair;
    the surviving root word is labelled ``root`` and reattached former roots
    get ``extra_root_label``.
    """
    heads, deprels, steps = _decode(model, sentence)
    for k, h in enumerate(heads):
        if h < 0:
            heads[k] = 0
            deprels[k] = ROOT_LABEL
    upos = [t.upos for t in sentence.tokens]
    fixed = postprocess_single_root(heads, upos)
    for k, (before, after) in enumerate(zip(heads, fixed)):
        if after == 0:
            deprels[k] = ROOT_LABEL
        elif before == 0:
            deprels[k] = extra_root_label
    return Parse(fixed, deprels, steps)  # type: ignore[arg-type]


def parse_sentences(
    model: Model, sentences: Sequence[Sentence], jobs: int = 1, extra_root_label: str = "parataxis"
) -> list[Sentence]:
    """Parse many sentences; output order always matches input order."""

    def one(sentence: Sentence) -> Sentence:
        p = parse_sentence(model, sentence, extra_root_label)
        return sentence.with_parse(p.heads, p.deprels)

    if jobs <= 1:
        return [one(s) for s in sentences]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(one, sentences))


def _sentence_loss(
    model: Model,
    sentence: Sentence,
    gold: GoldTree,
    policy: ExplorationPolicy,
    margin: float,
    rng: np.random.Generator,
) -> tuple[ag.Tensor | None, int]:
    """Walk one sentence with the dynamic oracle; return the summed hinge terms."""
    vocab = model.vocab
    fallback = vocab.most_frequent_label
    contexts = encode_sentence(model, sentence, train_mode=True, rng=rng)
    c = initial_config(sentence.n)
    terms: list[ag.Tensor] = []
    explored = 0
    while c.beta:
        legal = legal_transitions(c)
        if legal == {Kind.SHIFT}:
            c = apply(c, Kind.SHIFT)
            continue
        h = feature_vector(contexts, c, model)
        scores = score_transitions(model, h)
        values = {k: float(scores.value[k]) for k in legal}
        zero_cost = zero_cost_transitions(c, gold)
        wrong = legal - zero_cost
        best_correct = max(zero_cost, key=lambda k: (values[k], -k))
        if wrong:
            best_wrong = max(wrong, key=lambda k: (values[k], -k))
            if margin + values[best_wrong] - values[best_correct] > 0:
                terms.append(ag.relu(ag.add(
                    ag.sub(ag.pick(scores, best_wrong), ag.pick(scores, best_correct)),
                    ag.constant(margin),
                )))
        kind = explore_next(values, zero_cost, policy, rng, legal)
        if kind not in zero_cost:
            explored += 1
        label = None
        if kind in ARC_KINDS:
            label = oracle_label(c, gold, kind, fallback)
            gold_k = vocab.label_index[label]
            label_scores = score_labels(model, h)
            ls = label_scores.value
            if len(ls) > 1:
                others = [k for k in range(len(ls)) if k != gold_k]
                rival = _argmax(ls, others)
                if margin + ls[rival] - ls[gold_k] > 0:
                    terms.append(ag.relu(ag.add(
                        ag.sub(ag.pick(label_scores, rival), ag.pick(label_scores, gold_k)),
                        ag.constant(margin),
                    )))
        c = apply(c, kind, label)
    if not terms:
        return None, explored
    return ag.total(terms), explored


def train(
    model: Model,
    corpus: Sequence[tuple[Sentence, GoldTree]] | Sequence[Sentence],
    cfg: TrainConfig = TrainConfig(),
    dev: Sequence[Sentence] | None = None,
    on_epoch: Callable[[EpochStats, Model], None] | None = None,
    epochs: int | None = None,
) -> list[EpochStats]:
    """Train ``model`` in place and return per-epoch statistics.

    One optimizer step per sentence.  Exploration is switched on from
    ``cfg.explore_from_epoch``.  ``dev`` sentences are only parsed for
    reporting and never produce a gradient.
    """
    pairs = [item if isinstance(item, tuple) else (item, GoldTree.from_sentence(item)) for item in corpus]
    if not pairs:
        raise ValueError("empty training corpus")
    hyper = model.hyper
    epochs = hyper.epochs if epochs is None else epochs
    rng = np.random.default_rng(cfg.seed)
    optimizer = Adam(model.parameters(), lr=hyper.learning_rate)
    history: list[EpochStats] = []
    for epoch in range(1, epochs + 1):
        explore = epoch >= cfg.explore_from_epoch
        policy = ExplorationPolicy(hyper.p_explore if explore else 0.0, hyper.explore_margin)
        total_loss = 0.0
        explored = 0
        updates_before = optimizer.t
        for idx in rng.permutation(len(pairs)):
            sentence, gold = pairs[idx]
            loss, n_explored = _sentence_loss(model, sentence, gold, policy, cfg.hinge_margin, rng)
            explored += n_explored
            if loss is None:
                continue
            total_loss += float(loss.value)
            loss.backward()
            optimizer.step()
        sample = pairs
        if cfg.train_eval_sample and len(pairs) > cfg.train_eval_sample:
            chosen = np.sort(rng.choice(len(pairs), cfg.train_eval_sample, replace=False))
            sample = [pairs[k] for k in chosen]
        gold_sents = [s for s, _ in sample]
        train_las = evaluate(parse_sentences(model, gold_sents, extra_root_label=cfg.extra_root_label),
                             gold_sents).las
        dev_las = None
        if dev:
            steps = optimizer.t
            dev_las = evaluate(parse_sentences(model, dev, extra_root_label=cfg.extra_root_label), dev).las
            assert optimizer.t == steps, "dev evaluation must not update the model"
        stats = EpochStats(epoch, total_loss, train_las, dev_las, optimizer.t - updates_before, explored)
        log.info("%s", stats)
        history.append(stats)
        if on_epoch is not None:
            on_epoch(stats, model)
    return history
