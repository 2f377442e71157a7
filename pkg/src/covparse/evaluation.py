"""Attachment scores (LAS/UAS) over gold-segmented CoNLL-U."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .treebank import Sentence

__all__ = ["Score", "EvaluationError", "evaluate", "macro_average", "universal"]


class EvaluationError(ValueError):
    pass


@dataclass(frozen=True)
class Score:
    las: float
    uas: float
    correct_heads: int = 0
    correct_labeled: int = 0
    total: int = 0

    def summary(self) -> str:
        return f"LAS={self.las:.2f} UAS={self.uas:.2f} N={self.total}"

    def __str__(self) -> str:
        return self.summary()


def universal(deprel: str | None) -> str | None:
    """``obl:agent`` -> ``obl``."""
    return deprel if deprel is None else deprel.split(":", 1)[0]


def evaluate(system: Sequence[Sentence], gold: Sequence[Sentence], exact_labels: bool = False) -> Score:
    """Word-level LAS/UAS.  Both sides must share the same segmentation.

    Labels are compared on their universal part (before ``:``) unless
    ``exact_labels`` is set.
    """
    if len(system) != len(gold):
        raise EvaluationError(f"system has {len(system)} sentences, gold has {len(gold)}")
    heads_ok = labeled_ok = total = 0
    for k, (sys_s, gold_s) in enumerate(zip(system, gold), start=1):
        if sys_s.n != gold_s.n:
            sid = next((c for c in gold_s.comments if c.startswith("# sent_id")), f"sentence {k}")
            raise EvaluationError(f"{sid}: system has {sys_s.n} words, gold has {gold_s.n}")
        for st, gt in zip(sys_s.tokens, gold_s.tokens):
            total += 1
            if st.head is not None and st.head == gt.head:
                heads_ok += 1
                if exact_labels:
                    same = st.deprel == gt.deprel
                else:
                    same = universal(st.deprel) == universal(gt.deprel)
                if same:
                    labeled_ok += 1
    if total == 0:
        return Score(0.0, 0.0)
    return Score(100.0 * labeled_ok / total, 100.0 * heads_ok / total, heads_ok, labeled_ok, total)


def macro_average(scores: Mapping[str, Score]) -> Score:
    """Unweighted mean of per-treebank LAS and UAS (counts are summed)."""
    if not scores:
        raise EvaluationError("nothing to average")
    values = list(scores.values())
    k = len(values)
    return Score(
        math.fsum(s.las for s in values) / k,
        math.fsum(s.uas for s in values) / k,
        sum(s.correct_heads for s in values),
        sum(s.correct_labeled for s in values),
        sum(s.total for s in values),
    )
