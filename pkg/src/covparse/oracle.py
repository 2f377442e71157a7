"""Dynamic oracle for the Covington system.

The loss of a configuration is the least number of gold arcs that any
completion must miss.  A gold arc is *individually reachable* when it is
already built or can still be built on its own; the loss is the number of
gold arcs that are not, plus the number of cycles in the graph formed by
the built arcs together with the reachable ones (each cycle forces one
more miss).  :func:`brute_force_loss` computes the same quantity by
exhaustive search and serves as the referee in tests.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Protocol, Sequence

from .transition import (
    ARC_KINDS,
    KINDS,
    Configuration,
    Kind,
    apply,
    is_final,
    legal_transitions,
)
from .treebank import Arc, GoldTree

__all__ = [
    "LossReport",
    "ExplorationPolicy",
    "arc_reachable",
    "loss",
    "zero_cost_transitions",
    "oracle_label",
    "brute_force_loss",
    "explore_next",
    "BRUTE_FORCE_MAX_N",
]

BRUTE_FORCE_MAX_N = 7
_PLACEHOLDER = "_"


@dataclass(frozen=True)
class LossReport:
    loss: int
    unreachable: tuple[Arc, ...] = ()
    cycles: int = 0

    def __int__(self) -> int:
        return self.loss

    def __str__(self) -> str:
        arcs = ",".join(f"{a.head}->{a.dep}" for a in self.unreachable)
        return f"loss={self.loss} unreachable=[{arcs}] cycles={self.cycles}"


def _reachable(c: Configuration, head: int, dep: int) -> bool:
    if c.heads[dep] == head:
        return True
    if not c.beta or c.heads[dep] >= 0:
        return False
    left, right = (head, dep) if head < dep else (dep, head)
    j = c.beta[0]
    if right < j:
        return False
    if right == j and left not in c.lambda1:
        return False
    return not c.has_path(dep, head)


def arc_reachable(c: Configuration, a: Arc) -> bool:
    """Whether gold arc ``a`` is in A or can still be added from ``c``."""
    return _reachable(c, a.head, a.dep)


def _check_sizes(c: Configuration, gold: GoldTree) -> None:
    if gold.n != c.n:
        raise ValueError(f"configuration has {c.n} words but the gold tree has {gold.n}")


def loss(c: Configuration, gold: GoldTree) -> LossReport:
    _check_sizes(c, gold)
    n = c.n
    union = list(c.heads)
    unreachable = []
    for a in gold.arcs:
        if _reachable(c, a.head, a.dep):
            if union[a.dep] < 0:
                union[a.dep] = a.head
        else:
            unreachable.append(a)
    # every node has at most one head in the union graph, so cycles are
    # vertex-disjoint and found by walking head links
    color = [0] * (n + 1)
    cycles = 0
    for start in range(1, n + 1):
        if color[start]:
            continue
        node = start
        while node >= 0 and color[node] == 0:
            color[node] = start + 1
            node = union[node]
        if node >= 0 and color[node] == start + 1:
            cycles += 1
        node = start
        while node >= 0 and color[node] == start + 1:
            color[node] = -1
            node = union[node]
    return LossReport(len(unreachable) + cycles, tuple(unreachable), cycles)


def zero_cost_transitions(c: Configuration, gold: GoldTree) -> set[Kind]:
    """Legal transitions whose application leaves the loss unchanged."""
    if is_final(c):
        raise ValueError("zero-cost transitions are undefined for a final configuration")
    base = loss(c, gold).loss
    return {
        k for k in legal_transitions(c) if loss(apply(c, k, _PLACEHOLDER), gold).loss == base
    }


def oracle_label(c: Configuration, gold: GoldTree, kind: Kind, fallback: str | None = None) -> str | None:
    """Label to attach to the arc that ``kind`` would create in ``c``.

    The gold label when the arc is a gold arc; otherwise the dependent's own
    gold label, and ``fallback`` if the dependent is unknown to ``gold``.
    """
    if kind not in ARC_KINDS:
        raise ValueError(f"{kind!r} does not create an arc")
    i, j = c.lambda1[-1], c.beta[0]
    head, dep = (j, i) if kind == Kind.LEFT_ARC else (i, j)
    if not 1 <= dep <= gold.n:
        return fallback
    arc = gold.arc_for(dep)
    if arc.head == head:
        return arc.label
    return arc.label if arc.label is not None else fallback


def brute_force_loss(c: Configuration, gold: GoldTree, prune: bool = True) -> int:
    """Minimum number of gold arcs missed over every legal completion of ``c``.

    Exhaustive depth-first search with memoisation.  With ``prune`` a
    non-gold arc is never built: it moves the focus words exactly like
    NO_ARC (or, when ``i`` is 0, like the SHIFT that must follow it) while
    only adding constraints, so it can never do better.
    """
    _check_sizes(c, gold)
    if c.n > BRUTE_FORCE_MAX_N:
        raise ValueError(f"brute force is limited to n <= {BRUTE_FORCE_MAX_N}")
    gold_heads = gold.heads
    memo: dict[tuple, int] = {}

    def missed(heads: Sequence[int]) -> int:
        return sum(1 for d in range(1, len(heads)) if heads[d] != gold_heads[d])

    def search(cfg: Configuration) -> int:
        if is_final(cfg):
            return missed(cfg.heads)
        key = (cfg.lambda1, cfg.lambda2, cfg.beta[0], cfg.heads)
        if key in memo:
            return memo[key]
        best = None
        i, j = cfg.i, cfg.j
        for k in legal_transitions(cfg):
            if prune and k in ARC_KINDS:
                head, dep = (j, i) if k == Kind.LEFT_ARC else (i, j)
                if gold_heads[dep] != head:
                    continue
            value = search(apply(cfg, k, _PLACEHOLDER))
            if best is None or value < best:
                best = value
                if best == 0:
                    break
        memo[key] = best
        return best

    return search(c)


@dataclass(frozen=True)
class ExplorationPolicy:
    """Aggressive exploration: with probability ``p_explore`` follow the best
    loss-increasing transition whenever it scores above the best zero-cost
    one minus ``margin``."""

    p_explore: float = 0.9
    margin: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.p_explore <= 1.0:
            raise ValueError("p_explore must lie in [0, 1]")


class _Rng(Protocol):
    def random(self) -> float: ...


def _argmax(scores: Mapping[Kind, float], candidates) -> Kind | None:
    best = None
    for k in KINDS:  # fixed order breaks ties
        if k in candidates and k in scores and (best is None or scores[k] > scores[best]):
            best = k
    return best


def explore_next(
    scores: Mapping[Kind, float] | Sequence[float],
    zero_cost: set[Kind],
    policy: ExplorationPolicy,
    rng: _Rng,
    legal: set[Kind] | None = None,
) -> Kind:
    """Choose the transition to follow during training.

    ``scores`` maps transition kinds to model scores (or is a length-4
    sequence in :class:`Kind` order); only ``legal`` kinds are considered,
    defaulting to the mapping's keys.
    """
    if not zero_cost:
        raise ValueError("empty zero-cost set")
    if not isinstance(scores, Mapping):
        scores = {k: float(scores[k]) for k in KINDS}
        if legal is None:
            legal = set(zero_cost) | set(KINDS)
    if legal is None:
        legal = set(scores)
    best_correct = _argmax(scores, zero_cost)
    best_wrong = _argmax(scores, legal - zero_cost)
    if best_correct is None:
        raise ValueError("no score for any zero-cost transition")
    if best_wrong is None or policy.p_explore <= 0.0:
        return best_correct
    if scores[best_wrong] > scores[best_correct] - policy.margin and rng.random() < policy.p_explore:
        return best_wrong
    return best_correct
