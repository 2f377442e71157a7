"""Covington's non-projective transition system.

A configuration is ``(lambda1, lambda2, beta, A)``.  The focus words are
``i``, the last element of ``lambda1``, and ``j``, the first element of
``beta``.  Every pair of words is compared once, so a sentence of ``n``
words needs at most ``n + n(n+1)/2`` transitions.

Configurations are immutable; :func:`apply` returns a new one.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, NamedTuple

from .treebank import Arc, GoldTree

__all__ = [
    "Kind",
    "KINDS",
    "Transition",
    "Configuration",
    "IllegalTransition",
    "initial_config",
    "is_final",
    "legal_transitions",
    "apply",
    "static_oracle",
    "run",
]


class Kind(enum.IntEnum):
    # the integer value is the output row of the transition scorer
    LEFT_ARC = 0
    RIGHT_ARC = 1
    SHIFT = 2
    NO_ARC = 3


KINDS = tuple(Kind)
ARC_KINDS = frozenset({Kind.LEFT_ARC, Kind.RIGHT_ARC})


class Transition(NamedTuple):
    kind: Kind
    label: str | None = None

    def __str__(self) -> str:
        return self.kind.name if self.label is None else f"{self.kind.name}:{self.label}"


class IllegalTransition(ValueError):
    pass


@dataclass(frozen=True)
class Configuration:
    """Parser state.

    ``heads[k]`` is the head of node k in A (``-1`` when unattached) and
    ``labels[k]`` its label.  ``beta`` is always the contiguous suffix
    ``j..n``.
    """

    lambda1: tuple[int, ...]
    lambda2: tuple[int, ...]
    beta: tuple[int, ...]
    heads: tuple[int, ...]
    labels: tuple[str | None, ...]

    @property
    def n(self) -> int:
        return len(self.heads) - 1

    @property
    def i(self) -> int | None:
        return self.lambda1[-1] if self.lambda1 else None

    @property
    def j(self) -> int | None:
        return self.beta[0] if self.beta else None

    @property
    def arcs(self) -> frozenset[Arc]:
        return frozenset(
            Arc(h, lab, d) for d, (h, lab) in enumerate(zip(self.heads, self.labels)) if h >= 0  # type: ignore[arg-type]
        )

    def has_path(self, src: int, dst: int) -> bool:
        """Whether A contains a directed path ``src ->* dst`` (length >= 1).

        Walks head links upward from ``dst``; each node has at most one head.
        """
        node = self.heads[dst]
        steps = 0
        while node >= 0 and steps <= self.n:
            if node == src:
                return True
            node = self.heads[node]
            steps += 1
        return False

    def check(self) -> None:
        """Assert the structural invariants (partition, ordering, acyclic A)."""
        n = self.n
        seen = sorted(self.lambda1 + self.lambda2 + self.beta)
        assert seen == list(range(n + 1)), f"not a partition of 0..{n}: {self}"
        for lst in (self.lambda1, self.lambda2):
            assert all(a < b for a, b in zip(lst, lst[1:])), f"unsorted list in {self}"
        if self.beta:
            assert self.beta == tuple(range(self.beta[0], n + 1))
            assert max(self.lambda1 + self.lambda2, default=-1) < self.beta[0]
        assert self.heads[0] == -1, "root has a head"
        for d in range(1, n + 1):
            assert not self.has_path(d, d), f"cycle through {d}"

    def __str__(self) -> str:
        arcs = " ".join(
            f"{h}-{lab}->{d}" for d, (h, lab) in enumerate(zip(self.heads, self.labels)) if h >= 0
        )

        def fmt(xs):
            return "[" + ",".join(map(str, xs)) + "]"

        return f"{fmt(self.lambda1)} | {fmt(self.lambda2)} | {fmt(self.beta)} | {{{arcs}}}"


def initial_config(n: int) -> Configuration:
    if n < 1:
        raise ValueError("sentence length must be >= 1")
    return Configuration((0,), (), tuple(range(1, n + 1)), (-1,) * (n + 1), (None,) * (n + 1))


def is_final(c: Configuration) -> bool:
    return not c.beta


def _violation(c: Configuration, kind: Kind) -> str | None:
    """Name of the first precondition ``kind`` violates in ``c``, or None."""
    if not c.beta:
        return "buffer is empty"
    if kind == Kind.SHIFT:
        return None
    if not c.lambda1:
        return "lambda1 is empty"
    i, j = c.lambda1[-1], c.beta[0]
    if kind == Kind.NO_ARC:
        return "i must be > 0" if i == 0 else None
    if kind == Kind.LEFT_ARC:
        if i == 0:
            return "i must be > 0"
        if c.heads[i] >= 0:
            return f"{i} already has a head"
        if c.has_path(i, j):
            return f"path {i} ->* {j} would close a cycle"
        return None
    if c.heads[j] >= 0:
        return f"{j} already has a head"
    if c.has_path(j, i):
        return f"path {j} ->* {i} would close a cycle"
    return None


def legal_transitions(c: Configuration) -> set[Kind]:
    if is_final(c):
        raise IllegalTransition("no transition is legal in a final configuration")
    return {k for k in KINDS if _violation(c, k) is None}


def apply(c: Configuration, t: Transition | Kind, label: str | None = None) -> Configuration:
    """Apply a transition; raises :class:`IllegalTransition` naming the failed precondition."""
    if isinstance(t, Transition):
        kind, label = t.kind, t.label
    else:
        kind = Kind(t)
    why = _violation(c, kind)
    if why is not None:
        raise IllegalTransition(f"{kind.name} is illegal: {why}")
    if kind == Kind.SHIFT:
        return Configuration(
            c.lambda1 + c.lambda2 + c.beta[:1], (), c.beta[1:], c.heads, c.labels
        )
    i, j = c.lambda1[-1], c.beta[0]
    lambda1, lambda2 = c.lambda1[:-1], (i,) + c.lambda2
    if kind == Kind.NO_ARC:
        return Configuration(lambda1, lambda2, c.beta, c.heads, c.labels)
    if label is None:
        raise IllegalTransition(f"{kind.name} needs a label")
    head, dep = (j, i) if kind == Kind.LEFT_ARC else (i, j)
    heads = list(c.heads)
    labels = list(c.labels)
    heads[dep] = head
    labels[dep] = label
    return Configuration(lambda1, lambda2, c.beta, tuple(heads), tuple(labels))


def run(n: int, transitions: Iterable[Transition]) -> Configuration:
    c = initial_config(n)
    for t in transitions:
        c = apply(c, t)
    return c


def static_oracle(tree: GoldTree) -> list[Transition]:
    """Canonical transition sequence building exactly ``tree``.

    At each step: build the gold arc between the focus words if there is
    one; otherwise skip ``i`` with NO_ARC while some word further left in
    lambda1 still has an unbuilt gold arc with ``j``; otherwise SHIFT.
    """
    gold_heads = tree.heads
    gold_labels = tree.labels
    c = initial_config(tree.n)
    out: list[Transition] = []
    while not is_final(c):
        j = c.beta[0]
        t = None
        if c.lambda1:
            i = c.lambda1[-1]
            if gold_heads[i] == j and c.heads[i] < 0:
                t = Transition(Kind.LEFT_ARC, gold_labels[i])
            elif gold_heads[j] == i and c.heads[j] < 0:
                t = Transition(Kind.RIGHT_ARC, gold_labels[j])
            elif any(
                (gold_heads[k] == j and c.heads[k] < 0) or (gold_heads[j] == k and c.heads[j] < 0)
                for k in c.lambda1[:-1]
            ):
                t = Transition(Kind.NO_ARC)
        if t is None:
            t = Transition(Kind.SHIFT)
        if t.kind in ARC_KINDS and _violation(c, t.kind) is not None:
            raise IllegalTransition(f"gold arc not buildable at {c}")
        out.append(t)
        c = apply(c, t)
    return out
