"""Reverse-mode differentiation over float64 numpy arrays.

Every operation on :class:`Tensor` values records its inputs and a closure
that pushes the output gradient back to them.  :meth:`Tensor.backward`
replays the recorded graph in reverse topological order.  The graph is
rebuilt from scratch for every example, which suits a parser whose
computation depends on the transitions it takes.
"""
from __future__ import annotations

import contextlib
import threading
from typing import Callable, Iterable, Sequence

import numpy as np

__all__ = [
    "Tensor",
    "parameter",
    "constant",
    "no_grad",
    "grad_enabled",
    "add",
    "sub",
    "mul",
    "matvec",
    "tanh",
    "sigmoid",
    "relu",
    "concat",
    "lookup",
    "slice_",
    "pick",
    "total",
]

# per thread, so parallel parsing under no_grad cannot switch training off
_state = threading.local()


def grad_enabled() -> bool:
    return getattr(_state, "enabled", True)


@contextlib.contextmanager
def no_grad():
    """Evaluate without recording a graph (in the current thread)."""
    saved = grad_enabled()
    _state.enabled = False
    try:
        yield
    finally:
        _state.enabled = saved


class Tensor:
    __slots__ = ("value", "grad", "requires_grad", "_parents", "_backward", "name")

    def __init__(self, value, requires_grad: bool = False, name: str | None = None):
        self.value = np.asarray(value, dtype=np.float64)
        self.requires_grad = requires_grad
        self.grad: np.ndarray | None = None
        self._parents: tuple[Tensor, ...] = ()
        self._backward: Callable[[np.ndarray], None] | None = None
        self.name = name

    @property
    def shape(self) -> tuple[int, ...]:
        return self.value.shape

    def __len__(self) -> int:
        return len(self.value)

    def __repr__(self) -> str:
        label = f" {self.name!r}" if self.name else ""
        return f"<Tensor{label} shape={self.shape}>"

    def zero_grad(self) -> None:
        self.grad = None

    def _accumulate(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.array(g, dtype=np.float64)
        else:
            self.grad += g

    def backward(self) -> None:
        """Propagate d(self)/d(x) into ``.grad`` of every parameter reachable from self.

        ``self`` must be a scalar (shape ``()`` or ``(1,)``).
        """
        if self.value.size != 1:
            raise ValueError("backward() needs a scalar output")
        order: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in seen:
                    stack.append((p, False))
        grads: dict[int, np.ndarray] = {id(self): np.ones_like(self.value)}
        for node in reversed(order):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if node._backward is None:
                node._accumulate(g)
                continue
            for parent, pg in zip(node._parents, node._backward(g)):
                if pg is None or not (parent.requires_grad or parent._parents):
                    continue
                if id(parent) in grads:
                    grads[id(parent)] = grads[id(parent)] + pg
                else:
                    grads[id(parent)] = pg


def parameter(value, name: str | None = None) -> Tensor:
    return Tensor(value, requires_grad=True, name=name)


def constant(value) -> Tensor:
    return Tensor(value, requires_grad=False)


def _tracks(*xs: Tensor) -> bool:
    return grad_enabled() and any(x.requires_grad or x._parents for x in xs)


def _node(value: np.ndarray, parents: Sequence[Tensor], backward) -> Tensor:
    out = Tensor.__new__(Tensor)
    out.value = value
    out.grad = None
    out.requires_grad = False
    out.name = None
    if _tracks(*parents):
        out._parents = tuple(parents)
        out._backward = backward
    else:
        out._parents = ()
        out._backward = None
    return out


def add(*xs: Tensor) -> Tensor:
    value = xs[0].value
    for x in xs[1:]:
        value = value + x.value
    return _node(value, xs, lambda g: [g] * len(xs))


def sub(a: Tensor, b: Tensor) -> Tensor:
    return _node(a.value - b.value, (a, b), lambda g: (g, -g))


def mul(a: Tensor, b: Tensor) -> Tensor:
    return _node(a.value * b.value, (a, b), lambda g: (g * b.value, g * a.value))


def matvec(w: Tensor, x: Tensor) -> Tensor:
    """``W @ x`` for a matrix ``W`` and vector ``x``."""
    if w.value.ndim != 2 or x.value.ndim != 1 or w.value.shape[1] != x.value.shape[0]:
        raise ValueError(f"matvec shape mismatch: {w.shape} @ {x.shape}")
    return _node(w.value @ x.value, (w, x), lambda g: (np.outer(g, x.value), w.value.T @ g))


def tanh(x: Tensor) -> Tensor:
    y = np.tanh(x.value)
    return _node(y, (x,), lambda g: (g * (1.0 - y * y),))


def sigmoid(x: Tensor) -> Tensor:
    y = 0.5 * (1.0 + np.tanh(0.5 * x.value))
    return _node(y, (x,), lambda g: (g * y * (1.0 - y),))


def relu(x: Tensor) -> Tensor:
    mask = x.value > 0
    return _node(np.where(mask, x.value, 0.0), (x,), lambda g: (g * mask,))


def concat(xs: Sequence[Tensor]) -> Tensor:
    xs = tuple(xs)
    sizes = [x.value.shape[0] for x in xs]
    bounds = np.cumsum([0] + sizes)

    def backward(g):
        return [g[bounds[k]:bounds[k + 1]] for k in range(len(xs))]

    return _node(np.concatenate([x.value for x in xs]), xs, backward)


def lookup(table: Tensor, index: int) -> Tensor:
    """Row ``index`` of an embedding table."""

    def backward(g):
        if table._parents:
            full = np.zeros_like(table.value)
            full[index] = g
            return (full,)
        # leaf table: write the row straight into its gradient instead of
        # materialising a dense table-sized array per lookup
        if table.grad is None:
            table.grad = np.zeros_like(table.value)
        table.grad[index] += g
        return (None,)

    return _node(table.value[index].copy(), (table,), backward)


def slice_(x: Tensor, lo: int, hi: int) -> Tensor:
    size = x.value.shape[0]

    def backward(g):
        full = np.zeros(size)
        full[lo:hi] = g
        return (full,)

    return _node(x.value[lo:hi], (x,), backward)


def pick(x: Tensor, k: int) -> Tensor:
    """Scalar element ``x[k]`` as a shape-``()`` tensor."""
    size = x.value.shape[0]

    def backward(g):
        full = np.zeros(size)
        full[k] = g
        return (full,)

    return _node(np.asarray(x.value[k]), (x,), backward)


def total(xs: Iterable[Tensor]) -> Tensor:
    """Sum of scalar tensors."""
    xs = tuple(xs)
    if not xs:
        return constant(0.0)
    value = np.asarray(sum(float(x.value) for x in xs))
    return _node(value, xs, lambda g: [g] * len(xs))
