import itertools
import random
from pathlib import Path

import numpy as np
import pytest

from covparse.treebank import GoldTree, TreeError, read_conllu

DATA = Path(__file__).parent / "data"
FIXTURE = DATA / "en_fixture.conllu"
ROUNDTRIP = sorted((DATA / "roundtrip").glob("*.conllu"))
LABELS = ("nsubj", "obj", "obl", "det", "amod", "root")


def random_tree(rng: random.Random, n: int, labels=LABELS) -> GoldTree:
    """Uniform over labeled trees on 0..n (rejection sampling on head vectors)."""
    while True:
        heads = [rng.randrange(n + 1) for _ in range(n)]
        if any(h == d for d, h in enumerate(heads, 1)):
            continue
        try:
            return GoldTree.from_heads(heads, [rng.choice(labels) for _ in range(n)])
        except TreeError:
            continue


def all_trees(n: int):
    """Every unlabeled tree over 0..n, in lexicographic head-vector order."""
    for heads in itertools.product(range(n + 1), repeat=n):
        try:
            yield GoldTree.from_heads(heads)
        except TreeError:
            pass


@pytest.fixture(scope="session")
def fixture_sentences():
    with open(FIXTURE, "rb") as f:
        return read_conllu(f)


def numeric_gradient(f, tensor, eps: float = 1e-6):
    """Central differences of the scalar ``f()`` with respect to ``tensor.value``."""
    grad = np.zeros_like(tensor.value)
    flat, gflat = tensor.value.reshape(-1), grad.reshape(-1)
    for k in range(flat.size):
        old = flat[k]
        flat[k] = old + eps
        hi = float(f().value)
        flat[k] = old - eps
        lo = float(f().value)
        flat[k] = old
        gflat[k] = (hi - lo) / (2 * eps)
    return grad


def relative_error(a, b) -> float:
    denom = max(np.linalg.norm(a) + np.linalg.norm(b), 1e-12)
    return float(np.linalg.norm(a - b) / denom)


def gradient_errors(f, tensors) -> list[float]:
    """Relative error between backprop and central differences, per tensor."""
    for t in tensors:
        t.grad = None
    f().backward()
    analytic = [np.zeros_like(t.value) if t.grad is None else t.grad.copy() for t in tensors]
    return [relative_error(a, numeric_gradient(f, t)) for a, t in zip(analytic, tensors)]


def project(outputs, rng):
    """A random linear scalar of a list of vectors, so every output component matters."""
    from covparse.neural import autograd as ag

    weights = [ag.constant(rng.normal(size=(1, o.shape[0]))) for o in outputs]
    return lambda outs: ag.total(ag.pick(ag.matvec(w, o), 0) for w, o in zip(weights, outs))


def random_forest(rng: random.Random, n: int, min_roots: int = 2) -> list[int]:
    """Acyclic head vector over 1..n with at least ``min_roots`` words on node 0."""
    while True:
        heads = [rng.randrange(n + 1) for _ in range(n)]
        if sum(h == 0 for h in heads) >= min_roots and _acyclic(heads):
            return heads


def _acyclic(heads) -> bool:
    for start in range(1, len(heads) + 1):
        seen, node = set(), start
        while node != 0:
            if node in seen:
                return False
            seen.add(node)
            node = heads[node - 1]
    return True


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line for an acceptance criterion; the lines are printed at the end."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def record(name: str, ok: bool, detail: str) -> bool:
        line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"
        print(line)
        lines.append(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
