import random

import pytest

from conftest import random_tree
from covparse.transition import (
    KINDS,
    Configuration,
    IllegalTransition,
    Kind,
    Transition,
    apply,
    initial_config,
    is_final,
    legal_transitions,
    run,
    static_oracle,
)
from covparse.treebank import GoldTree

LA, RA, SH, NA = Kind.LEFT_ARC, Kind.RIGHT_ARC, Kind.SHIFT, Kind.NO_ARC


def cfg(l1, l2, beta, arcs=(), n=None):
    n = n if n is not None else max([*l1, *l2, *beta, 0])
    heads = [-1] * (n + 1)
    labels = [None] * (n + 1)
    for arc in arcs:
        h, d = arc[0], arc[1]
        heads[d] = h
        labels[d] = arc[2] if len(arc) > 2 else "x"
    return Configuration(tuple(l1), tuple(l2), tuple(beta), tuple(heads), tuple(labels))


def test_initial_config():
    assert initial_config(3) == cfg([0], [], [1, 2, 3])
    assert initial_config(1) == cfg([0], [], [1])
    with pytest.raises(ValueError):
        initial_config(0)
    for n in range(1, 8):
        assert not is_final(initial_config(n))


def test_is_final():
    assert is_final(cfg([0, 1], [], [], n=1))
    assert not is_final(initial_config(2))


def test_debug_rendering():
    c = apply(initial_config(2), Transition(RA, "root"))
    assert str(c) == "[] | [0] | [1,2] | {0-root->1}"


def test_legal_at_initial():
    assert legal_transitions(initial_config(2)) == {RA, SH}


def test_only_shift_with_empty_lambda1():
    assert legal_transitions(cfg([], [0], [1, 2])) == {SH}


def test_single_head_blocks_right_arc():
    c = apply(initial_config(3), Transition(RA, "root"))  # 0 -> 1
    c = apply(c, SH)
    c = apply(c, NA)  # lambda1 = [0], j = 2
    c = apply(c, RA, "x")  # 0 -> 2
    c = apply(c, SH)  # lambda1=[0,1,2], j=3
    c = apply(c, RA, "x")  # 2 -> 3
    c = apply(c, NA)  # i = 1, j = 3 already headed
    assert RA not in legal_transitions(c)
    assert legal_transitions(c) == _brute_legal(c)


def test_final_has_no_legal_transitions():
    with pytest.raises(IllegalTransition):
        legal_transitions(cfg([0, 1], [], [], n=1))


def test_apply_examples():
    assert apply(cfg([0], [], [1, 2]), Transition(RA, "root")) == cfg([], [0], [1, 2], [(0, 1, "root")])
    assert apply(cfg([], [0], [1, 2], [(0, 1)]), SH) == cfg([0, 1], [], [2], [(0, 1)])
    assert apply(cfg([0, 1], [], [2], [(0, 1)]), NA) == cfg([0], [1], [2], [(0, 1)])
    with pytest.raises(IllegalTransition, match="i must be > 0"):
        apply(cfg([0], [], [2], n=2), NA)
    with pytest.raises(IllegalTransition, match="needs a label"):
        apply(initial_config(1), RA)


def test_left_arc_adds_reverse_arc():
    c = apply(cfg([0, 1], [], [2]), Transition(LA, "nsubj"))
    assert c.heads == (-1, 2, -1)
    assert c.labels[1] == "nsubj"
    assert c.lambda1 == (0,) and c.lambda2 == (1,)


def test_apply_is_pure():
    c = initial_config(3)
    snapshot = (c.lambda1, c.lambda2, c.beta, c.heads, c.labels)
    a = apply(c, Transition(RA, "root"))
    b = apply(c, Transition(RA, "root"))
    assert a == b
    assert (c.lambda1, c.lambda2, c.beta, c.heads, c.labels) == snapshot


def test_cycle_precondition():
    # A has 2 -> 1; i = 1, j = 2: LEFT_ARC 2 -> 1 blocked by headedness,
    # RIGHT_ARC 1 -> 2 would close the cycle 1 -> 2 -> 1
    c = cfg([0, 1], [], [2, 3], [(2, 1)], n=3)
    legal = legal_transitions(c)
    assert LA not in legal and RA not in legal
    with pytest.raises(IllegalTransition, match="cycle"):
        apply(c, RA, "x")


# --- static oracle -------------------------------------------------------------


def test_static_oracle_n1():
    tree = GoldTree.from_heads([0], ["root"])
    assert static_oracle(tree) == [Transition(RA, "root"), Transition(SH)]


def test_static_oracle_n2_chain():
    # hand-traced: RA(0->1), SHIFT, RA(1->2), SHIFT (nothing left between 0 and 2)
    tree = GoldTree.from_heads([0, 1], ["root", "d"])
    seq = static_oracle(tree)
    assert seq == [Transition(RA, "root"), Transition(SH), Transition(RA, "d"), Transition(SH)]
    assert run(2, seq).arcs == set(tree.arcs)


def test_static_oracle_crossing_tree():
    # 1 -> 3 and 2 -> 4 cross
    tree = GoldTree.from_heads([0, 1, 1, 2], ["root", "a", "b", "c"])
    final = run(4, static_oracle(tree))
    assert final.arcs == set(tree.arcs)


# --- brute-force reference and properties ------------------------------------


def _brute_path(arcs, src, dst):
    frontier, seen = [src], {src}
    while frontier:
        node = frontier.pop()
        for h, d in arcs:
            if h == node and d not in seen:
                if d == dst:
                    return True
                seen.add(d)
                frontier.append(d)
    return False


def _brute_legal(c):
    arcs = [(h, d) for d, h in enumerate(c.heads) if h >= 0]
    headed = {d for _, d in arcs}
    out = {SH}
    if c.lambda1:
        i, j = c.lambda1[-1], c.beta[0]
        if i > 0:
            out.add(NA)
            if i not in headed and not _brute_path(arcs, i, j):
                out.add(LA)
        if j not in headed and not _brute_path(arcs, j, i):
            out.add(RA)
    return out


def test_random_walks_sound_and_bounded():
    rng = random.Random(5)
    for _ in range(400):
        n = rng.randint(1, 9)
        c = initial_config(n)
        steps = 0
        while not is_final(c):
            legal = legal_transitions(c)
            assert legal == _brute_legal(c)
            c = apply(c, rng.choice(sorted(legal)), "x")
            c.check()
            steps += 1
        assert steps <= n + n * (n + 1) // 2
        assert sum(1 for h in c.heads if h >= 0) <= n


def test_static_oracle_completeness_random():
    rng = random.Random(3)
    for _ in range(1000):
        tree = random_tree(rng, rng.randint(1, 10))
        final = run(tree.n, static_oracle(tree))
        assert final.arcs == set(tree.arcs)


def test_kind_order_is_scorer_order():
    assert [int(k) for k in KINDS] == [0, 1, 2, 3]
    assert [k.name for k in KINDS] == ["LEFT_ARC", "RIGHT_ARC", "SHIFT", "NO_ARC"]
