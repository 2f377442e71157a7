import itertools

import pytest

from covparse.evaluation import EvaluationError, Score, evaluate, macro_average, universal
from covparse.treebank import loads


def sentence(heads, labels, sent_id="s1"):
    rows = [f"# sent_id = {sent_id}"]
    for k, (h, d) in enumerate(zip(heads, labels), 1):
        rows.append(f"{k}\tw{k}\tw{k}\tX\t_\t_\t{h}\t{d}\t_\t_")
    return loads("\n".join(rows) + "\n\n")[0]


GOLD_HEADS = [2, 0, 2, 5, 2, 5, 8, 6, 2, 2]
GOLD_LABELS = ["nsubj", "root", "obj", "case", "obl", "nmod", "det", "nmod", "advmod", "punct"]


def test_identity_is_perfect(fixture_sentences):
    score = evaluate(fixture_sentences, fixture_sentences)
    assert (score.las, score.uas) == (100.0, 100.0)
    assert score.total == sum(s.n for s in fixture_sentences)


def test_one_wrong_label_in_ten():
    gold = sentence(GOLD_HEADS, GOLD_LABELS)
    labels = list(GOLD_LABELS)
    labels[2] = "iobj"
    score = evaluate([sentence(GOLD_HEADS, labels)], [gold])
    assert (score.uas, score.las) == (100.0, 90.0)


def test_one_wrong_head_in_ten():
    gold = sentence(GOLD_HEADS, GOLD_LABELS)
    heads = list(GOLD_HEADS)
    heads[8] = 3
    score = evaluate([sentence(heads, GOLD_LABELS)], [gold])
    assert (score.uas, score.las) == (90.0, 90.0)
    assert score.summary() == "LAS=90.00 UAS=90.00 N=10"


def test_subtype_modes():
    gold = sentence([0, 1], ["root", "obl"])
    system = sentence([0, 1], ["root", "obl:agent"])
    assert evaluate([system], [gold]).las == 100.0
    assert evaluate([system], [gold], exact_labels=True).las == 50.0
    assert universal("obl:agent") == "obl" and universal("obl") == "obl" and universal(None) is None


def test_correct_label_on_wrong_head_is_not_counted():
    gold = sentence([0, 1, 1], ["root", "obj", "punct"])
    system = sentence([0, 1, 2], ["root", "obj", "punct"])
    assert evaluate([system], [gold]).las == pytest.approx(200 / 3)


def test_mismatched_segmentation_names_the_sentence():
    gold = sentence([0, 1], ["root", "obj"], sent_id="doc-7")
    system = sentence([0], ["root"], sent_id="doc-7")
    with pytest.raises(EvaluationError, match="doc-7"):
        evaluate([system], [gold])
    with pytest.raises(EvaluationError):
        evaluate([gold, gold], [gold])


def test_macro_average():
    avg = macro_average({"a": Score(80.0, 90.0, 9, 8, 10), "b": Score(60.0, 70.0, 7, 6, 10)})
    assert (avg.las, avg.uas, avg.total) == (70.0, 80.0, 20)
    single = Score(55.5, 60.0, 6, 5, 9)
    assert macro_average({"x": single}) == single
    with pytest.raises(EvaluationError):
        macro_average({})


def test_macro_average_is_order_invariant():
    scores = [Score(v, v, 0, 0, 1) for v in (33.3, 66.7, 12.1, 99.9, 0.1)]
    results = {
        macro_average({str(k): s for k, s in enumerate(perm)}).las
        for perm in itertools.permutations(scores)
    }
    assert len(results) == 1
