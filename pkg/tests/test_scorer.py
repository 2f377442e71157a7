import io

import numpy as np
import pytest

from covparse.neural import autograd as ag
from covparse.scorer import (
    NONE,
    PAD,
    UNK,
    ExternalEmbeddings,
    Hyperparams,
    Model,
    _word_inputs,
    build_vocab,
    encode_sentence,
    feature_slots,
    feature_vector,
    load_external_embeddings,
    score_labels,
    score_transitions,
)
from covparse.transition import Kind, apply, initial_config
from covparse.treebank import loads

TWO = """# sent_id = a
1\tThe\tthe\tDET\tDT\tDefinite=Def\t2\tdet\t_\t_
2\tdog\tdog\tNOUN\tNN\tNumber=Sing\t3\tnsubj\t_\t_
3\tbarks\tbark\tVERB\tVBZ\t_\t0\troot\t_\t_

# sent_id = b
1\tThe\tthe\tDET\tDT\tDefinite=Def\t2\tdet\t_\t_
2\tcat\tcat\tNOUN\tNN\tNumber=Sing\t0\troot\t_\t_

"""

SMALL = dict(dim_word=6, dim_upos=3, dim_xpos=3, dim_feats=3, dim_external=4,
             bilstm_out=8, mlp_hidden=5, epochs=1)


def small_model(sentences, seed=0, external=None, **kw):
    hyper = Hyperparams(**{**SMALL, **kw})
    return Model.init(hyper, build_vocab(sentences, hyper.min_count), np.random.default_rng(seed), external)


def test_hyperparams_defaults():
    h = Hyperparams()
    assert (h.dim_word, h.dim_upos, h.dim_xpos, h.dim_feats, h.dim_external) == (100, 25, 25, 25, 100)
    assert (h.bilstm_out, h.bilstm_layers, h.epochs, h.mlp_hidden) == (512, 2, 30, 100)
    assert (h.window_beta, h.window_lambda1, h.window_lambda2_left, h.window_lambda2_right) == (1, 3, 1, 1)
    assert h.slots == 6
    assert Hyperparams.from_dict(h.to_dict()) == h


def test_hyperparams_validation():
    with pytest.raises(ValueError):
        Hyperparams(bilstm_out=7)
    with pytest.raises(ValueError):
        Hyperparams(dim_word=0)
    with pytest.raises(ValueError):
        Hyperparams.from_dict({"dim_wrod": 3})


def test_vocabulary_shared_word_counted_once():
    vocab = build_vocab(loads(TWO))
    assert vocab.words[:2] == [PAD, UNK]
    assert vocab.words.count("The") == 1
    assert vocab.count("The") == 2
    assert vocab.word_id("The") == vocab.words.index("The")
    assert vocab.word_id("unseen") == 1
    assert vocab.labels == ["det", "root", "nsubj"]
    assert vocab.most_frequent_label == "det"


def test_min_count_maps_rare_words_to_unk():
    sents = loads(TWO)
    vocab = build_vocab(sents, min_count=2)
    assert vocab.word_id("The") > 1
    assert all(vocab.word_id(w) == 1 for w in ("dog", "barks", "cat"))
    everything_once = build_vocab(sents[:1], min_count=2)
    assert all(everything_once.word_id(t.form) == 1 for t in sents[0].tokens)


def test_unannotated_feats():
    text = "1\tHi\thi\tINTJ\t_\t_\t0\troot\t_\t_\n\n"
    vocab = build_vocab(loads(text))
    assert vocab.feats == [UNK, NONE]
    assert vocab.tag_id(vocab.feats_index, "_") == 1
    assert vocab.tag_id(vocab.upos_index, "NOUN") == 0


def test_vocab_round_trip_and_empty_corpus():
    vocab = build_vocab(loads(TWO))
    again = type(vocab).from_dict(vocab.to_dict())
    assert again.to_dict() == vocab.to_dict()
    with pytest.raises(ValueError):
        build_vocab([])


def test_input_dimensions():
    sents = loads(TWO)
    vocab = build_vocab(sents)
    rng = np.random.default_rng(0)
    assert Model.init(Hyperparams(bilstm_layers=1, bilstm_out=8), vocab, rng).input_dim == 175
    ext = ExternalEmbeddings(["dog"], np.ones((1, 100)))
    assert Model.init(Hyperparams(bilstm_layers=1, bilstm_out=8), vocab, rng, ext).input_dim == 275
    bare = Model.init(Hyperparams(bilstm_layers=1, bilstm_out=8, use_xpos=False, use_feats=False), vocab, rng)
    assert bare.input_dim == 125
    assert bare.xpos_table is None and bare.feats_table is None


def test_external_dimension_mismatch():
    with pytest.raises(ValueError):
        small_model(loads(TWO), external=ExternalEmbeddings(["dog"], np.ones((1, 3))))


def test_external_lookup_falls_back_to_lowercase():
    ext = ExternalEmbeddings(["the", "Dog"], np.array([[1.0, 1.0], [2.0, 2.0]]))
    assert ext.vector("The").tolist() == [1.0, 1.0]
    assert ext.vector("Dog").tolist() == [2.0, 2.0]
    assert ext.vector("dog").tolist() == [0.0, 0.0]


def test_load_external_embeddings():
    text = "3 2\nthe 0.1 0.2\ndog 1 2\nthe 9 9\n"
    ext = load_external_embeddings(io.StringIO(text), 2)
    assert ext.words == ["the", "dog"]
    assert ext.vector("the").tolist() == [0.1, 0.2]
    with pytest.raises(ValueError):
        load_external_embeddings(io.StringIO("the 1 2 3\n"), 2)
    with pytest.raises(ValueError):
        load_external_embeddings(io.StringIO("5 3\nthe 1 2 3\n"), 2)
    with pytest.raises(ValueError):
        load_external_embeddings(io.StringIO(""), 2)


def test_feature_slots_initial():
    h = Hyperparams()
    # beta first, then lambda1 (padded at the front), lambda2 left, lambda2 right
    assert feature_slots(initial_config(3), h) == [1, None, None, 0, None, None]


def test_feature_slots_single_lambda2_word_fills_both_ends():
    c = apply(apply(initial_config(2), Kind.SHIFT), Kind.NO_ARC)  # ([0], [1], [2])
    assert feature_slots(c, Hyperparams()) == [2, None, None, 0, 1, 1]


def test_feature_slots_wider_windows():
    c = apply(apply(apply(initial_config(4), Kind.SHIFT), Kind.SHIFT), Kind.NO_ARC)
    h = Hyperparams(window_beta=2, window_lambda1=2, window_lambda2_left=0, window_lambda2_right=2)
    assert feature_slots(c, h) == [3, 4, 0, 1, None, 2]


def test_encode_and_feature_vector_sizes():
    sents = loads(TWO)
    model = small_model(sents)
    contexts = encode_sentence(model, sents[0])
    assert len(contexts) == 4 and all(v.shape == (8,) for v in contexts)
    h = feature_vector(contexts, initial_config(3), model)
    assert h.shape == (8 * 6,)
    np.testing.assert_array_equal(h.value[8:16], model.pad.value)
    np.testing.assert_array_equal(h.value[:8], contexts[1].value)
    assert score_transitions(model, h).shape == (4,)
    assert score_labels(model, h).shape == (len(model.vocab.labels),)


def test_default_feature_length():
    sents = loads(TWO)
    hyper = Hyperparams(dim_word=4, dim_upos=2, dim_xpos=2, dim_feats=2, bilstm_layers=1, mlp_hidden=2)
    model = Model.init(hyper, build_vocab(sents), np.random.default_rng(0))
    with ag.no_grad():
        contexts = encode_sentence(model, sents[1])
        assert feature_vector(contexts, initial_config(2), model).shape == (6 * 512,)


def test_encode_errors():
    sents = loads(TWO)
    model = small_model(sents)
    with pytest.raises(ValueError):
        encode_sentence(model, sents[0], train_mode=True)


def test_encoding_is_deterministic_without_dropout():
    sents = loads(TWO)
    model = small_model(sents)
    a = encode_sentence(model, sents[0])
    b = encode_sentence(model, sents[0])
    assert all(np.array_equal(x.value, y.value) for x, y in zip(a, b))


def test_word_dropout_rate():
    # a word seen once is dropped with probability alpha / (alpha + 1) = 0.2
    sents = loads(TWO)
    model = small_model(sents)
    rng = np.random.default_rng(0)
    trials = 4000
    dropped = 0
    unk = model.word_table.value[1]
    for _ in range(trials):
        vec = _word_inputs(model, sents[0], True, rng)[2]
        dropped += np.array_equal(vec.value[:6], unk)
    assert abs(dropped / trials - 0.2) < 0.03


def test_zero_output_layer_scores_tie():
    sents = loads(TWO)
    model = small_model(sents)
    model.transition_mlp.w2.value[:] = 0.0
    with ag.no_grad():
        h = feature_vector(encode_sentence(model, sents[0]), initial_config(3), model)
        assert np.all(score_transitions(model, h).value == 0.0)


def test_scores_respond_to_features():
    sents = loads(TWO)
    model = small_model(sents)
    h = ag.constant(np.random.default_rng(1).normal(size=48))
    base = score_transitions(model, h).value
    for k in (0, 17, 47):
        bumped = h.value.copy()
        bumped[k] += 0.5
        assert not np.allclose(score_transitions(model, ag.constant(bumped)).value, base)


def test_single_label_corpus():
    text = "1\tHi\thi\tINTJ\t_\t_\t0\troot\t_\t_\n\n"
    model = small_model(loads(text))
    assert model.label_mlp.output_dim == 1


def test_named_parameters_order_is_stable():
    sents = loads(TWO)
    names = [n for n, _ in small_model(sents).named_parameters()]
    assert names == [n for n, _ in small_model(sents, seed=5).named_parameters()]
    assert names[0] == "embed.word" and names[-1] == "pad"
    assert len(set(names)) == len(names)
