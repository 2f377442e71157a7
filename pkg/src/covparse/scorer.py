"""Vocabularies, model parameters and the scoring path from words to transition scores.

Each word is embedded as the concatenation of its word, UPOS, XPOS, FEATS
and (optionally) external embeddings.  A stacked BiLSTM turns the sentence
into context vectors; a configuration is scored from the vectors of a few
words around the focus pair, fed to two perceptrons (transitions and
dependency labels).
"""
from __future__ import annotations

from collections import Counter
from dataclasses import asdict, dataclass, field, fields
from typing import IO, Iterable, Mapping, Sequence

import numpy as np

from .neural import autograd as ag
from .neural.autograd import Tensor, constant, parameter
from .neural.layers import BiLstmLayer, MlpParams, bilstm_encode, glorot, mlp_forward
from .transition import KINDS, Configuration
from .treebank import Sentence

__all__ = [
    "PAD",
    "UNK",
    "NONE",
    "Hyperparams",
    "Vocabulary",
    "ExternalEmbeddings",
    "Model",
    "build_vocab",
    "load_external_embeddings",
    "encode_sentence",
    "feature_vector",
    "score_transitions",
    "score_labels",
]

PAD = "<pad>"
UNK = "<unk>"
NONE = "<none>"


@dataclass(frozen=True)
class Hyperparams:
    dim_word: int = 100
    dim_upos: int = 25
    dim_xpos: int = 25
    dim_feats: int = 25
    dim_external: int = 100
    bilstm_out: int = 512
    bilstm_layers: int = 2
    epochs: int = 30
    # feature window: first x of beta, last y of lambda1, first z and last v of lambda2
    window_beta: int = 1
    window_lambda1: int = 3
    window_lambda2_left: int = 1
    window_lambda2_right: int = 1
    mlp_hidden: int = 100
    p_explore: float = 0.9
    explore_margin: float = 1.0
    word_dropout_alpha: float = 0.25
    min_count: int = 1
    use_xpos: bool = True
    use_feats: bool = True
    learning_rate: float = 0.001

    def __post_init__(self):
        for name in ("dim_word", "dim_upos", "dim_xpos", "dim_feats", "dim_external",
                     "bilstm_out", "bilstm_layers", "mlp_hidden", "window_beta"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        for name in ("window_lambda1", "window_lambda2_left", "window_lambda2_right", "epochs"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.bilstm_out % 2:
            raise ValueError("bilstm_out must be even (half per direction)")

    @property
    def slots(self) -> int:
        return self.window_beta + self.window_lambda1 + self.window_lambda2_left + self.window_lambda2_right

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping) -> "Hyperparams":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown hyperparameters: {sorted(unknown)}")
        return cls(**data)


class _Index:
    """Dense string -> int map; ``unk`` is returned for unknown keys."""

    def __init__(self, items: Sequence[str], unk: int | None):
        self.items = list(items)
        self.index = {s: k for k, s in enumerate(self.items)}
        if len(self.index) != len(self.items):
            raise ValueError("duplicate vocabulary entries")
        self.unk = unk

    def __len__(self) -> int:
        return len(self.items)

    def __contains__(self, key: str) -> bool:
        return key in self.index

    def __getitem__(self, key: str) -> int:
        k = self.index.get(key)
        if k is None:
            if self.unk is None:
                raise KeyError(key)
            return self.unk
        return k


@dataclass
class Vocabulary:
    """Index spaces for every input channel and for labels.

    Words: ``[PAD, UNK, ...]``.  Tag channels: ``[UNK, NONE, ...]`` where
    NONE stands for an unannotated (``_``) column.  Labels are closed, so
    they have no UNK entry.
    """

    words: list[str]
    word_counts: list[int]
    upos: list[str]
    xpos: list[str]
    feats: list[str]
    labels: list[str]
    label_counts: list[int]
    min_count: int = 1

    def __post_init__(self):
        self.word_index = _Index(self.words, unk=1)
        self.upos_index = _Index(self.upos, unk=0)
        self.xpos_index = _Index(self.xpos, unk=0)
        self.feats_index = _Index(self.feats, unk=0)
        self.label_index = _Index(self.labels, unk=None)

    def word_id(self, form: str) -> int:
        k = self.word_index[form]
        if k > 1 and self.word_counts[k] < self.min_count:
            return 1
        return k

    def count(self, form: str) -> int:
        k = self.word_index.index.get(form)
        return 0 if k is None else self.word_counts[k]

    @staticmethod
    def tag_id(index: _Index, value: str) -> int:
        return 1 if value == "_" else index[value]

    @property
    def most_frequent_label(self) -> str:
        return self.labels[int(np.argmax(self.label_counts))]

    def to_dict(self) -> dict:
        return {
            "words": self.words,
            "word_counts": self.word_counts,
            "upos": self.upos,
            "xpos": self.xpos,
            "feats": self.feats,
            "labels": self.labels,
            "label_counts": self.label_counts,
            "min_count": self.min_count,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "Vocabulary":
        return cls(**data)


def build_vocab(corpus: Iterable[Sentence], min_count: int = 1) -> Vocabulary:
    """Collect the vocabularies of a gold training corpus.

    Words below ``min_count`` keep their counts (word dropout needs them)
    but look up as UNK.
    """
    words: Counter[str] = Counter()
    upos: Counter[str] = Counter()
    xpos: Counter[str] = Counter()
    feats: Counter[str] = Counter()
    labels: Counter[str] = Counter()
    empty = True
    for sentence in corpus:
        empty = False
        for tok in sentence.tokens:
            words[tok.form] += 1
            for counter, value in ((upos, tok.upos), (xpos, tok.xpos), (feats, tok.feats)):
                if value != "_":
                    counter[value] += 1
            if tok.deprel is not None:
                labels[tok.deprel] += 1
    if empty:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    if not labels:
        raise ValueError("the corpus has no dependency labels")

    def ordered(counter: Counter) -> list[str]:
        # frequency first, then lexicographic: deterministic across runs
        items = sorted(counter.items(), key=lambda kv: (-kv[1], kv[0]))
        return [s for s, _ in items if s not in (PAD, UNK, NONE)]

    word_list = ordered(words)
    label_list = ordered(labels)
    return Vocabulary(
        words=[PAD, UNK] + word_list,
        word_counts=[0, 0] + [words[w] for w in word_list],
        upos=[UNK, NONE] + ordered(upos),
        xpos=[UNK, NONE] + ordered(xpos),
        feats=[UNK, NONE] + ordered(feats),
        labels=label_list,
        label_counts=[labels[s] for s in label_list],
        min_count=min_count,
    )


@dataclass
class ExternalEmbeddings:
    """Pretrained word vectors; kept frozen."""

    words: list[str]
    vectors: np.ndarray

    def __post_init__(self):
        self.index = {w: k for k, w in enumerate(self.words)}
        self.vectors = np.asarray(self.vectors, dtype=np.float64)
        self._zero = np.zeros(self.dim)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def vector(self, form: str) -> np.ndarray:
        k = self.index.get(form)
        if k is None:
            k = self.index.get(form.lower())
        return self._zero if k is None else self.vectors[k]


def load_external_embeddings(stream: IO[str], dim: int | None = None) -> ExternalEmbeddings:
    """Read ``word v1 ... vd`` lines, skipping an optional ``count dim`` header.

    Raises ``ValueError`` if a vector does not have ``dim`` components.
    """
    words: list[str] = []
    rows: list[list[float]] = []
    for lineno, line in enumerate(stream, start=1):
        parts = line.rstrip("\n").rstrip().split(" ")
        if not parts or parts == [""]:
            continue
        if lineno == 1 and len(parts) == 2 and all(p.isdigit() for p in parts):
            if dim is not None and int(parts[1]) != dim:
                raise ValueError(f"embedding file declares dimension {parts[1]}, expected {dim}")
            continue
        word, values = parts[0], parts[1:]
        if dim is None:
            dim = len(values)
        if len(values) != dim:
            raise ValueError(f"line {lineno}: vector has {len(values)} components, expected {dim}")
        words.append(word)
        rows.append([float(v) for v in values])
    if not words:
        raise ValueError("no vectors in embedding file")
    # first occurrence wins on duplicate words
    seen: dict[str, int] = {}
    keep = [k for k, w in enumerate(words) if seen.setdefault(w, k) == k]
    return ExternalEmbeddings([words[k] for k in keep], np.array([rows[k] for k in keep]))


@dataclass
class Model:
    hyper: Hyperparams
    vocab: Vocabulary
    word_table: Tensor
    upos_table: Tensor
    xpos_table: Tensor | None
    feats_table: Tensor | None
    root_input: Tensor
    stack: list[BiLstmLayer]
    transition_mlp: MlpParams
    label_mlp: MlpParams
    pad: Tensor
    external: ExternalEmbeddings | None = None
    _named: list[tuple[str, Tensor]] = field(default_factory=list, repr=False)

    @classmethod
    def init(
        cls,
        hyper: Hyperparams,
        vocab: Vocabulary,
        rng: np.random.Generator,
        external: ExternalEmbeddings | None = None,
    ) -> "Model":
        if external is not None and external.dim != hyper.dim_external:
            raise ValueError(
                f"external embeddings have dimension {external.dim}, expected {hyper.dim_external}"
            )
        word_table = parameter(glorot(rng, len(vocab.words), hyper.dim_word), "embed.word")
        upos_table = parameter(glorot(rng, len(vocab.upos), hyper.dim_upos), "embed.upos")
        xpos_table = (
            parameter(glorot(rng, len(vocab.xpos), hyper.dim_xpos), "embed.xpos") if hyper.use_xpos else None
        )
        feats_table = (
            parameter(glorot(rng, len(vocab.feats), hyper.dim_feats), "embed.feats") if hyper.use_feats else None
        )
        input_dim = _input_dim(hyper, external is not None)
        root_input = parameter(rng.uniform(-0.1, 0.1, size=input_dim), "embed.root")
        hidden = hyper.bilstm_out // 2
        stack = [
            BiLstmLayer.init(rng, input_dim if m == 0 else hyper.bilstm_out, hidden, f"bilstm{m}")
            for m in range(hyper.bilstm_layers)
        ]
        feat_dim = hyper.bilstm_out * hyper.slots
        transition_mlp = MlpParams.init(rng, feat_dim, hyper.mlp_hidden, len(KINDS), "mlp.transition")
        label_mlp = MlpParams.init(rng, feat_dim, hyper.mlp_hidden, len(vocab.labels), "mlp.label")
        pad = parameter(rng.uniform(-0.1, 0.1, size=hyper.bilstm_out), "pad")
        return cls(hyper, vocab, word_table, upos_table, xpos_table, feats_table, root_input,
                   stack, transition_mlp, label_mlp, pad, external)

    @property
    def input_dim(self) -> int:
        return _input_dim(self.hyper, self.external is not None)

    def named_parameters(self) -> list[tuple[str, Tensor]]:
        """Learnable tensors in a fixed order (the serialization order)."""
        tensors: list[Tensor] = [self.word_table, self.upos_table]
        if self.xpos_table is not None:
            tensors.append(self.xpos_table)
        if self.feats_table is not None:
            tensors.append(self.feats_table)
        tensors.append(self.root_input)
        for layer in self.stack:
            tensors.extend(layer.parameters())
        tensors.extend(self.transition_mlp.parameters())
        tensors.extend(self.label_mlp.parameters())
        tensors.append(self.pad)
        return [(t.name or f"t{k}", t) for k, t in enumerate(tensors)]

    def parameters(self) -> list[Tensor]:
        return [t for _, t in self.named_parameters()]


def _input_dim(hyper: Hyperparams, with_external: bool) -> int:
    dim = hyper.dim_word + hyper.dim_upos
    if hyper.use_xpos:
        dim += hyper.dim_xpos
    if hyper.use_feats:
        dim += hyper.dim_feats
    if with_external:
        dim += hyper.dim_external
    return dim


def _word_inputs(model: Model, sentence: Sentence, train_mode: bool, rng) -> list[Tensor]:
    vocab, hyper = model.vocab, model.hyper
    alpha = hyper.word_dropout_alpha
    out = []
    for tok in sentence.tokens:
        wid = vocab.word_id(tok.form)
        if train_mode and wid > 1 and alpha > 0:
            count = vocab.word_counts[wid]
            if rng.random() < alpha / (alpha + count):
                wid = 1
        parts = [ag.lookup(model.word_table, wid),
                 ag.lookup(model.upos_table, vocab.tag_id(vocab.upos_index, tok.upos))]
        if model.xpos_table is not None:
            parts.append(ag.lookup(model.xpos_table, vocab.tag_id(vocab.xpos_index, tok.xpos)))
        if model.feats_table is not None:
            parts.append(ag.lookup(model.feats_table, vocab.tag_id(vocab.feats_index, tok.feats)))
        if model.external is not None:
            parts.append(constant(model.external.vector(tok.form)))
        out.append(ag.concat(parts))
    return out


def encode_sentence(model: Model, sentence: Sentence, train_mode: bool = False, rng=None) -> list[Tensor]:
    """Context vectors for nodes 0..n (node 0 is the learned root input)."""
    if not sentence.tokens:
        raise ValueError("cannot encode an empty sentence")
    if train_mode and rng is None:
        raise ValueError("train_mode needs a random source for word dropout")
    inputs = [model.root_input] + _word_inputs(model, sentence, train_mode, rng)
    return bilstm_encode(model.stack, inputs, model.hyper.bilstm_layers)


def feature_slots(c: Configuration, hyper: Hyperparams) -> list[int | None]:
    """Node index feeding each feature slot, ``None`` for padding.

    Order: first x of beta, last y of lambda1, first z of lambda2, last v
    of lambda2.  Short lists are padded on the far side from the focus
    words, so the slot nearest the focus always holds a real word when the
    list is nonempty.
    """
    x, y = hyper.window_beta, hyper.window_lambda1
    z, v = hyper.window_lambda2_left, hyper.window_lambda2_right

    def head(xs, k):
        xs = list(xs[:k])
        return xs + [None] * (k - len(xs))

    def tail(xs, k):
        xs = list(xs[-k:]) if k else []
        return [None] * (k - len(xs)) + xs

    return head(c.beta, x) + tail(c.lambda1, y) + head(c.lambda2, z) + tail(c.lambda2, v)


def feature_vector(contexts: Sequence[Tensor], c: Configuration, model: Model) -> Tensor:
    return ag.concat([model.pad if k is None else contexts[k] for k in feature_slots(c, model.hyper)])


def score_transitions(model: Model, h: Tensor) -> Tensor:
    """Scores in :class:`~covparse.transition.Kind` order: LEFT_ARC, RIGHT_ARC, SHIFT, NO_ARC."""
    return mlp_forward(model.transition_mlp, h)


def score_labels(model: Model, h: Tensor) -> Tensor:
    """One score per label of ``model.vocab.labels``."""
    return mlp_forward(model.label_mlp, h)
