"""scikit-learn style front end: ``CovingtonParser().fit(train).predict(test)``."""
from __future__ import annotations

import logging
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .evaluation import evaluate
from .parser import EpochStats, TrainConfig, parse_sentences, train
from .scorer import ExternalEmbeddings, Hyperparams, Model, build_vocab, load_external_embeddings
from .serialization import load_model, save_model
from .treebank import ConlluError, GoldTree, Sentence, TreeError, read_conllu

__all__ = ["CovingtonParser", "check_treebank"]

log = logging.getLogger(__name__)


def check_treebank(X, require_gold: bool = False) -> list[Sentence]:
    """Validate parser input: a list of :class:`Sentence`, a CoNLL-U path, or CoNLL-U text."""
    if isinstance(X, Path) or (isinstance(X, str) and "\n" not in X and Path(X).exists()):
        with open(X, "rb") as f:
            X = read_conllu(f)
    elif isinstance(X, (str, bytes)):
        X = read_conllu(X)
    sentences = list(X)
    if not sentences:
        raise ValueError("expected at least one sentence")
    for k, s in enumerate(sentences):
        if not isinstance(s, Sentence):
            raise TypeError(f"item {k} is {type(s).__name__}, expected Sentence")
        if require_gold:
            try:
                GoldTree.from_sentence(s)
            except TreeError as exc:
                raise ConlluError(f"sentence {k + 1} is not a gold tree: {exc}") from None
    return sentences


class CovingtonParser(BaseEstimator):
    """Greedy Covington parser with a BiLSTM scorer trained by a dynamic oracle.

    Every constructor argument is a plain hyperparameter (``get_params`` /
    ``set_params`` work as usual).  ``fit`` takes gold CoNLL-U sentences;
    ``predict`` returns copies of its input with HEAD and DEPREL filled.
    """

    def __init__(
        self,
        dim_word=100,
        dim_upos=25,
        dim_xpos=25,
        dim_feats=25,
        dim_external=100,
        bilstm_out=512,
        bilstm_layers=2,
        epochs=30,
        window_beta=1,
        window_lambda1=3,
        window_lambda2_left=1,
        window_lambda2_right=1,
        mlp_hidden=100,
        p_explore=0.9,
        explore_margin=1.0,
        word_dropout_alpha=0.25,
        min_count=1,
        use_xpos=True,
        use_feats=True,
        learning_rate=0.001,
        explore_from_epoch=2,
        hinge_margin=1.0,
        extra_root_label="parataxis",
        external_embeddings=None,
        random_state=1,
        n_jobs=1,
    ):
        self.dim_word = dim_word
        self.dim_upos = dim_upos
        self.dim_xpos = dim_xpos
        self.dim_feats = dim_feats
        self.dim_external = dim_external
        self.bilstm_out = bilstm_out
        self.bilstm_layers = bilstm_layers
        self.epochs = epochs
        self.window_beta = window_beta
        self.window_lambda1 = window_lambda1
        self.window_lambda2_left = window_lambda2_left
        self.window_lambda2_right = window_lambda2_right
        self.mlp_hidden = mlp_hidden
        self.p_explore = p_explore
        self.explore_margin = explore_margin
        self.word_dropout_alpha = word_dropout_alpha
        self.min_count = min_count
        self.use_xpos = use_xpos
        self.use_feats = use_feats
        self.learning_rate = learning_rate
        self.explore_from_epoch = explore_from_epoch
        self.hinge_margin = hinge_margin
        self.extra_root_label = extra_root_label
        self.external_embeddings = external_embeddings
        self.random_state = random_state
        self.n_jobs = n_jobs

    def _hyperparams(self) -> Hyperparams:
        names = Hyperparams.__dataclass_fields__
        return Hyperparams(**{k: v for k, v in self.get_params().items() if k in names})

    def _train_config(self) -> TrainConfig:
        return TrainConfig(
            seed=self.random_state,
            explore_from_epoch=self.explore_from_epoch,
            hinge_margin=self.hinge_margin,
            extra_root_label=self.extra_root_label,
        )

    def _external(self) -> ExternalEmbeddings | None:
        ext = self.external_embeddings
        if ext is None or isinstance(ext, ExternalEmbeddings):
            return ext
        with open(ext, encoding="utf-8") as f:
            return load_external_embeddings(f, self.dim_external)

    def fit(self, X, y=None, dev=None, on_epoch=None):
        """Train on gold sentences ``X``.  ``y`` is ignored (the trees live in ``X``).

        ``dev`` sentences are parsed after every epoch for reporting only.
        """
        sentences = check_treebank(X, require_gold=True)
        dev_sentences = check_treebank(dev, require_gold=True) if dev is not None else None
        hyper = self._hyperparams()
        rng = np.random.default_rng(self.random_state)
        vocab = build_vocab(sentences, hyper.min_count)
        self.model_ = Model.init(hyper, vocab, rng, self._external())
        pairs = [(s, GoldTree.from_sentence(s)) for s in sentences]
        self.history_: list[EpochStats] = train(
            self.model_, pairs, self._train_config(), dev=dev_sentences, on_epoch=on_epoch
        )
        self.n_features_in_ = self.model_.input_dim
        return self

    def _check_fitted(self) -> Model:
        model = getattr(self, "model_", None)
        if model is None:
            raise NotFittedError(f"this {type(self).__name__} instance is not fitted yet")
        return model

    def predict(self, X) -> list[Sentence]:
        model = self._check_fitted()
        sentences = check_treebank(X)
        return parse_sentences(model, sentences, jobs=self.n_jobs, extra_root_label=self.extra_root_label)

    def score(self, X, y=None) -> float:
        """Labeled attachment score (0-100) of ``predict(X)`` against the gold trees in ``X``."""
        gold = check_treebank(X, require_gold=True)
        return evaluate(self.predict(gold), gold).las

    def save(self, path) -> None:
        save_model(self._check_fitted(), path)

    @classmethod
    def from_model(cls, model: Model, **kwargs) -> "CovingtonParser":
        params = {k: v for k, v in model.hyper.to_dict().items()}
        params.update(kwargs)
        est = cls(**params)
        est.model_ = model
        est.n_features_in_ = model.input_dim
        est.history_ = []
        return est

    @classmethod
    def load(cls, path, **kwargs) -> "CovingtonParser":
        return cls.from_model(load_model(path), **kwargs)
