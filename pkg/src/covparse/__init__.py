"""Greedy non-projective dependency parsing with Covington's transition system,
a dynamic oracle and a BiLSTM scorer."""
from .estimator import CovingtonParser
from .evaluation import Score, evaluate, macro_average
from .oracle import ExplorationPolicy, LossReport, arc_reachable, brute_force_loss, loss, zero_cost_transitions
from .parser import TrainConfig, parse_sentence, postprocess_single_root, train
from .scorer import Hyperparams, Model, Vocabulary, build_vocab
from .serialization import load_model, save_model
from .transition import Configuration, Kind, Transition, apply, initial_config, is_final, legal_transitions, static_oracle
from .treebank import Arc, GoldTree, Sentence, Token, is_nonprojective, read_conllu, write_conllu

__version__ = "0.1.0"

__all__ = [
    "CovingtonParser",
    "Score",
    "evaluate",
    "macro_average",
    "ExplorationPolicy",
    "LossReport",
    "arc_reachable",
    "brute_force_loss",
    "loss",
    "zero_cost_transitions",
    "TrainConfig",
    "parse_sentence",
    "postprocess_single_root",
    "train",
    "Hyperparams",
    "Model",
    "Vocabulary",
    "build_vocab",
    "load_model",
    "save_model",
    "Configuration",
    "Kind",
    "Transition",
    "apply",
    "initial_config",
    "is_final",
    "legal_transitions",
    "static_oracle",
    "Arc",
    "GoldTree",
    "Sentence",
    "Token",
    "is_nonprojective",
    "read_conllu",
    "write_conllu",
]
