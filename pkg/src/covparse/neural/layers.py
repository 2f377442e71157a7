"""LSTM, stacked BiLSTM and one-hidden-layer perceptron built on the autograd core."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .autograd import (
    Tensor,
    add,
    concat,
    constant,
    matvec,
    mul,
    parameter,
    sigmoid,
    slice_,
    tanh,
)

__all__ = [
    "glorot",
    "LstmParams",
    "BiLstmLayer",
    "MlpParams",
    "lstm_forward",
    "bilstm_encode",
    "mlp_forward",
]

# gate blocks are stacked in this order inside the weight matrices
GATES = ("input", "forget", "output", "candidate")


def glorot(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    bound = np.sqrt(6.0 / (rows + cols))
    return rng.uniform(-bound, bound, size=(rows, cols))


@dataclass
class LstmParams:
    """One direction of one LSTM layer.

    ``w_input`` is ``(4H, I)``, ``w_hidden`` is ``(4H, H)`` and ``bias`` is
    ``(4H,)``, with the gate blocks ordered as in :data:`GATES`.
    """

    w_input: Tensor
    w_hidden: Tensor
    bias: Tensor

    @classmethod
    def init(cls, rng: np.random.Generator, input_dim: int, hidden_dim: int, prefix: str = "lstm") -> "LstmParams":
        h = hidden_dim
        w_input = np.concatenate([glorot(rng, h, input_dim) for _ in GATES])
        w_hidden = np.concatenate([glorot(rng, h, h) for _ in GATES])
        bias = np.zeros(4 * h)
        bias[h:2 * h] = 1.0  # forget gate
        return cls(
            parameter(w_input, f"{prefix}.w_input"),
            parameter(w_hidden, f"{prefix}.w_hidden"),
            parameter(bias, f"{prefix}.bias"),
        )

    @property
    def input_dim(self) -> int:
        return self.w_input.shape[1]

    @property
    def hidden_dim(self) -> int:
        return self.w_hidden.shape[1]

    def parameters(self) -> list[Tensor]:
        return [self.w_input, self.w_hidden, self.bias]


@dataclass
class BiLstmLayer:
    forward: LstmParams
    backward: LstmParams

    @classmethod
    def init(cls, rng, input_dim: int, hidden_dim: int, prefix: str = "bilstm") -> "BiLstmLayer":
        return cls(
            LstmParams.init(rng, input_dim, hidden_dim, f"{prefix}.fwd"),
            LstmParams.init(rng, input_dim, hidden_dim, f"{prefix}.bwd"),
        )

    @property
    def input_dim(self) -> int:
        return self.forward.input_dim

    @property
    def output_dim(self) -> int:
        return self.forward.hidden_dim + self.backward.hidden_dim

    def parameters(self) -> list[Tensor]:
        return self.forward.parameters() + self.backward.parameters()


@dataclass
class MlpParams:
    """``W2 . tanh(W . h + b) + b2``."""

    w: Tensor
    b: Tensor
    w2: Tensor
    b2: Tensor

    @classmethod
    def init(cls, rng, input_dim: int, hidden_dim: int, output_dim: int, prefix: str = "mlp") -> "MlpParams":
        return cls(
            parameter(glorot(rng, hidden_dim, input_dim), f"{prefix}.w"),
            parameter(np.zeros(hidden_dim), f"{prefix}.b"),
            parameter(glorot(rng, output_dim, hidden_dim), f"{prefix}.w2"),
            parameter(np.zeros(output_dim), f"{prefix}.b2"),
        )

    @property
    def input_dim(self) -> int:
        return self.w.shape[1]

    @property
    def output_dim(self) -> int:
        return self.w2.shape[0]

    def parameters(self) -> list[Tensor]:
        return [self.w, self.b, self.w2, self.b2]


def lstm_forward(params: LstmParams, inputs: Sequence[Tensor], reverse: bool = False) -> list[Tensor]:
    """Hidden states of a standard LSTM with zero initial state.

    With ``reverse`` the sequence is read right to left; the outputs are
    still returned aligned with the input positions.
    """
    h_dim = params.hidden_dim
    for k, x in enumerate(inputs):
        if x.shape != (params.input_dim,):
            raise ValueError(f"input {k} has shape {x.shape}, expected ({params.input_dim},)")
    h = constant(np.zeros(h_dim))
    c = constant(np.zeros(h_dim))
    order = range(len(inputs) - 1, -1, -1) if reverse else range(len(inputs))
    outputs: list[Tensor | None] = [None] * len(inputs)
    for t in order:
        z = add(matvec(params.w_input, inputs[t]), matvec(params.w_hidden, h), params.bias)
        gate_in = sigmoid(slice_(z, 0, h_dim))
        gate_forget = sigmoid(slice_(z, h_dim, 2 * h_dim))
        gate_out = sigmoid(slice_(z, 2 * h_dim, 3 * h_dim))
        candidate = tanh(slice_(z, 3 * h_dim, 4 * h_dim))
        c = add(mul(gate_forget, c), mul(gate_in, candidate))
        h = mul(gate_out, tanh(c))
        outputs[t] = h
    return outputs  # type: ignore[return-value]


def bilstm_encode(stack: Sequence[BiLstmLayer], inputs: Sequence[Tensor], layers: int | None = None) -> list[Tensor]:
    """Run a stack of BiLSTM layers; each position gets ``forward . backward``."""
    if layers is None:
        layers = len(stack)
    if layers < 1 or layers > len(stack):
        raise ValueError(f"need 1 <= layers <= {len(stack)}, got {layers}")
    seq = list(inputs)
    for m, layer in enumerate(stack[:layers]):
        if seq and seq[0].shape[0] != layer.input_dim:
            raise ValueError(f"layer {m} expects input size {layer.input_dim}, got {seq[0].shape[0]}")
        fwd = lstm_forward(layer.forward, seq)
        bwd = lstm_forward(layer.backward, seq, reverse=True)
        seq = [concat((f, b)) for f, b in zip(fwd, bwd)]
    return seq


def mlp_forward(params: MlpParams, h: Tensor) -> Tensor:
    if h.shape != (params.input_dim,):
        raise ValueError(f"MLP expects input size {params.input_dim}, got {h.shape}")
    hidden = tanh(add(matvec(params.w, h), params.b))
    return add(matvec(params.w2, hidden), params.b2)
