"""Minimal differentiable core: autograd tensors, LSTM layers, MLP, Adam."""
from .autograd import Tensor, constant, no_grad, parameter
from .layers import BiLstmLayer, LstmParams, MlpParams, bilstm_encode, lstm_forward, mlp_forward
from .optim import Adam

__all__ = [
    "Tensor",
    "constant",
    "parameter",
    "no_grad",
    "LstmParams",
    "BiLstmLayer",
    "MlpParams",
    "lstm_forward",
    "bilstm_encode",
    "mlp_forward",
    "Adam",
]
