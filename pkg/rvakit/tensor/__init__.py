"Dense tensors with reverse-mode differentiation"
from .core import Tensor, Graph, ParameterSet
from .math import (OPS, apply, add, sub, hadamard, shift, scale, matmul,
                   concat, stack, reshape, expand, index, embedding_lookup,
                   tanh, sigmoid, gated, lstm_cell, exp, log, softmax,
                   log_softmax, l2_normalize, sum, mean, dropout,
                   straight_through, weighted, as_tensor)
from .rng import Rng, PURPOSES
