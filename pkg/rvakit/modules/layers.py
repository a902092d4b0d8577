"Learned building blocks shared by every model module"
import numpy as np
from .. import tensor as tn
from ..tensor import Rng
from ..exceptions import ValidationError, ShapeError

MODES = ("train", "greedy", "relaxed")
INIT_SCALE = 0.08


class ForwardContext:
    """Per-forward-pass switches and random streams.

    Arguments
    ---------
    mode : str
        "train" samples Gumbel noise and uses straight-through values,
        "greedy" is noise-free argmax (evaluation), and "relaxed" uses
        the relaxed samples as forward values (for gradient checks).
    train : bool
        Whether dropout is active.
    dropout : float
        Dropout rate applied before each learned linear map.
    tau : float
        Gumbel-softmax temperature.
    dropout_rng, gumbel_rng : Rng
        Streams for dropout masks and Gumbel noise.
    """
    def __init__(self, mode="greedy", *, train=False, dropout=0.0, tau=1.0,
                 dropout_rng=None, gumbel_rng=None):
        if mode not in MODES:
            raise ValidationError("unknown sampling mode '%s'" % mode)
        if mode != "greedy" and gumbel_rng is None:
            raise ValidationError("mode '%s' needs a gumbel stream" % mode)
        if train and dropout and dropout_rng is None:
            raise ValidationError("training dropout needs a dropout stream")
        self.mode = mode
        self.train = train
        self.dropout = dropout
        self.tau = tau
        self.dropout_rng = dropout_rng
        self.gumbel_rng = gumbel_rng

    @classmethod
    def evaluation(cls, config):
        "Greedy decisions, no dropout."
        return cls("greedy", tau=config.tau)

    @classmethod
    def training(cls, config, epoch, episode):
        "Sampled decisions and dropout, streams keyed by (epoch, episode)."
        return cls("train", train=True, dropout=config.dropout,
                   tau=config.tau,
                   dropout_rng=Rng(config.seed, "dropout", epoch, episode),
                   gumbel_rng=Rng(config.seed, "gumbel", epoch, episode))

    def drop(self, x):
        "Applies dropout to x when training."
        return tn.dropout(x, self.dropout, self.dropout_rng, self.train)


class Linear:
    """x @ W + b, with dropout on x first.

    Accepts a single vector (d_in,) or a batch of rows (m, d_in).
    """
    def __init__(self, params, name, d_in, d_out, rng, bias=True):
        self.d_in, self.d_out = d_in, d_out
        self.weight = params.uniform(name + ".weight", (d_in, d_out), rng,
                                     INIT_SCALE)
        self.bias = (params.uniform(name + ".bias", (d_out,), rng,
                                    INIT_SCALE) if bias else None)

    def __call__(self, x, ctx):
        if x.shape[-1] != self.d_in:
            raise ShapeError("linear", x.shape, self.weight.shape)
        y = ctx.drop(x) @ self.weight
        if self.bias is None:
            return y
        if y.ndim == 1:
            return y + self.bias
        return y + tn.expand(self.bias, y.shape[0])


class GatedTransform:
    "f(x) = tanh(W1 x + b1) * sigmoid(W2 x + b2)"
    def __init__(self, params, name, d_in, d_out, rng):
        self.d_in, self.d_out = d_in, d_out
        self.value = Linear(params, name + ".value", d_in, d_out, rng)
        self.gate = Linear(params, name + ".gate", d_in, d_out, rng)

    def __call__(self, x, ctx):
        return tn.gated(self.value(x, ctx), self.gate(x, ctx))


class LSTM:
    """A single-direction LSTM with input, forget, cell and output gates.

    The input projection (bias included) for every position is one
    matmul; the recurrence then adds h_{t-1} @ U and applies the fused
    lstm_cell op for each step.
    """
    def __init__(self, params, name, d_in, d_h, rng):
        self.d_in, self.d_h = d_in, d_h
        self.input = params.uniform(name + ".input", (d_in, 4*d_h), rng,
                                    INIT_SCALE)
        self.hidden = params.uniform(name + ".hidden", (d_h, 4*d_h), rng,
                                     INIT_SCALE)
        self.bias = params.uniform(name + ".bias", (4*d_h,), rng, INIT_SCALE)

    def __call__(self, xs, reverse=False):
        """Runs over the rows of xs (m, d_in).

        Returns the hidden state after each position, in position order.
        """
        m = xs.shape[0]
        projected = xs @ self.input + tn.expand(self.bias, m)
        order = range(m-1, -1, -1) if reverse else range(m)
        h, c = None, np.zeros(self.d_h, dtype=xs.value.dtype)
        states = [None]*m
        for pos in order:
            z = projected[pos]
            if h is not None:
                z = z + h @ self.hidden
            cell = tn.lstm_cell(z, c)
            h, c = cell[0], cell[1]
            states[pos] = h
        return states


class BiLSTM:
    "Forward and backward LSTMs over one sentence."
    def __init__(self, params, name, d_in, d_h, rng):
        self.forward = LSTM(params, name + ".fwd", d_in, d_h, rng)
        self.backward = LSTM(params, name + ".bwd", d_in, d_h, rng)

    def __call__(self, xs):
        """Returns (hidden (m, 2*d_h), code (2*d_h,)).

        The code is [forward state at the last token, backward state at
        the first token].
        """
        fwd = self.forward(xs)
        bwd = self.backward(xs, reverse=True)
        hidden = tn.concat([tn.stack(fwd), tn.stack(bwd)], axis=1)
        return hidden, tn.concat([fwd[-1], bwd[0]])
