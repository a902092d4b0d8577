"""Gumbel sampling and the Infer, Pair and Att modules.

Infer decides whether a question can be grounded on its own, Pair picks
the history round a question refers back to, and Att is the
question-guided attention over image regions.
"""
import numpy as np
from .. import tensor as tn
from ..tensor import Tensor
from ..exceptions import ValidationError
from ..small_scripts import one_hot, lowest_argmax
from .layers import GatedTransform, Linear, MODES, INIT_SCALE

TINY = np.finfo(float).tiny


def gumbel_noise(rng, shape):
    "g = -log(-log(u)), u ~ unif(0, 1)."
    u = np.clip(rng.random(shape), TINY, 1 - np.finfo(float).epsneg)
    return -np.log(-np.log(u))


def gumbel_max(logits, rng, size=None):
    "Indices argmax(logits + g) for `size` independent noise draws."
    logits = np.asarray(logits, dtype=float)
    shape = logits.shape if size is None else (size,) + logits.shape
    return np.argmax(logits + gumbel_noise(rng, shape), axis=-1)


class GumbelSample:
    """A categorical decision with its differentiable relaxation.

    Attributes
    ----------
    one_hot : ndarray
        Exactly one entry is 1.
    relaxed : Tensor
        softmax((logits + g) / tau).
    logits : Tensor
        Pre-noise scores.
    mode : str
    value : Tensor
        What downstream arithmetic uses: one_hot in value with relaxed's
        gradient in train and greedy modes, relaxed in relaxed mode.
    index : int
        Position of the one in one_hot.
    """
    def __init__(self, one_hot_, relaxed, logits, mode, value, index):
        self.one_hot = one_hot_
        self.relaxed = relaxed
        self.logits = logits
        self.mode = mode
        self.value = value
        self.index = index

    @classmethod
    def single(cls, logits, mode):
        "The only possible outcome of a one-way choice."
        relaxed = tn.softmax(logits)
        hard = one_hot(0, 1)
        value = relaxed if mode == "relaxed" else tn.straight_through(
            hard, relaxed)
        return cls(hard, relaxed, logits, mode, value, 0)


def gumbel_sample(logits, mode, tau=1.0, rng=None, noise=None):
    """Draws one_hot(argmax(logits + g)) with a straight-through gradient.

    Greedy mode adds no noise; ties go to the lowest index. `noise`
    overrides the drawn g (used to pin samples).
    """
    if mode not in MODES:
        raise ValidationError("unknown sampling mode '%s'" % mode)
    if logits.ndim != 1 or logits.shape[0] < 2:
        raise ValidationError("gumbel_sample needs a vector of at least two"
                              " logits, not shape %s" % (logits.shape,))
    if tau <= 0:
        raise ValidationError("temperature must be positive, not %g" % tau)
    if noise is None:
        if mode == "greedy":
            noise = np.zeros(logits.shape)
        elif rng is None:
            raise ValidationError("mode '%s' needs a random stream" % mode)
        else:
            noise = gumbel_noise(rng, logits.shape)
    perturbed = logits + Tensor(noise)
    relaxed = tn.softmax(perturbed if tau == 1 else perturbed * (1/tau))
    index = lowest_argmax(perturbed.value)
    hard = one_hot(index, logits.shape[0])
    if mode == "relaxed":
        value = relaxed
    else:
        value = tn.straight_through(hard, relaxed)
    return GumbelSample(hard, relaxed, logits, mode, value, index)


class InferDecision:
    """Whether to stop recursing at this round, and the fusion weight.

    lam is alpha[0], the probability of "unambiguous"; cond is true at
    round 0 or when the sample picks index 0.
    """
    def __init__(self, cond, lam, sample, alpha):
        self.cond = cond
        self.lam = lam
        self.sample = sample
        self.alpha = alpha


def infer_decision(logits, t, mode, tau=1.0, rng=None, noise=None):
    "An InferDecision from the two Infer logits of round t."
    if t < 0:
        raise ValidationError("round index %i is negative" % t)
    alpha = tn.softmax(logits)
    sample = gumbel_sample(logits, mode, tau, rng, noise)
    return InferDecision(t == 0 or sample.index == 0, alpha[0], sample, alpha)


class Infer:
    "z = f(q_ref); logits = z @ W; two-way decision."
    def __init__(self, params, config, rng):
        self.transform = GatedTransform(params, "infer.f", config.d_q,
                                        config.d_h, rng)
        self.output = Linear(params, "infer.out", config.d_h, 2, rng,
                             bias=False)

    def logits(self, q_ref, ctx):
        "W^I f(q_ref)."
        return self.output(self.transform(q_ref, ctx), ctx)

    def __call__(self, q_ref, t, ctx):
        return infer_decision(self.logits(q_ref, ctx), t, ctx.mode, ctx.tau,
                              ctx.gumbel_rng)


class PairDecision:
    "The round t_p < t that round t refers back to."
    def __init__(self, t_p, sample, match, distance):
        self.t_p = t_p
        self.sample = sample
        self.match = match
        self.distance = distance

    @property
    def weights(self):
        "The one-hot (straight-through) selection over rounds 0..t-1."
        return self.sample.value


def pair_decision(logits, t, mode, tau=1.0, rng=None, noise=None,
                  match=None, distance=None):
    "A PairDecision from per-candidate logits over rounds 0..t-1."
    if t < 1:
        raise ValidationError("pairing needs t >= 1, not %i" % t)
    if logits.shape != (t,):
        raise ValidationError("expected %i pairing logits, not shape %s"
                              % (t, logits.shape))
    if t == 1:
        sample = GumbelSample.single(logits, mode)
    else:
        sample = gumbel_sample(logits, mode, tau, rng, noise)
    t_p = int(np.dot(sample.one_hot, np.arange(t)))
    assert t_p < t
    return PairDecision(t_p, sample, match, distance)


class Pair:
    """Scores each earlier history round against the current question.

    match_i = mlp([f_q(e^q), f_h(e^h_i)]); the logit for round i is a
    shared linear map of (match_i, t - i), so any t is supported.
    """
    def __init__(self, params, config, rng):
        d_h, d_code = config.d_h, 2*config.d_h
        self.f_q = GatedTransform(params, "pair.f_q", d_code, d_h, rng)
        self.f_h = GatedTransform(params, "pair.f_h", d_code, d_h, rng)
        self.hidden = GatedTransform(params, "pair.mlp", 2*d_h, d_h, rng)
        self.match = Linear(params, "pair.match", d_h, 1, rng)
        self.score = Linear(params, "pair.score", 2, 1, rng)

    def logits(self, e_q, history, ctx):
        "(logits, match scores, distances) over rounds 0..t-1."
        t = len(history)
        if not t:
            raise ValidationError("pairing needs a non-empty history")
        question = tn.expand(self.f_q(e_q, ctx), t)
        rounds = self.f_h(tn.stack(history), ctx)
        joint = tn.concat([question, rounds], axis=1)
        match = self.match(self.hidden(joint, ctx), ctx)  # (t, 1)
        distance = Tensor([[t - i] for i in range(t)])
        logits = self.score(tn.concat([match, distance], axis=1), ctx)
        return tn.reshape(logits, (t,)), tn.reshape(match, (t,)), distance

    def __call__(self, e_q, history, t, ctx):
        if t < 1 or not history:
            raise ValidationError("pairing needs t >= 1 and a non-empty"
                                  " history")
        if len(history) != t:
            raise ValidationError("round %i needs %i history codes, got %i"
                                  % (t, t, len(history)))
        logits, match, distance = self.logits(e_q, history, ctx)
        return pair_decision(logits, t, ctx.mode, ctx.tau, ctx.gumbel_rng,
                             match=match, distance=distance)


class Att:
    """Question-guided attention over regions.

    z_i = l2norm(f_q(q_ref) * f_v(v_i)); alpha = softmax(Z @ w).
    """
    def __init__(self, params, config, rng):
        self.f_q = GatedTransform(params, "att.f_q", config.d_q, config.d_h,
                                  rng)
        self.f_v = GatedTransform(params, "att.f_v", config.d_v, config.d_h,
                                  rng)
        self.weight = params.uniform("att.w", (config.d_h,), rng, INIT_SCALE)

    def __call__(self, regions, q_ref, ctx):
        if regions.ndim != 2 or regions.shape[0] == 0:
            raise ValidationError("attention needs at least one region, got"
                                  " shape %s" % (regions.shape,))
        k = regions.shape[0]
        question = tn.expand(self.f_q(q_ref, ctx), k)
        z = tn.l2_normalize(question * self.f_v(regions, ctx), axis=1)
        return tn.softmax(z @ self.weight, axis=0)
