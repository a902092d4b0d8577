"""Recursive visual attention over dialog rounds.

Round t either attends with its own question (when Infer says it is
unambiguous, or at round 0) or blends the attention of the round Pair
selects with its own: (1 - lam) * alpha[t_p] + lam * Att(t). Rounds are
processed in order and cached, so each round's decisions are made once
per forward pass and reused by every later round that refers back.
"""
import numpy as np
from .. import tensor as tn
from ..globals import Precision
from ..exceptions import ShapeError, ValidationError, RecursionCacheMiss
from ..repr_conventions import arraystr


def attend_feature(alpha, regions):
    "v_hat = sum_i alpha_i v_i"
    if alpha.ndim != 1 or alpha.shape[0] != regions.shape[0]:
        raise ShapeError("attend_feature", alpha.shape, regions.shape)
    return alpha @ regions


class AttentionState:
    "A region distribution, its attended feature and the round it is for."
    def __init__(self, alpha, v_hat, round_):
        self.alpha = alpha
        self.v_hat = v_hat
        self.round = round_

    def check(self, regions, tol=1e-6):
        "Raises unless alpha is on the simplex and v_hat matches it."
        alpha = self.alpha.value
        if (alpha < 0).any() or abs(alpha.sum() - 1) > tol:
            raise ValidationError("round %i attention is off the simplex"
                                  % self.round)
        expected = alpha @ regions.value
        if np.abs(expected - self.v_hat.value).max() > tol:
            raise ValidationError("round %i attended feature is stale"
                                  % self.round)


class TraceNode:
    "Detached snapshot of one round's recursion step."
    def __init__(self, round_, cond, lam, t_p, alpha, att_alpha):
        self.round = round_
        self.cond = cond
        self.lam = lam
        self.t_p = t_p
        self.alpha = alpha
        self.att_alpha = att_alpha

    def __repr__(self):
        return ("TraceNode(round=%i, cond=%s, lam=%.3f, t_p=%s, alpha=%s)"
                % (self.round, self.cond, self.lam, self.t_p,
                   arraystr(self.alpha)))


class RecursionTrace:
    "The chain of rounds visited from a queried round down to a terminal."
    def __init__(self, nodes):
        self.nodes = nodes

    @property
    def root(self):
        "The queried round's node."
        return self.nodes[0]

    @property
    def depth(self):
        "Number of rounds visited."
        return len(self.nodes)

    @property
    def edges(self):
        "(t, t_p) pairs, strictly decreasing in round."
        return [(node.round, node.t_p) for node in self.nodes
                if node.t_p is not None]

    def __iter__(self):
        return iter(self.nodes)


class RecursionEngine:
    """Memoized recursive attention for one episode.

    Arguments
    ---------
    att : callable t -> Tensor (K,)
        Question-guided attention for round t.
    infer : callable t -> InferDecision
    pair : callable t -> PairDecision
    regions : Tensor (K, d_v)
    rv_only : bool
        Never recurse (question-guided attention only).
    pair_last : bool
        Recurse to round t-1 instead of asking Pair.
    debug : bool
        Check every state against the simplex even in float32. Float64
        runs are always checked.
    """
    def __init__(self, att, infer, pair, regions, *, rv_only=False,
                 pair_last=False, debug=False):
        self.att = att
        self.infer = infer
        self.pair = pair
        self.regions = regions
        self.rv_only = rv_only
        self.pair_last = pair_last
        self.debug = debug
        self.cache = {}
        self.decisions = {}

    def _blend(self, t, lam, weights, att_alpha):
        previous = []
        for i in range(t):
            if i not in self.cache:
                raise RecursionCacheMiss("round %i needs round %i, which has"
                                         " not been processed" % (t, i))
            previous.append(self.cache[i][0].alpha)
        selected = weights @ tn.stack(previous)
        k = att_alpha.shape[0]
        return (tn.expand(1 - lam, k) * selected
                + tn.expand(lam, k) * att_alpha)

    def rva(self, t):
        "(AttentionState, RecursionTrace) for round t."
        if t < 0:
            raise ValidationError("round index %i is negative" % t)
        if t in self.cache:
            return self.cache[t]
        att_alpha = self.att(t)
        decision = self.infer(t)
        pairing = None
        if decision.cond or self.rv_only:
            alpha, t_p = att_alpha, None
        else:
            if self.pair_last:
                t_p = t - 1
                weights = tn.as_tensor(np.eye(t)[t_p])
            else:
                pairing = self.pair(t)
                t_p, weights = pairing.t_p, pairing.weights
            if not 0 <= t_p < t:
                raise ValidationError("round %i paired with round %s"
                                      % (t, t_p))
            alpha = self._blend(t, decision.lam, weights, att_alpha)
        state = AttentionState(alpha, attend_feature(alpha, self.regions), t)
        if Precision.dtype == np.float64:
            state.check(self.regions)
        elif self.debug:
            state.check(self.regions, tol=1e-4)
        node = TraceNode(t, bool(decision.cond), decision.lam.item(), t_p,
                         alpha.numpy(), att_alpha.numpy())
        chain = [node] + (self.cache[t_p][1].nodes if t_p is not None
                          else [])
        self.decisions[t] = (decision, pairing, att_alpha)
        self.cache[t] = (state, RecursionTrace(chain))
        return self.cache[t]

    def run(self, last):
        "Processes rounds 0..last in order; returns their states."
        return [self.rva(t)[0] for t in range(last + 1)]
