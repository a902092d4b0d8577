"Visual filter, fact embedding, joint embedding and candidate ranking"
from .. import tensor as tn
from ..exceptions import ShapeError, ValidationError
from ..small_scripts import stable_ranking
from .layers import GatedTransform, Linear, INIT_SCALE


def filter_visual(v_hat, gate):
    "v_tilde = v_hat * gate"
    if v_hat.shape != gate.shape:
        raise ShapeError("filter_visual", v_hat.shape, gate.shape)
    return v_hat * gate


def score_candidates(joint, candidates):
    "score_i = <candidate_i, e^J>"
    if candidates.ndim != 2 or candidates.shape[1] != joint.shape[0]:
        raise ShapeError("score_candidates", candidates.shape, joint.shape)
    return candidates @ joint


def ranking(scores):
    "Candidate indices, best first; ties go to the lower index."
    values = scores.value if isinstance(scores, tn.Tensor) else scores
    return stable_ranking(values)


def discriminative_loss(scores, gt_index):
    "-log softmax(scores)[gt]"
    if not 0 <= gt_index < scores.shape[0]:
        raise ValidationError("ground-truth index %i outside %i candidates"
                              % (gt_index, scores.shape[0]))
    return -tn.log_softmax(scores)[gt_index]


class CandidateSet:
    """Candidate answers for one question.

    Arguments
    ---------
    tokens : list of token lists
    gt_index : int
    relevances : list of float in [0, 1] (optional)
        When given, the ground truth must carry the largest relevance.
    """
    def __init__(self, tokens, gt_index, relevances=None):
        self.tokens = tokens
        self.gt_index = gt_index
        self.relevances = relevances
        if not 0 <= gt_index < len(tokens):
            raise ValidationError("ground-truth index %i outside %i"
                                  " candidates" % (gt_index, len(tokens)))
        if relevances is not None:
            if len(relevances) != len(tokens):
                raise ValidationError("%i relevances for %i candidates"
                                      % (len(relevances), len(tokens)))
            if relevances[gt_index] < max(relevances):
                raise ValidationError("ground-truth relevance is not maximal")

    def __len__(self):
        return len(self.tokens)

    def check_count(self, expected):
        "Raises unless there are exactly `expected` candidates."
        if len(self) != expected:
            raise ValidationError("expected %i candidates, found %i"
                                  % (expected, len(self)))


class AnswerHead:
    """Turns a round's attended feature into candidate scores.

    The visual feature is gated by the answering-aware question feature,
    joined with that feature and a fact embedding over history, and
    scored against projected candidate codes.
    """
    def __init__(self, params, config, rng):
        d_h, d_code = config.d_h, 2*config.d_h
        self.no_filter = config.no_filter
        self.gate = GatedTransform(params, "filter.f", config.d_q,
                                   config.d_v, rng)
        self.fact_q = GatedTransform(params, "fact.f_q", d_code, d_h, rng)
        self.fact_h = GatedTransform(params, "fact.f_h", d_code, d_h, rng)
        self.fact_w = params.uniform("fact.w", (d_h,), rng, INIT_SCALE)
        self.joint = Linear(params, "joint", config.d_v + config.d_q
                            + d_code, d_h, rng)
        self.project = Linear(params, "candidate.proj", d_code, d_h, rng)

    def filtered(self, v_hat, q_ans, ctx):
        "The visual feature after the question gate (or unchanged)."
        if self.no_filter:
            return v_hat
        return filter_visual(v_hat, self.gate(q_ans, ctx))

    def fact_embedding(self, e_q, history, ctx):
        "(h^f, alpha^h): attention-weighted sum of history codes."
        if not history:
            raise ValidationError("fact embedding needs a non-empty history")
        t = len(history)
        codes = tn.stack(history)
        z = tn.l2_normalize(tn.expand(self.fact_q(e_q, ctx), t)
                            * self.fact_h(codes, ctx), axis=1)
        alpha = tn.softmax(z @ self.fact_w, axis=0)
        return alpha @ codes, alpha

    def joint_embedding(self, v_tilde, q_ans, h_f, ctx):
        "e^J = tanh(W^J [v_tilde, q_ans, h^f] + b)"
        return tn.tanh(self.joint(tn.concat([v_tilde, q_ans, h_f]), ctx))

    def candidate_matrix(self, codes, ctx):
        "Projected candidate codes, one row per candidate."
        return self.project(tn.stack(codes), ctx)

    def __call__(self, v_hat, question, history, codes, ctx):
        "(scores, e^J, alpha^h) for one round."
        v_tilde = self.filtered(v_hat, question.q_ans, ctx)
        h_f, alpha_h = self.fact_embedding(question.code, history, ctx)
        joint = self.joint_embedding(v_tilde, question.q_ans, h_f, ctx)
        return (score_candidates(joint, self.candidate_matrix(codes, ctx)),
                joint, alpha_h)
