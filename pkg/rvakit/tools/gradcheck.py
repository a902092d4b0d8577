"""Finite-difference checks of the analytic gradients.

Two levels: every registered op on small random inputs (with forward-mode
`ad` derivatives as a second opinion for the element-wise ops), and the
full relaxed-path dialog loss on a fixed toy episode, reported per
parameter group. Every coordinate of every parameter is checked.
"""
from time import time
import numpy as np
from ad import adnumber
from ad import admath
from ..config import RunConfig, default_config
from ..exceptions import (GradientCheckFailure, ConfigError, NonFiniteError,
                          ValidationError)
from ..globals import Precision
from ..modules import ForwardContext, RvAModel, Vocabulary
from ..repr_conventions import table
from ..synthetic.generator import Episode, DialogRound
from ..synthetic.world import Region, World, CATEGORIES, COLORS
from ..tensor import Graph, Rng
from ..tensor.math import OPS

TOLERANCE = 1e-4
EPS = 1e-6


def relative_error(analytic, numeric):
    "|a - n| / max(1, |a|), elementwise."
    analytic, numeric = np.asarray(analytic), np.asarray(numeric)
    return np.abs(analytic - numeric) / np.maximum(np.abs(analytic), 1.0)


def finite_diff_check(loss_fn, params, eps=EPS):
    """Compares backward() gradients with central differences.

    Arguments
    ---------
    loss_fn : callable () -> scalar Tensor
        Rebuilds the loss from the current parameter values; must be
        deterministic.
    params : mapping of name -> Tensor
        The parameters to perturb, one coordinate at a time.
    eps : float
        Half-width of the central difference.

    Returns
    -------
    float
        The max relative error over every coordinate of every parameter.
    """
    if not eps > 0:
        raise ValidationError("eps must be positive, not %g" % eps)
    if Precision.dtype != np.float64:
        raise ValidationError("finite differences need float64 precision")
    with Graph() as graph:
        loss = loss_fn()
    grads = graph.backward(loss) if loss.requires_grad else {}
    worst = 0.0
    for name, p in params.items():
        analytic = grads.get(p)
        analytic = (np.zeros(p.size) if analytic is None
                    else analytic.ravel())
        flat = p.value.reshape(-1)
        numeric = np.empty(p.size)
        for i in range(p.size):
            original = flat[i]
            flat[i] = original + eps
            plus = loss_fn().item()
            flat[i] = original - eps
            minus = loss_fn().item()
            flat[i] = original
            if not np.isfinite(plus) or not np.isfinite(minus):
                raise NonFiniteError("loss at %s[%i] +/- eps" % (name, i))
            numeric[i] = (plus - minus) / (2*eps)
        if p.size:
            worst = max(worst, float(relative_error(analytic, numeric).max()))
    graph.reset()
    return worst


# inputs, attributes and input domain of each op's check
OP_CASES = {
    "add": [([(3, 4), (3, 4)], {})],
    "sub": [([(3, 4), (3, 4)], {})],
    "hadamard": [([(3, 4), (3, 4)], {})],
    "shift": [([(3,)], {"c": 0.7})],
    "scale": [([(3,)], {"c": -1.3})],
    "matmul": [([(3, 4), (4, 2)], {}), ([(4,), (4, 2)], {}),
               ([(3, 4), (4,)], {}), ([(4,), (4,)], {})],
    "concat": [([(2, 3), (4, 3)], {"axis": 0}),
               ([(2, 3), (2, 1)], {"axis": 1})],
    "stack": [([(3,), (3,), (3,)], {})],
    "reshape": [([(2, 3)], {"shape": (3, 2)})],
    "expand": [([(3,)], {"n": 4})],
    "index": [([(4, 3)], {"key": np.array([0, 2, 2])}),
              ([(5,)], {"key": 3})],
    "embedding_lookup": [([(5, 3)], {"indices": np.array([1, 1, 4])})],
    "tanh": [([(3, 4)], {})],
    "sigmoid": [([(3, 4)], {})],
    "gated": [([(3, 4), (3, 4)], {})],
    "lstm_cell": [([(12,), (3,)], {})],
    "exp": [([(3, 4)], {})],
    "log": [([(3, 4)], {}, "positive")],
    "softmax": [([(2, 5)], {"axis": -1}), ([(5,)], {"axis": -1})],
    "log_softmax": [([(2, 5)], {"axis": -1})],
    "l2_normalize": [([(2, 4)], {"axis": -1})],
    "sum": [([(3, 4)], {"axis": None}), ([(3, 4)], {"axis": 0})],
    "dropout": [([(3, 4)], {"mask": np.array([[0, 2, 2, 0]]*3, float)})],
}

ELEMENTWISE = {"tanh": admath.tanh, "exp": admath.exp, "log": admath.log,
               "sigmoid": lambda x: 1/(1 + admath.exp(-x))}


def _op_inputs(rng, shapes, domain):
    if domain == "positive":
        return [rng.uniform(0.5, 2.0, shape) for shape in shapes]
    return [rng.normal(1.0, shape) for shape in shapes]


def check_op(name, rng, eps=EPS):
    "Max relative error of one op's backward rule over its cases."
    worst = 0.0
    for case in OP_CASES[name]:
        shapes, attrs = case[0], case[1]
        inputs = _op_inputs(rng, shapes, case[2] if len(case) > 2 else None)
        value, backward = OPS[name](*inputs, **attrs)
        weights = rng.normal(1.0, np.shape(value))
        analytic = backward(weights)
        for k, x in enumerate(inputs):
            numeric = np.zeros_like(x)
            for i in np.ndindex(x.shape):
                original = x[i]
                x[i] = original + eps
                plus = (OPS[name](*inputs, **attrs)[0] * weights).sum()
                x[i] = original - eps
                minus = (OPS[name](*inputs, **attrs)[0] * weights).sum()
                x[i] = original
                numeric[i] = (plus - minus) / (2*eps)
            worst = max(worst, relative_error(analytic[k], numeric).max())
        if name in ELEMENTWISE:
            x = inputs[0]
            exact = np.array([_ad_derivative(name, v) for v in x.ravel()]
                             ).reshape(x.shape)
            ones = backward(np.ones_like(value))[0]
            worst = max(worst, relative_error(ones, exact).max())
    return float(worst)


def _ad_derivative(name, v):
    x = adnumber(float(v))
    return ELEMENTWISE[name](x).d(x)


def check_straight_through(rng):
    "The straight-through op must pass the output gradient to soft as is."
    hard, soft = np.eye(4)[1], rng.uniform(0, 1, (4,))
    value, backward = OPS["straight_through"](hard, soft)
    g = rng.normal(1.0, (4,))
    g_hard, g_soft = backward(g)
    ok = (np.array_equal(value, hard) and g_hard is None
          and np.array_equal(g_soft, g))
    return 0.0 if ok else float("inf")


def check_ops(seed=0, verbosity=0):
    "op name -> max relative error, for every op in OP_CASES."
    rng = Rng(seed, "data", 0)
    with Precision("float64"):
        errors = {name: check_op(name, rng) for name in OP_CASES}
        errors["straight_through"] = check_straight_through(rng)
    if verbosity > 0:
        print("\n".join(table(sorted(errors.items()), "Op checks",
                              ("op", "max rel. error"))))
    return errors


TOY_ROUNDS = (  # question, answer, ambiguous, antecedent
    (["where"], ["left"], False, None),
    (["it"], ["red"], True, 1),
    (["what"], ["no"], True, 0),
)
TOY_ANSWERS = ("left", "red", "no", "blue", "yes")


def toy_episode(config):
    """A fixed three-round episode with one-word sentences.

    Region features come from the config's seed; candidate count and
    feature width follow the config.
    """
    if config.num_candidates > len(TOY_ANSWERS):
        raise ConfigError("the toy episode has at most %i candidates"
                          % len(TOY_ANSWERS))
    k = config.num_regions
    regions = [Region(CATEGORIES[i % len(CATEGORIES)],
                      COLORS[i % len(COLORS)], "small", "on",
                      ("top", "left")) for i in range(k)]
    features = Rng(config.seed, "data", 2).normal(1.0, (k, config.d_v))
    rounds = []
    for t, (question, answer, ambiguous, antecedent) in enumerate(
            TOY_ROUNDS, 1):
        candidates = [answer] + [[word] for word in TOY_ANSWERS
                                 if word != answer[0]]
        candidates = candidates[:config.num_candidates]
        gt_index = t % len(candidates)
        candidates.insert(gt_index, candidates.pop(0))
        relevances = [1.0 if i == gt_index else 0.0
                      for i in range(len(candidates))]
        rounds.append(DialogRound(t, question, answer, "color", ambiguous,
                                  antecedent, t % k, candidates, gt_index,
                                  relevances))
    return Episode(config.seed, 0, World(regions, features, [0]), ["lamp"],
                   0, rounds)


class GradcheckReport:
    "Per-op and per-group errors with pass/fail status."
    def __init__(self, op_errors, group_errors, seconds, tolerance=TOLERANCE):
        self.op_errors = op_errors
        self.group_errors = group_errors
        self.seconds = seconds
        self.tolerance = tolerance

    @property
    def failing_ops(self):
        "Ops whose backward rule disagrees with finite differences."
        return sorted(k for k, v in self.op_errors.items()
                      if not v <= self.tolerance)

    @property
    def failing_groups(self):
        "Parameter groups above tolerance."
        return sorted(k for k, v in self.group_errors.items()
                      if not v <= self.tolerance)

    @property
    def passed(self):
        "True when nothing failed."
        return not self.failing_ops and not self.failing_groups

    def table(self):
        "Printable report."
        lines = table([(k, v, "ok" if v <= self.tolerance else "FAIL")
                       for k, v in sorted(self.op_errors.items())],
                      "Op backward rules", ("op", "max rel. error", ""))
        if self.group_errors:
            lines += table([(k, v, "ok" if v <= self.tolerance else "FAIL")
                            for k, v in self.group_errors.items()],
                           "Parameter groups (relaxed dialog loss)",
                           ("group", "max rel. error", ""))
        else:
            lines += ["", "Model check skipped: op rules failed."]
        lines += ["", "%s in %.3g seconds." % (
            "Passed" if self.passed else "FAILED", self.seconds)]
        return "\n".join(lines)

    def check(self):
        "Raises GradientCheckFailure naming what failed."
        if self.passed:
            return
        parts = []
        if self.failing_ops:
            parts.append("ops %s" % ", ".join(self.failing_ops))
        if self.failing_groups:
            parts.append("groups %s" % ", ".join(self.failing_groups))
        raise GradientCheckFailure("gradient check failed for "
                                   + "; ".join(parts))


def gradcheck(config=None, groups=None, verbosity=1):
    """Checks every op, then the whole model on the toy episode.

    Arguments
    ---------
    config : RunConfig (optional)
        Defaults to rvakit/env/gradcheck.cfg; must be 64-bit.
    groups : iterable of str (optional)
        Parameter groups to check; all of them by default.
    verbosity : int
        > 0 prints the report table.

    Returns
    -------
    GradcheckReport
        The model check is skipped when an op rule already failed.
    """
    tic = time()
    config = config or default_config("gradcheck")
    if not isinstance(config, RunConfig):
        raise ConfigError("gradcheck needs a RunConfig")
    if config.precision != "float64":
        raise ConfigError("gradcheck needs precision = float64")
    if config.dropout:
        config = config.replace(dropout=0.0)
    op_errors = check_ops(config.seed)
    group_errors = {}
    if all(v <= TOLERANCE for v in op_errors.values()):
        episode = toy_episode(config)
        with Precision(config.precision):
            model = RvAModel(config, Vocabulary.from_episodes([episode]))
            by_group = model.params.groups()
            selected = list(by_group) if groups is None else list(groups)
            unknown = set(selected) - set(by_group)
            if unknown:
                raise ConfigError("unknown parameter groups %s"
                                  % sorted(unknown))

            def loss_fn():
                ctx = ForwardContext("relaxed", tau=config.tau,
                                     gumbel_rng=Rng(config.seed, "gumbel",
                                                    0, 0))
                return model.forward(episode, ctx).loss

            for group in selected:
                group_errors[group] = finite_diff_check(
                    loss_fn, {name: model.params[name]
                              for name in by_group[group]})
                if verbosity > 1:
                    print("  %s: %.3g" % (group, group_errors[group]))
    report = GradcheckReport(op_errors, group_errors, time() - tic)
    if verbosity > 0:
        print(report.table())
    return report
