"""The closed set of differentiable ops.

Every op is registered in OPS as a function of raw arrays returning the
output value and a backward closure mapping the output gradient to one
gradient per input (None for inputs that take no gradient).
"""
import numpy as np
from scipy.special import expit, logsumexp
from scipy.special import softmax as _softmax
from .core import Tensor
from ..globals import active_graph
from ..exceptions import ShapeError, ValidationError

OPS = {}


def register(name):
    "Decorator adding a forward/backward function to OPS."
    def decorator(fn):
        OPS[name] = fn
        return fn
    return decorator


def apply(name, inputs, **attrs):
    "Runs an op on tensors, recording it on the active Graph if needed."
    with np.errstate(all="ignore"):  # non-finite output is raised on below
        value, backward = OPS[name](*[t.value for t in inputs], **attrs)
    graph = active_graph()
    tracked = graph is not None and any(t.requires_grad for t in inputs)
    out = Tensor(value, requires_grad=tracked, op=name)
    if tracked:
        graph.record(name, inputs, out, backward)
    return out


def as_tensor(x):
    "Wraps arrays and numbers as constant tensors."
    return x if isinstance(x, Tensor) else Tensor(x)


def _same_shape(op, a, b):
    if a.shape != b.shape:
        raise ShapeError(op, a.shape, b.shape)


# pylint: disable=missing-function-docstring
@register("add")
def _add(a, b):
    _same_shape("add", a, b)
    return a + b, lambda g: (g, g)


@register("sub")
def _sub(a, b):
    _same_shape("sub", a, b)
    return a - b, lambda g: (g, -g)


@register("hadamard")
def _hadamard(a, b):
    _same_shape("hadamard", a, b)
    return a * b, lambda g: (g * b, g * a)


@register("shift")
def _shift(a, c):
    return a + c, lambda g: (g,)


@register("scale")
def _scale(a, c):
    return a * c, lambda g: (g * c,)


@register("matmul")
def _matmul(a, b):
    if a.ndim not in (1, 2) or b.ndim not in (1, 2) \
            or a.shape[-1] != b.shape[0]:
        raise ShapeError("matmul", a.shape, b.shape)

    def backward(g):
        if a.ndim == 1 and b.ndim == 1:
            return g * b, g * a
        if a.ndim == 1:
            return b @ g, np.outer(a, g)
        if b.ndim == 1:
            return np.outer(g, b), a.T @ g
        return g @ b.T, a.T @ g
    return a @ b, backward


@register("concat")
def _concat(*arrays, axis=0):
    first = arrays[0]
    for a in arrays[1:]:
        if a.ndim != first.ndim or any(
                x != y for i, (x, y) in enumerate(zip(a.shape, first.shape))
                if i != axis % first.ndim):
            raise ShapeError("concat", *[x.shape for x in arrays])
    splits = np.cumsum([a.shape[axis] for a in arrays])[:-1]
    return (np.concatenate(arrays, axis=axis),
            lambda g: tuple(np.split(g, splits, axis=axis)))


@register("stack")
def _stack(*arrays):
    for a in arrays[1:]:
        _same_shape("stack", arrays[0], a)
    return np.stack(arrays), lambda g: tuple(g)


@register("reshape")
def _reshape(a, shape):
    if int(np.prod(shape)) != a.size:
        raise ShapeError("reshape", a.shape, tuple(shape))
    return a.reshape(shape), lambda g: (g.reshape(a.shape),)


@register("expand")
def _expand(a, n):
    return (np.repeat(a[np.newaxis], n, axis=0),
            lambda g: (g.sum(axis=0),))


@register("index")
def _index(a, key):
    def backward(g):
        grad = np.zeros_like(a)
        np.add.at(grad, key, g)
        return (grad,)
    return np.array(a[key]), backward


@register("embedding_lookup")
def _embedding_lookup(table, indices):
    indices = np.asarray(indices, dtype=int)
    if indices.size and (indices.min() < 0 or indices.max() >= len(table)):
        raise ValidationError("token index out of range [0, %i)"
                              % len(table))

    def backward(g):
        grad = np.zeros_like(table)
        np.add.at(grad, indices, g)
        return (grad,)
    return table[indices], backward


@register("tanh")
def _tanh(a):
    y = np.tanh(a)
    return y, lambda g: (g * (1 - y*y),)


@register("sigmoid")
def _sigmoid(a):
    y = expit(a)
    return y, lambda g: (g * y * (1 - y),)


@register("exp")
def _exp(a):
    y = np.exp(a)
    return y, lambda g: (g * y,)


@register("log")
def _log(a):
    return np.log(a), lambda g: (g / a,)


@register("softmax")
def _softmax_op(a, axis=-1):
    y = _softmax(a, axis=axis)
    return y, lambda g: (y * (g - (g*y).sum(axis=axis, keepdims=True)),)


@register("log_softmax")
def _log_softmax(a, axis=-1):
    y = a - logsumexp(a, axis=axis, keepdims=True)
    return y, lambda g: (g - np.exp(y) * g.sum(axis=axis, keepdims=True),)


@register("l2_normalize")
def _l2_normalize(a, axis=-1):
    norm = np.sqrt((a*a).sum(axis=axis, keepdims=True))
    safe = np.where(norm > 0, norm, 1)
    y = a / safe

    def backward(g):
        grad = (g - y * (g*y).sum(axis=axis, keepdims=True)) / safe
        return (np.where(norm > 0, grad, 0),)
    return y, backward


@register("sum")
def _sum(a, axis=None):
    def backward(g):
        if axis is not None:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, a.shape).copy(),)
    return np.asarray(a.sum(axis=axis)), backward


@register("gated")
def _gated(a, b):
    _same_shape("gated", a, b)
    t, s = np.tanh(a), expit(b)
    return t * s, lambda g: (g * s * (1 - t*t), g * t * s * (1 - s))


@register("lstm_cell")
def _lstm_cell(z, c_prev):
    d_h = c_prev.shape[-1]
    if z.shape != (4*d_h,):
        raise ShapeError("lstm_cell", z.shape, c_prev.shape)
    i, f, o = expit(z[:d_h]), expit(z[d_h:2*d_h]), expit(z[3*d_h:])
    g = np.tanh(z[2*d_h:3*d_h])
    c = f * c_prev + i * g
    tc = np.tanh(c)

    def backward(grad):
        gh, gc = grad[0], grad[1] + grad[0] * o * (1 - tc*tc)
        gz = np.concatenate([gc * g * i * (1 - i), gc * c_prev * f * (1 - f),
                             gc * i * (1 - g*g), gh * tc * o * (1 - o)])
        return gz, gc * f
    return np.stack([o * tc, c]), backward


@register("dropout")
def _dropout(a, mask):
    return a * mask, lambda g: (g * mask,)


@register("straight_through")
def _straight_through(hard, soft):
    _same_shape("straight_through", hard, soft)
    return hard.copy(), lambda g: (None, g)
# pylint: enable=missing-function-docstring


def add(a, b):
    "Element-wise sum of same-shaped tensors."
    return apply("add", (as_tensor(a), as_tensor(b)))


def sub(a, b):
    "Element-wise difference of same-shaped tensors."
    return apply("sub", (as_tensor(a), as_tensor(b)))


def hadamard(a, b):
    "Element-wise product of same-shaped tensors."
    return apply("hadamard", (as_tensor(a), as_tensor(b)))


def shift(a, c):
    "Adds a python scalar."
    return apply("shift", (a,), c=c)


def scale(a, c):
    "Multiplies by a python scalar."
    return apply("scale", (a,), c=c)


def matmul(a, b):
    """Matrix product for rank-1 and rank-2 operands.

    (m,n)@(n,p) -> (m,p); (m,n)@(n,) -> (m,); (n,)@(n,p) -> (p,);
    (n,)@(n,) -> scalar.
    """
    return apply("matmul", (as_tensor(a), as_tensor(b)))


def concat(tensors, axis=0):
    "Joins tensors along an existing axis."
    tensors = tuple(as_tensor(t) for t in tensors)
    if not tensors:
        raise ValidationError("concat needs at least one tensor")
    return apply("concat", tensors, axis=axis)


def stack(tensors):
    "Joins same-shaped tensors along a new leading axis."
    tensors = tuple(as_tensor(t) for t in tensors)
    if not tensors:
        raise ValidationError("stack needs at least one tensor")
    return apply("stack", tensors)


def reshape(a, shape):
    "Same values, new shape."
    return apply("reshape", (a,), shape=tuple(shape))


def expand(a, n):
    "Repeats a tensor n times along a new leading axis."
    return apply("expand", (a,), n=int(n))


def index(a, key):
    "Basic or integer-array indexing; the gradient scatters back."
    if isinstance(key, list):
        key = np.asarray(key, dtype=int)
    return apply("index", (a,), key=key)


def embedding_lookup(table, indices):
    "Rows of a (V, d) table; rows never looked up get exactly zero gradient."
    return apply("embedding_lookup", (table,), indices=indices)


def tanh(a):
    "Element-wise hyperbolic tangent."
    return apply("tanh", (a,))


def sigmoid(a):
    "Element-wise logistic function."
    return apply("sigmoid", (a,))


def gated(a, b):
    "tanh(a) * sigmoid(b) as one op."
    return apply("gated", (a, b))


def lstm_cell(z, c_prev):
    """One LSTM step from gate pre-activations z = [i, f, g, o].

    Returns a (2, d_h) tensor whose rows are the new hidden and cell
    states.
    """
    return apply("lstm_cell", (z, as_tensor(c_prev)))


def exp(a):
    "Element-wise exponential."
    return apply("exp", (a,))


def log(a):
    "Element-wise natural log; non-positive input is a NonFiniteError."
    return apply("log", (a,))


def softmax(a, axis=-1):
    "Max-shifted softmax along an axis."
    return apply("softmax", (a,), axis=axis)


def log_softmax(a, axis=-1):
    "log(softmax(a)), computed through logsumexp."
    return apply("log_softmax", (a,), axis=axis)


def l2_normalize(a, axis=-1):
    "Divides by the l2 norm along an axis; all-zero slices stay zero."
    return apply("l2_normalize", (a,), axis=axis)


def sum(a, axis=None):  # pylint: disable=redefined-builtin
    "Sum over an axis, or over everything."
    return apply("sum", (a,), axis=axis)


def mean(a, axis=None):
    "Mean over an axis, or over everything."
    count = a.size if axis is None else a.shape[axis]
    return scale(sum(a, axis), 1/count)


def dropout(a, rate, rng, train=True):
    """Inverted dropout: kept entries are scaled by 1/(1-rate).

    The identity when not training or when rate is zero.
    """
    if not 0 <= rate < 1:
        raise ValidationError("dropout rate %g is outside [0, 1)" % rate)
    if not train or rate == 0:
        return a
    mask = (rng.random(a.shape) >= rate) / (1 - rate)
    return apply("dropout", (a,), mask=mask.astype(a.value.dtype))


def straight_through(hard, soft):
    "Forward value of hard, gradient passed to soft unchanged."
    return apply("straight_through", (as_tensor(hard), soft))


def weighted(weight, a):
    "Multiplies a tensor by a scalar tensor."
    if weight.size != 1:
        raise ShapeError("weighted", weight.shape, a.shape)
    weight = reshape(weight, ())
    if a.ndim == 0:
        return hadamard(weight, a)
    flat = reshape(a, (a.size,))
    return reshape(hadamard(expand(weight, a.size), flat), a.shape)
