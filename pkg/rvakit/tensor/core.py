"Implements Tensor, Graph and ParameterSet"
import hashlib
import numpy as np
from ..globals import Precision, GRAPHS
from ..exceptions import GraphError, ValidationError
from ..repr_conventions import ReprMixin
from ..small_classes import Count, Numbers
from ..small_scripts import check_finite


class Tensor(ReprMixin):
    """A dense real array that can take part in reverse-mode differentiation.

    Arguments
    ---------
    value : array-like
        Converted to the current Precision dtype.
    requires_grad : bool
        Whether ops on this tensor are recorded on the active Graph.
    name : str (optional)
        Parameters are named; intermediate tensors get a numbered name.

    Tensors hash by identity, so they can key gradient dictionaries.
    """
    unique_id = Count().next
    op = None
    grad = None

    def __init__(self, value, requires_grad=False, name=None, op=None):
        self.value = np.asarray(value, dtype=Precision.dtype)
        check_finite(op or "tensor", self.value)
        self.requires_grad = requires_grad
        self.name = name or "t%i" % Tensor.unique_id()
        self.op = op

    shape = property(lambda self: self.value.shape)
    ndim = property(lambda self: self.value.ndim)
    size = property(lambda self: self.value.size)

    def __len__(self):
        return len(self.value)

    def item(self):
        "The value of a single-element tensor as a float."
        if self.value.size != 1:
            raise ValidationError("item() needs one element, not shape %s"
                                  % (self.shape,))
        return float(self.value.reshape(()))

    def numpy(self):
        "A copy of the value."
        return self.value.copy()

    def str_without(self, excluded=()):
        return "%s, shape=%s%s" % (self.name, self.shape,
                                   ", op=%s" % self.op if self.op else "")

    # pylint: disable=import-outside-toplevel
    def __add__(self, other):
        from . import math
        if isinstance(other, Numbers):
            return math.shift(self, other)
        return math.add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        from . import math
        if isinstance(other, Numbers):
            return math.shift(self, -other)
        return math.sub(self, other)

    def __rsub__(self, other):
        from . import math
        return math.shift(math.scale(self, -1), other)

    def __mul__(self, other):
        from . import math
        if isinstance(other, Numbers):
            return math.scale(self, other)
        return math.hadamard(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        from . import math
        if not isinstance(other, Numbers):
            return NotImplemented
        return math.scale(self, 1/other)

    def __neg__(self):
        from . import math
        return math.scale(self, -1)

    def __matmul__(self, other):
        from . import math
        return math.matmul(self, other)

    def __getitem__(self, key):
        from . import math
        return math.index(self, key)


class OpRecord:
    "One recorded application of an op."
    __slots__ = ("op", "inputs", "output", "backward")

    def __init__(self, op, inputs, output, backward):
        self.op = op
        self.inputs = inputs
        self.output = output
        self.backward = backward


class Graph:
    """Records ops for reverse-mode differentiation.

    Ops append themselves to the innermost active Graph whenever one of
    their inputs requires grad; with no active Graph nothing is recorded.

    Example
    -------
        >>> with Graph() as graph:
        >>>     loss = rvakit.tensor.sum(x * x)
        >>> grads = graph.backward(loss)
    """
    def __init__(self):
        self.records = []
        self.gradients = None

    def __enter__(self):
        GRAPHS.graphs.append(self)
        return self

    def __exit__(self, type_, val, traceback):
        GRAPHS.graphs.pop()

    def __len__(self):
        return len(self.records)

    def record(self, op, inputs, output, backward):
        "Adds an op application; records are kept in creation order."
        self.records.append(OpRecord(op, inputs, output, backward))

    def backward(self, loss):
        """Back-propagates from a scalar loss.

        Sets `.grad` on every leaf tensor the loss depends on and returns
        a dict mapping those leaves to their gradients.
        """
        if self.gradients is not None:
            raise GraphError("backward() already ran on this graph;"
                             " call reset() first")
        if loss.size != 1:
            raise GraphError("loss must be a scalar, not shape %s"
                             % (loss.shape,))
        if not loss.requires_grad:
            raise GraphError("loss %s does not depend on any tensor that"
                             " requires grad" % loss.name)
        pending = {id(loss): np.ones_like(loss.value)}
        leaves = {}
        for rec in reversed(self.records):
            g = pending.pop(id(rec.output), None)
            if g is None:
                continue
            for tensor, ingrad in zip(rec.inputs, rec.backward(g)):
                if ingrad is None or not tensor.requires_grad:
                    continue
                key = id(tensor)
                if key in pending:
                    pending[key] = pending[key] + ingrad
                else:
                    pending[key] = ingrad
                if tensor.op is None:
                    leaves[key] = tensor
        self.gradients = {}
        for key, tensor in leaves.items():
            grad = np.asarray(pending[key], dtype=tensor.value.dtype)
            tensor.grad = grad.reshape(tensor.shape)
            self.gradients[tensor] = tensor.grad
        return self.gradients

    def grad(self, tensor):
        "The gradient of the last backward() loss with respect to tensor."
        if not tensor.requires_grad:
            raise GraphError("%s does not require grad" % tensor.name)
        if self.gradients is None:
            raise GraphError("backward() has not run on this graph")
        if tensor in self.gradients:
            return self.gradients[tensor]
        return np.zeros_like(tensor.value)

    def reset(self):
        "Forgets recorded ops and gradients so the graph can be reused."
        for tensor in self.gradients or ():
            tensor.grad = None
        self.records = []
        self.gradients = None


class ParameterSet(dict):
    """An ordered mapping from parameter names to trainable tensors.

    Names are dotted; the text before the first dot is the parameter's
    group (e.g. "att.f_v.weight" belongs to group "att").
    """

    def add(self, name, value):
        "Registers a new parameter tensor."
        if name in self:
            raise ValidationError("parameter '%s' already exists" % name)
        self[name] = Tensor(value, requires_grad=True, name=name)
        return self[name]

    def uniform(self, name, shape, rng, scale=0.08):
        "A parameter initialised uniformly in [-scale, scale]."
        return self.add(name, rng.uniform(-scale, scale, shape))

    def zeros(self, name, shape):
        "A parameter initialised to zero."
        return self.add(name, np.zeros(shape))

    def groups(self):
        "Parameter names by group, in insertion order."
        out = {}
        for name in self:
            out.setdefault(name.split(".")[0], []).append(name)
        return out

    def count(self):
        "Total number of scalar parameters."
        return sum(p.size for p in self.values())

    def copy(self):
        "An independent ParameterSet with the same names and values."
        out = ParameterSet()
        for name, p in self.items():
            out.add(name, p.value.copy())
        return out

    def arrays(self):
        "Copies of every value, by name."
        return {name: p.numpy() for name, p in self.items()}

    def load(self, arrays):
        "Overwrites values in place from a name -> array mapping."
        missing = set(self) - set(arrays)
        extra = set(arrays) - set(self)
        if missing or extra:
            raise ValidationError("parameter names differ: missing %s,"
                                  " unexpected %s"
                                  % (sorted(missing), sorted(extra)))
        for name, value in arrays.items():
            if np.shape(value) != self[name].shape:
                raise ValidationError("parameter '%s' has shape %s, not %s"
                                      % (name, np.shape(value),
                                         self[name].shape))
            self[name].value[...] = value

    def digest(self):
        "sha256 over names, shapes and raw values."
        sha = hashlib.sha256()
        for name, p in self.items():
            sha.update(name.encode())
            sha.update(str(p.shape).encode())
            sha.update(np.ascontiguousarray(p.value).tobytes())
        return sha.hexdigest()
