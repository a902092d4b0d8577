"global mutable variables"
import threading
import numpy as np
from .exceptions import ConfigError

PRECISIONS = {"float32": np.float32, "float64": np.float64}


def precision_dtype(name):
    "Returns the numpy dtype for a precision name"
    try:
        return np.dtype(PRECISIONS[name])
    except KeyError:
        raise ConfigError("unknown precision '%s'; expected one of %s"
                          % (name, ", ".join(PRECISIONS))) from None


class Precision:
    """Creates an environment in which new tensors use a given float width.

    Training runs in float32; finite-difference checks need float64.

    Example
    -------
        >>> with Precision("float64"):
        >>>     x = rvakit.Tensor([1.0, 2.0])
        >>> x.value.dtype
        dtype('float64')
    """
    dtype = np.dtype(np.float32)  # the current default

    def __init__(self, name):
        self.name = name
        self.newdtype = precision_dtype(name)
        self.previous = None

    def __enter__(self):
        "Enters an environment with the new precision."
        self.previous = Precision.dtype
        Precision.dtype = self.newdtype
        return self

    def __exit__(self, type_, val, traceback):
        "Restores the previous precision."
        Precision.dtype = self.previous


class _GraphStack(threading.local):
    "Active differentiation graphs, one stack per thread."
    def __init__(self):
        super().__init__()
        self.graphs = []


GRAPHS = _GraphStack()


def active_graph():
    "Returns the innermost Graph being recorded on this thread, or None."
    return GRAPHS.graphs[-1] if GRAPHS.graphs else None
