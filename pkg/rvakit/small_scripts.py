"""Assorted helper methods"""
import numpy as np
from .exceptions import NonFiniteError, ConfigError

TRUE_STRINGS = ("true", "yes", "1", "on")
FALSE_STRINGS = ("false", "no", "0", "off")


def check_finite(op, value):
    "Raises NonFiniteError if value holds a NaN or Inf."
    if not np.isfinite(value).all():
        raise NonFiniteError(op)


def lowest_argmax(values):
    "Index of the largest value; ties go to the lowest index."
    return int(np.argmax(values))  # numpy returns the first occurrence


def stable_ranking(scores):
    "Candidate indices by descending score, ties broken by index."
    return np.argsort(-np.asarray(scores, dtype=float), kind="stable")


def round_sig(x, digits=9):
    "Rounds a float to a number of significant digits."
    return float("%.*g" % (digits, x))


def parse_bool(string):
    "Parses a config boolean."
    lowered = string.strip().lower()
    if lowered in TRUE_STRINGS:
        return True
    if lowered in FALSE_STRINGS:
        return False
    raise ConfigError("'%s' is not a boolean" % string)


def one_hot(index, length, dtype=float):
    "A vector of zeros with a single one."
    vec = np.zeros(length, dtype=dtype)
    vec[index] = 1
    return vec


def strip_pads(indices, pad=0):
    """Removes trailing pads from a list of token indices.

    Returns None if a pad is followed by a real token.
    """
    indices = list(indices)
    length = len(indices)
    while length and indices[length-1] == pad:
        length -= 1
    if pad in indices[:length]:
        return None
    return indices[:length]
