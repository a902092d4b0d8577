"Repository for representation standards"
import numpy as np
from .small_classes import Numbers


def strify(val):
    "Turns a value into as pretty a string as possible."
    if isinstance(val, (bool, np.bool_)):
        return str(bool(val))
    if isinstance(val, Numbers):
        if np.isfinite(val) and float(val) == int(val) and abs(val) < 1e6:
            return "%i" % val
        return "%.4g" % val
    if val is None:
        return "-"
    return str(val)


def arraystr(values, fmt="%.3f", maxlen=12):
    "Compact string for a 1-d array, eliding the middle of long ones."
    values = np.asarray(values).ravel()
    parts = [fmt % v for v in values]
    if len(parts) > maxlen:
        half = maxlen // 2
        parts = parts[:half] + ["..."] + parts[-half:]
    return "[%s]" % " ".join(parts)


def table(rows, title=None, headers=None):
    """Returns list of table lines.

    Arguments
    ---------
    rows : list of tuples
        Each tuple is one row; entries go through strify.
    title : str
        Printed above the table, underlined with dashes.
    headers : tuple of str
        Column headers.
    """
    lines = []
    strrows = [tuple(strify(v) for v in row) for row in rows]
    if headers:
        strrows.insert(0, tuple(headers))
    if title:
        lines += ["", title, "-"*len(title)]
    if not strrows:
        return lines + ["(none)"]
    widths = [max(len(row[i]) for row in strrows if i < len(row))
              for i in range(max(len(row) for row in strrows))]
    for row in strrows:
        cells = [row[0].ljust(widths[0])]
        cells += [cell.rjust(widths[i+1]) for i, cell in enumerate(row[1:])]
        lines.append("  ".join(cells).rstrip())
    return lines


class ReprMixin:
    "This class combines various printing methods for easier adoption."
    def str_without(self, excluded=()):  # pylint: disable=unused-argument
        "Overload in subclasses."
        raise NotImplementedError

    def __repr__(self):
        return "%s.%s(%s)" % (self.__class__.__module__.split(".")[0],
                              self.__class__.__name__, self.str_without())

    def __str__(self):
        return self.str_without()
