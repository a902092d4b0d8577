"""Miscellaneous small classes"""
import numpy as np

Numbers = (int, float, np.number)


class Count:
    "Like python 2's itertools.count, for Python 3 compatibility."
    def __init__(self):
        self.count = -1

    def next(self):
        "Increment self.count and return it"
        self.count += 1
        return self.count


class TrainLog(list):
    "Adds a `write` method to list so it's file-like and can replace stdout."
    def __init__(self, output=None, *, verbosity=0):
        list.__init__(self)
        self.verbosity = verbosity
        self.output = output

    def write(self, writ):
        "Append and potentially write the new line."
        if writ != "\n":
            self.append(writ.rstrip("\n"))
        if self.verbosity > 0 and self.output is not None:
            self.output.write(writ)

    def flush(self):
        "Flush the underlying output, if any."
        if self.output is not None:
            self.output.flush()

    def save(self, filename):
        "Writes every collected line to a text file."
        with open(filename, "w") as f:
            f.write("\n".join(self) + "\n")


class DictOfLists(dict):
    "Collects per-run result dicts into one dict of lists, keyed alike."

    def append(self, result):
        "Appends each value of a flat result dict to its list."
        if self and set(result) != set(self):
            raise KeyError("result keys %s differ from %s"
                           % (sorted(result), sorted(self)))
        for key, value in result.items():
            self.setdefault(key, []).append(value)

    def atindex(self, i):
        "The i-th appended result, as a plain dict."
        return {key: values[i] for key, values in self.items()}

    def to_arrays(self):
        "Converts all lists into arrays."
        for key, values in self.items():
            self[key] = np.array(values)
