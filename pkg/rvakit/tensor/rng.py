"Counter-based random streams keyed by (seed, purpose, indices)"
import numpy as np
from ..exceptions import ValidationError

PURPOSES = {"init": 0, "dropout": 1, "gumbel": 2, "data": 3}


class Rng:
    """One random stream.

    The stream is numpy's Philox4x64 bit generator keyed from
    (seed, purpose code, *indices) through a SeedSequence, so equal keys
    give equal draws regardless of how many other streams were used.

    Arguments
    ---------
    seed : int >= 0
    purpose : str
        One of "init", "dropout", "gumbel" or "data".
    indices : ints >= 0
        Further key parts, e.g. (epoch, episode index).
    """
    def __init__(self, seed, purpose, *indices):
        if purpose not in PURPOSES:
            raise ValidationError("unknown random stream purpose '%s'"
                                  % purpose)
        if seed < 0 or any(i < 0 for i in indices):
            raise ValidationError("random stream keys must be non-negative")
        self.seed = int(seed)
        self.purpose = purpose
        self.indices = tuple(int(i) for i in indices)
        entropy = np.random.SeedSequence(
            [self.seed, PURPOSES[purpose]] + list(self.indices))
        self.bitgen = np.random.Philox(
            key=entropy.generate_state(2, dtype=np.uint64))
        self.generator = np.random.Generator(self.bitgen)

    def __repr__(self):
        return "Rng(%i, %r%s)" % (self.seed, self.purpose,
                                  "".join(", %i" % i for i in self.indices))

    def spawn(self, *indices):
        "An independent stream keyed by this one's key plus indices."
        return Rng(self.seed, self.purpose, *(self.indices + indices))

    def random(self, shape=None):
        "Uniform draws in [0, 1)."
        return self.generator.random(shape)

    def uniform(self, low, high, shape=None):
        "Uniform draws in [low, high)."
        return self.generator.uniform(low, high, shape)

    def normal(self, scale=1.0, shape=None):
        "Zero-mean Gaussian draws."
        return self.generator.normal(0.0, scale, shape)

    def integers(self, low, high=None, size=None):
        "Integers in [low, high)."
        return self.generator.integers(low, high, size)

    def choice(self, options, size=None, replace=True):
        "Draws from a sequence (or range(n) for an int)."
        return self.generator.choice(options, size=size, replace=replace)

    def permutation(self, n):
        "A random ordering of range(n)."
        return self.generator.permutation(n)
