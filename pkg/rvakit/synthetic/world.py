"Symbolic regions and their deterministic feature vectors"
from functools import lru_cache
import numpy as np
from ..exceptions import ConfigError
from ..small_scripts import round_sig
from ..tensor import Rng

CATEGORIES = ("lamp", "cup", "dog", "cat", "car", "chair", "book", "tree",
              "bird", "phone", "clock", "plate", "bottle", "vase", "horse",
              "boat")
COLORS = ("red", "blue", "green", "yellow", "white", "black", "brown",
          "pink")
SIZES = ("small", "medium", "large")
STATES = ("on", "off", "open", "closed")
ROWS = ("top", "middle", "bottom")
COLUMNS = ("left", "center", "right")
POSITIONS = tuple((row, col) for row in ROWS for col in COLUMNS)

FEATURE_KEY = 7919  # fixed basis, independent of any episode seed


class Region:
    "One object in a synthetic image, described by attribute names."
    ATTRIBUTES = ("category", "color", "size", "state", "position")

    def __init__(self, category, color, size, state, position):
        self.category = category
        self.color = color
        self.size = size
        self.state = state
        self.position = tuple(position)

    def __eq__(self, other):
        return isinstance(other, Region) and self.asdict() == other.asdict()

    def __repr__(self):
        return "Region(%s)" % ", ".join("%s=%r" % kv
                                        for kv in self.asdict().items())

    def asdict(self):
        "Attribute names, JSON-ready."
        return {"category": self.category, "color": self.color,
                "size": self.size, "state": self.state,
                "position": list(self.position)}

    @classmethod
    def fromdict(cls, attrs):
        "Inverse of asdict."
        return cls(attrs["category"], attrs["color"], attrs["size"],
                   attrs["state"], attrs["position"])

    def code(self, num_categories):
        "Concatenated one-hot attribute code."
        parts = [(CATEGORIES[:num_categories], self.category),
                 (COLORS, self.color), (SIZES, self.size),
                 (STATES, self.state), (POSITIONS, self.position)]
        out = []
        for names, value in parts:
            onehot = np.zeros(len(names))
            onehot[names.index(value)] = 1
            out.append(onehot)
        return np.concatenate(out)


def code_width(num_categories):
    "Length of Region.code."
    return num_categories + len(COLORS) + len(SIZES) + len(STATES) \
        + len(POSITIONS)


@lru_cache(maxsize=None)
def feature_basis(num_categories, d_v):
    """A fixed (d_v, code width) Gaussian map of full column rank.

    Distinct attribute tuples therefore get distinct noiseless features.
    """
    width = code_width(num_categories)
    if d_v < width:
        raise ConfigError("d_v = %i cannot encode %i attribute dimensions"
                          % (d_v, width))
    basis = Rng(FEATURE_KEY, "data", num_categories, d_v).normal(
        1/np.sqrt(d_v), (d_v, width))
    if np.linalg.matrix_rank(basis) < width:  # pragma: no cover
        raise ConfigError("degenerate feature basis for d_v = %i" % d_v)
    return basis


class World:
    """The regions of one synthetic image and their feature matrix.

    Topic regions have categories that occur exactly once, so naming the
    category identifies the region.
    """
    def __init__(self, regions, features, topics):
        self.regions = regions
        self.features = features
        self.topics = topics

    def __len__(self):
        return len(self.regions)

    def find(self, category):
        "Indices of regions of a category."
        return [i for i, r in enumerate(self.regions)
                if r.category == category]

    def categories(self):
        "Set of categories present."
        return {r.category for r in self.regions}


def region_features(regions, num_categories, d_v, jitter, rng):
    "Basis-mapped attribute codes plus Gaussian jitter, to 9 digits."
    basis = feature_basis(num_categories, d_v)
    codes = np.array([r.code(num_categories) for r in regions])
    features = codes @ basis.T
    if jitter:
        features = features + rng.normal(jitter, features.shape)
    return np.vectorize(round_sig)(features)


def random_region(rng, category):
    "A region of a category with random other attributes."
    return Region(category, COLORS[rng.integers(len(COLORS))],
                  SIZES[rng.integers(len(SIZES))],
                  STATES[rng.integers(len(STATES))],
                  POSITIONS[rng.integers(len(POSITIONS))])


def generate_world(rng, config):
    """Random topic and distractor regions for one episode.

    Topic categories are distinct and never reused by distractors.
    """
    k, n_cat, n_top = (config.num_regions, config.num_categories,
                       config.num_topics)
    if n_cat > len(CATEGORIES):
        raise ConfigError("at most %i categories exist, %i requested"
                          % (len(CATEGORIES), n_cat))
    if n_top > k:
        raise ConfigError("%i topic objects do not fit in %i regions"
                          % (n_top, k))
    if k > n_top and n_cat <= n_top:
        raise ConfigError("no categories left for distractors (%i"
                          " categories, %i topics)" % (n_cat, n_top))
    chosen = rng.permutation(n_cat)
    topics = [CATEGORIES[i] for i in chosen[:n_top]]
    distractors = [CATEGORIES[i] for i in chosen[n_top:]]
    regions = [random_region(rng, c) for c in topics]
    regions += [random_region(rng, distractors[rng.integers(len(distractors))])
                for _ in range(k - n_top)]
    order = rng.permutation(k)
    regions = [regions[i] for i in order]
    features = region_features(regions, n_cat, config.d_v, config.jitter, rng)
    topic_regions = sorted(int(np.where(order == i)[0][0])
                           for i in range(n_top))
    return World(regions, features, topic_regions)
