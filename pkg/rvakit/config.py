"""Run and dialog-generator configuration.

Configuration files are plain text, one `key = value` per line; blank
lines and text after `#` are ignored. Unknown keys are rejected and
unspecified keys keep their defaults.
"""
import os
from dataclasses import dataclass, fields, replace, asdict
from .exceptions import ConfigError
from .globals import precision_dtype
from .small_scripts import parse_bool

ENV_DIR = os.sep.join([os.path.dirname(__file__), "env"])


def _parse_value(cls, key, raw, lineno):
    "Converts a raw string to the type of cls's field `key`."
    kind = {f.name: f.type for f in fields(cls)}[key]
    kind = {"int": int, "float": float, "bool": bool, "str": str}.get(kind,
                                                                    kind)
    try:
        if kind is bool:
            return parse_bool(raw)
        return kind(raw)
    except (ValueError, ConfigError):
        raise ConfigError("line %i: %s = '%s' is not a valid %s"
                          % (lineno, key, raw, kind.__name__)) from None


def parse_config(text, cls, source="<string>"):
    "Builds a cls instance from the text of a key = value file."
    known = {f.name for f in fields(cls)}
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, raw = line.partition("=")
        key, raw = key.strip(), raw.strip()
        if not sep or not key:
            raise ConfigError("%s line %i: expected 'key = value', got '%s'"
                              % (source, lineno, line))
        if key not in known:
            raise ConfigError("%s line %i: unknown key '%s' for %s"
                              % (source, lineno, key, cls.__name__))
        if key in values:
            raise ConfigError("%s line %i: duplicate key '%s'"
                              % (source, lineno, key))
        values[key] = _parse_value(cls, key, raw, lineno)
    return cls(**values)


def load_config(path, cls=None):
    "Reads a config file; cls defaults to RunConfig."
    cls = cls or RunConfig
    try:
        with open(path) as f:
            text = f.read()
    except OSError as err:
        raise ConfigError("cannot read config %s: %s" % (path, err)) from None
    return parse_config(text, cls, source=path)


def format_config(config):
    "The key = value text of a config, in field order."
    lines = []
    for key, value in asdict(config).items():
        if isinstance(value, bool):
            value = "true" if value else "false"
        elif isinstance(value, float):
            value = repr(value)
        lines.append("%s = %s" % (key, value))
    return "\n".join(lines) + "\n"


def write_config(config, path):
    "Writes a config file that load_config reads back identically."
    with open(path, "w") as f:
        f.write(format_config(config))


class _ConfigMixin:
    "Shared helpers for the config dataclasses."

    def replace(self, **changes):
        "A copy with some keys changed (and revalidated)."
        return replace(self, **changes)

    def asdict(self):
        "The config as a plain dict."
        return asdict(self)

    @classmethod
    def fromdict(cls, values):
        "Inverse of asdict; rejects unknown keys."
        unknown = set(values) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigError("unknown %s keys %s"
                              % (cls.__name__, sorted(unknown)))
        return cls(**values)

    def _positive(self, *names):
        for name in names:
            if getattr(self, name) < 1:
                raise ConfigError("%s must be positive, not %s"
                                  % (name, getattr(self, name)))


@dataclass(frozen=True)
class RunConfig(_ConfigMixin):
    """Model dimensions, optimizer schedule, ablations and data paths.

    Dimension and learning-rate defaults are the full-scale ones; the
    desk-scale files in rvakit/env shrink d_emb and d_h.
    """
    seed: int = 0
    d_emb: int = 300
    d_h: int = 512
    d_v: int = 64
    num_regions: int = 36
    num_candidates: int = 100
    lr_initial: float = 1e-3
    lr_decay: float = 0.5
    lr_floor: float = 5e-5
    dropout: float = 0.5
    tau: float = 1.0
    epochs: int = 20
    batch_size: int = 32
    rv_only: bool = False
    no_filter: bool = False
    pair_last: bool = False
    attend_hidden: bool = False
    precision: str = "float32"
    train_data: str = ""
    test_data: str = ""

    def __post_init__(self):
        self._positive("d_emb", "d_h", "d_v", "num_regions",
                       "num_candidates", "batch_size")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")
        if self.epochs < 0:
            raise ConfigError("epochs must be non-negative")
        if not 0 < self.lr_floor <= self.lr_initial:
            raise ConfigError("need 0 < lr_floor (%g) <= lr_initial (%g)"
                              % (self.lr_floor, self.lr_initial))
        if not 0 < self.lr_decay <= 1:
            raise ConfigError("lr_decay must be in (0, 1]")
        if not 0 <= self.dropout < 1:
            raise ConfigError("dropout must be in [0, 1)")
        if self.tau <= 0:
            raise ConfigError("tau must be positive")
        precision_dtype(self.precision)

    @property
    def d_q(self):
        "Width of the self-attended question features."
        return 2*self.d_h if self.attend_hidden else self.d_emb

    def learning_rate(self, epoch):
        "The scheduled learning rate for a (0-based) epoch."
        return max(self.lr_floor, self.lr_initial * self.lr_decay**epoch)


@dataclass(frozen=True)
class DialogConfig(_ConfigMixin):
    "Parameters of the synthetic co-reference dialog generator."
    num_regions: int = 36
    num_rounds: int = 10
    d_v: int = 64
    num_candidates: int = 100
    num_categories: int = 12
    num_topics: int = 4
    ambiguity_rate: float = 0.38
    skip_rate: float = 0.2
    jitter: float = 0.05
    near_misses: int = 4

    def __post_init__(self):
        self._positive("num_regions", "num_rounds", "d_v", "num_candidates",
                       "num_categories", "num_topics")
        if self.num_rounds > 10:
            raise ConfigError("num_rounds must be at most 10")
        for name in ("ambiguity_rate", "skip_rate"):
            if not 0 <= getattr(self, name) <= 1:
                raise ConfigError("%s must be in [0, 1]" % name)
        if self.jitter < 0 or self.near_misses < 0:
            raise ConfigError("jitter and near_misses must be non-negative")


def default_config(name="default"):
    "Loads one of the config files shipped in rvakit/env."
    cls = DialogConfig if name.startswith("dialog") else RunConfig
    return load_config(os.sep.join([ENV_DIR, name + ".cfg"]), cls)
