"""Dataset files: a JSON header line, then one JSON episode per line.

Header: {"schema": "rvakit.dialog", "version": 1, "episodes": N}.
Episode fields: seed, index, caption, caption_region, topics,
regions (attribute dicts), features (K lists of d_v floats) and rounds
(question, answer, qtype, ambiguous, antecedent, gt_region, candidates,
gt_index, relevances).
"""
import json
import numpy as np
from ..exceptions import DatasetError
from .world import Region, World
from .generator import Episode, DialogRound

SCHEMA = "rvakit.dialog"
VERSION = 1
ROUND_FIELDS = ("question", "answer", "qtype", "ambiguous", "antecedent",
                "gt_region", "candidates", "gt_index", "relevances")


def episode_to_dict(episode):
    "JSON-ready dict of an episode."
    return {"seed": episode.seed, "index": episode.index,
            "caption": episode.caption,
            "caption_region": episode.caption_region,
            "topics": list(episode.world.topics),
            "regions": [r.asdict() for r in episode.world.regions],
            "features": [[float(x) for x in row]
                         for row in episode.world.features],
            "rounds": [{name: getattr(rnd, name) for name in ROUND_FIELDS}
                       for rnd in episode.rounds]}


def episode_from_dict(data):
    "Inverse of episode_to_dict; raises KeyError/TypeError/ValueError."
    regions = [Region.fromdict(attrs) for attrs in data["regions"]]
    features = np.array(data["features"], dtype=float)
    if features.ndim != 2 or len(features) != len(regions):
        raise ValueError("features must be one row per region")
    world = World(regions, features, list(data["topics"]))
    rounds = []
    for t, rnd in enumerate(data["rounds"], 1):
        rounds.append(DialogRound(t, *[rnd[name] for name in ROUND_FIELDS]))
        if not 0 <= rounds[-1].gt_index < len(rounds[-1].candidates):
            raise ValueError("round %i ground truth out of range" % t)
    return Episode(data["seed"], data["index"], world, data["caption"],
                   data["caption_region"], rounds)


def dumps(episodes):
    "The text of a dataset file."
    lines = [json.dumps({"schema": SCHEMA, "version": VERSION,
                         "episodes": len(episodes)}, sort_keys=True)]
    lines += [json.dumps(episode_to_dict(e), sort_keys=True)
              for e in episodes]
    return "\n".join(lines) + "\n"


def loads(text):
    """Episodes from dataset text.

    DatasetError carries the 0-based index of the offending episode.
    """
    lines = text.splitlines()
    if not lines:
        raise DatasetError("empty dataset file")
    try:
        header = json.loads(lines[0])
    except ValueError:
        raise DatasetError("header is not JSON") from None
    if not isinstance(header, dict) or header.get("schema") != SCHEMA:
        raise DatasetError("not an %s file" % SCHEMA)
    if header.get("version") != VERSION:
        raise DatasetError("unsupported version %r" % header.get("version"))
    expected = header.get("episodes")
    if not isinstance(expected, int) or expected < 0:
        raise DatasetError("header episode count %r is invalid" % expected)
    body = [line for line in lines[1:] if line.strip()]
    if len(body) < expected:
        raise DatasetError("truncated: header promises %i episodes, found %i"
                           % (expected, len(body)), record=len(body))
    if len(body) > expected:
        raise DatasetError("header promises %i episodes, found %i"
                           % (expected, len(body)), record=expected)
    episodes = []
    for i, line in enumerate(body):
        try:
            episodes.append(episode_from_dict(json.loads(line)))
        except (ValueError, KeyError, TypeError, IndexError) as err:
            raise DatasetError("%s: %s" % (type(err).__name__, err),
                               record=i) from None
    return episodes


def save(path, episodes):
    "Writes a dataset file."
    with open(path, "w") as f:
        f.write(dumps(episodes))


def load(path):
    "Reads a dataset file."
    try:
        with open(path) as f:
            text = f.read()
    except OSError as err:
        raise DatasetError("cannot read %s: %s" % (path, err)) from None
    return loads(text)
