"""Retrieval metrics over ranked candidate lists.

Ranks are 1-based. NDCG is truncated at the number of candidates with
positive relevance; records whose relevances are all zero score 0 and
still count toward the mean.
"""
import json
import numpy as np
from .exceptions import ValidationError
from .repr_conventions import table
from .small_scripts import stable_ranking

REPORT_KEYS = ("count", "mean", "mrr", "ndcg", "r@1", "r@5", "r@10")


class EvalRecord:
    """One answered question: the ranking, the ground truth, relevances.

    Arguments
    ---------
    ranking : sequence of int
        Candidate indices, rank 1 first; must be a permutation.
    gt_index : int
    relevances : sequence of float in [0, 1] (optional)
    """
    def __init__(self, ranking, gt_index, relevances=None):
        self.ranking = np.asarray(ranking, dtype=int)
        self.gt_index = int(gt_index)
        n = len(self.ranking)
        if sorted(self.ranking.tolist()) != list(range(n)):
            raise ValidationError("ranking is not a permutation of %i"
                                  " candidates" % n)
        if not 0 <= self.gt_index < n:
            raise ValidationError("ground-truth index %i outside %i"
                                  " candidates" % (self.gt_index, n))
        if relevances is not None:
            relevances = np.asarray(relevances, dtype=float)
            if len(relevances) != n:
                raise ValidationError("%i relevances for %i candidates"
                                      % (len(relevances), n))
            if (relevances < 0).any() or (relevances > 1).any():
                raise ValidationError("relevance outside [0, 1]")
        self.relevances = relevances

    @property
    def rank(self):
        "1-based rank of the ground truth."
        return int(np.flatnonzero(self.ranking == self.gt_index)[0]) + 1

    def __len__(self):
        return len(self.ranking)


def _ranks(records):
    if not records:
        raise ValidationError("no records to evaluate")
    return np.array([r.rank for r in records], dtype=float)


def mean_rank(records):
    "Average rank of the ground truth."
    return float(_ranks(records).mean())


def mrr(records):
    "Mean reciprocal rank of the ground truth."
    return float((1/_ranks(records)).mean())


def recall_at_k(records, k):
    "Fraction of records with the ground truth in the top k."
    ranks = _ranks(records)
    if k < 1:
        raise ValidationError("k must be at least 1, not %i" % k)
    if any(k > len(r) for r in records):
        raise ValidationError("k = %i exceeds the candidate count" % k)
    return float((ranks <= k).mean())


def record_ndcg(record):
    "NDCG of one record."
    if record.relevances is None:
        raise ValidationError("NDCG needs relevances")
    rel = record.relevances
    k = int((rel > 0).sum())
    if not k:
        return 0.0
    discounts = 1/np.log2(np.arange(2, k + 2))
    dcg = (rel[record.ranking[:k]] * discounts).sum()
    idcg = (np.sort(rel)[::-1][:k] * discounts).sum()
    return float(dcg / idcg)


def ndcg(records):
    "Mean NDCG."
    if not records:
        raise ValidationError("no records to evaluate")
    return float(np.mean([record_ndcg(r) for r in records]))


def summarize(records):
    "Every report metric in one dict; NDCG only when relevances exist."
    out = {"count": len(records), "mean": mean_rank(records),
           "mrr": mrr(records)}
    if all(r.relevances is not None for r in records):
        out["ndcg"] = ndcg(records)
    smallest = min(len(r) for r in records)
    for k in (1, 5, 10):
        if k <= smallest:
            out["r@%i" % k] = recall_at_k(records, k)
    return out


def metrics_table(metrics, title="Retrieval metrics"):
    "Lines of a printable table of a summarize() dict."
    return table([(key, metrics[key]) for key in REPORT_KEYS
                  if key in metrics], title)


def write_report(path, metrics):
    "Writes a key = value metrics report with stable key order."
    with open(path, "w") as f:
        for key in REPORT_KEYS:
            if key in metrics:
                value = metrics[key]
                f.write("%s = %s\n" % (key, value if key == "count"
                                       else repr(float(value))))


def read_report(path):
    "Inverse of write_report."
    out = {}
    with open(path) as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValidationError("%s line %i: expected 'key = value'"
                                      % (path, lineno))
            key = key.strip()
            out[key] = int(value) if key == "count" else float(value)
    return out


def dump_record(episode, round_, scores, gt_index, relevances=None):
    "One prediction-dump line (JSON)."
    scores = np.asarray(scores, dtype=float)
    ranking = stable_ranking(scores)
    return json.dumps({"episode": episode, "round": round_,
                       "scores": [float(s) for s in scores],
                       "ranking": [int(i) for i in ranking],
                       "gt_index": int(gt_index),
                       "relevances": (None if relevances is None
                                      else [float(r) for r in relevances])},
                      sort_keys=True)


def records_from_dump(path):
    "EvalRecords from a prediction dump file."
    records = []
    with open(path) as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                data = json.loads(line)
                records.append(EvalRecord(data["ranking"], data["gt_index"],
                                          data.get("relevances")))
            except (ValueError, KeyError, TypeError) as err:
                raise ValidationError("%s line %i: %s" % (path, lineno, err)
                                      ) from None
    return records
