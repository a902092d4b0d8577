"""Multi-seed comparison of recursive attention against its ablation.

For every seed a full model and an rv_only model (question-guided
attention only) are trained on the same episodes and evaluated on the
same test episodes; the per-seed ambiguous-question region accuracies
are compared with a one-sided paired t-test.
"""
import numpy as np
from scipy.stats import ttest_rel
from ..evaluation import evaluate
from ..repr_conventions import table
from ..small_classes import DictOfLists
from ..training import train

SKIP_THRESHOLD = 0.8
COLUMNS = ("seed", "rva_accuracy", "rv_only_accuracy", "gap",
           "skip_pair_accuracy", "skip_chance", "rva_mrr", "rv_only_mrr")


class ExperimentResult:
    """Per-seed measurements and the paired test over seeds.

    Attributes
    ----------
    runs : DictOfLists
        One list per COLUMNS entry, one element per seed.
    p_value : float
        One-sided p-value for "full RvA is more accurate"; nan when every
        gap is identical.
    """
    def __init__(self, runs):
        self.runs = runs
        full = np.asarray(runs["rva_accuracy"], dtype=float)
        ablated = np.asarray(runs["rv_only_accuracy"], dtype=float)
        if len(full) > 1 and np.ptp(full - ablated) > 0:
            self.p_value = float(ttest_rel(full, ablated,
                                           alternative="greater").pvalue)
        else:
            self.p_value = float("nan")

    @property
    def wins_every_seed(self):
        "Whether full RvA is strictly more accurate on each seed."
        return all(g > 0 for g in self.runs["gap"])

    @property
    def skip_pair_accuracy(self):
        "Mean over seeds of trained Pair's accuracy on skip rounds."
        values = np.asarray(self.runs["skip_pair_accuracy"], dtype=float)
        return float(values.mean()) if len(values) else float("nan")

    def passed(self, alpha=0.01, skip_threshold=SKIP_THRESHOLD):
        "Strict win on every seed, a significant gap and skip pairing."
        return (self.wins_every_seed and self.p_value < alpha
                and self.skip_pair_accuracy >= skip_threshold)

    def failures(self, alpha=0.01, skip_threshold=SKIP_THRESHOLD):
        "Why passed() is False, one phrase per unmet criterion."
        out = []
        if not self.wins_every_seed:
            out.append("rv_only matched or beat RvA on some seed")
        if not self.p_value < alpha:
            out.append("gap not significant (p = %.3g)" % self.p_value)
        if not self.skip_pair_accuracy >= skip_threshold:
            out.append("skip pairing %.3g below %.2g"
                       % (self.skip_pair_accuracy, skip_threshold))
        return out

    def table(self):
        "Printable per-seed table and summary."
        rows = [tuple(self.runs.atindex(i)[c] for c in COLUMNS)
                for i in range(len(self.runs["seed"]))]
        lines = table(rows, "Ambiguous-question region accuracy by seed",
                      ("seed", "RvA", "rv_only", "gap", "skip pair",
                       "chance", "RvA MRR", "rv_only MRR"))
        lines += ["", "mean gap %.4f, paired t-test p = %.3g (one-sided)"
                  % (float(np.mean(self.runs["gap"])), self.p_value)]
        return "\n".join(lines)


def run_seed(config, train_episodes, test_episodes, verbosity=0):
    "Trains both variants on one seed; returns a flat result dict."
    out = {"seed": config.seed}
    for label, variant in (("rva", config.replace(rv_only=False)),
                           ("rv_only", config.replace(rv_only=True))):
        checkpoint = train(variant, train_episodes,
                           verbosity=max(verbosity - 1, 0))
        result = evaluate(checkpoint.model(), test_episodes,
                          verbosity=max(verbosity - 1, 0))
        out[label + "_accuracy"] = result.diagnostics.get(
            "region_accuracy_ambiguous", 0.0)
        out[label + "_mrr"] = result.metrics["mrr"]
        if label == "rva":
            out["skip_pair_accuracy"] = result.diagnostics.get(
                "skip_pair_accuracy", float("nan"))
            out["skip_chance"] = result.diagnostics.get("skip_chance",
                                                        float("nan"))
    out["gap"] = out["rva_accuracy"] - out["rv_only_accuracy"]
    return {key: out[key] for key in COLUMNS}


def experiment(config, train_episodes, test_episodes, seeds=5, verbosity=1):
    """Runs the ablation comparison over seeds config.seed .. + seeds-1.

    Arguments
    ---------
    config : RunConfig
    train_episodes, test_episodes : list of Episode
    seeds : int
        Number of consecutive seeds.
    verbosity : int
        > 0 prints one line per seed and the final table.

    Returns
    -------
    ExperimentResult
    """
    runs = DictOfLists()
    for seed in range(config.seed, config.seed + seeds):
        runs.append(run_seed(config.replace(seed=seed), train_episodes,
                             test_episodes, verbosity))
        if verbosity > 0:
            last = runs.atindex(-1)
            print("seed %i: RvA %.4f, rv_only %.4f, skip pairing %.4f"
                  % (seed, last["rva_accuracy"], last["rv_only_accuracy"],
                     last["skip_pair_accuracy"]))
    result = ExperimentResult(runs)
    if verbosity > 0:
        print(result.table())
    return result
