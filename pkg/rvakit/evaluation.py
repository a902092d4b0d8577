"""Greedy evaluation: metrics, prediction dump and co-reference diagnostics.

Episodes may be spread over worker threads; per-episode results are
collected in episode order, so the worker count never changes the output.
"""
from concurrent.futures import ThreadPoolExecutor
from .small_scripts import lowest_argmax
from .globals import Precision
from .metrics import EvalRecord, summarize, metrics_table, dump_record
from .modules import ForwardContext
from .modules.answer import ranking
from .repr_conventions import table
from .synthetic.generator import PRONOUN

DIAGNOSTIC_KEYS = (
    "region_accuracy_ambiguous", "region_accuracy_unambiguous",
    "att_accuracy_ambiguous", "pair_accuracy", "skip_pair_accuracy",
    "skip_chance", "infer_recall", "infer_specificity", "pronoun_attention",
    "other_word_attention")


class EpisodeResult:
    "What evaluating one episode produced."
    def __init__(self, index, records, dump, traces, counts):
        self.index = index
        self.records = records
        self.dump = dump
        self.traces = traces
        self.counts = counts


def _tally(counts, key, hit):
    hits, total = counts.get(key, (0, 0))
    counts[key] = (hits + float(hit), total + 1)


def evaluate_episode(model, episode, index, ctx, with_traces=False):
    "Forward one episode greedily and score every round."
    out = model.forward(episode, ctx)
    records, dump, traces, counts = [], [], {}, {}
    for result in out.rounds:
        rnd = episode.rounds[result.round - 1]
        scores = result.scores.value
        records.append(EvalRecord(ranking(scores), rnd.gt_index,
                                  rnd.relevances))
        dump.append(dump_record(index, rnd.index, scores, rnd.gt_index,
                                rnd.relevances))
        if with_traces:
            traces[rnd.index] = result.trace
        decision, _, att_alpha = out.engine.decisions[rnd.index]
        if rnd.gt_region is not None:
            hit = lowest_argmax(result.state.alpha.value) == rnd.gt_region
            if rnd.ambiguous:
                _tally(counts, "region_accuracy_ambiguous", hit)
                _tally(counts, "att_accuracy_ambiguous",
                       lowest_argmax(att_alpha.value) == rnd.gt_region)
            else:
                _tally(counts, "region_accuracy_unambiguous", hit)
        if rnd.ambiguous:
            _tally(counts, "infer_recall", not decision.cond)
            t_p = model.pair_choice(out, rnd.index, ctx)
            _tally(counts, "pair_accuracy", t_p == rnd.antecedent)
            if rnd.is_skip:
                _tally(counts, "skip_pair_accuracy", t_p == rnd.antecedent)
                _tally(counts, "skip_chance", 1/rnd.index)
            words = episode.rounds[rnd.index - 1].question
            alpha = out.questions[rnd.index].alpha_ref.value
            pronoun = sum(a for w, a in zip(words, alpha) if w == PRONOUN)
            other = [a for w, a in zip(words, alpha) if w != PRONOUN]
            _tally(counts, "pronoun_attention", pronoun)
            _tally(counts, "other_word_attention", max(other) if other
                   else 0.0)
        else:
            _tally(counts, "infer_specificity", decision.cond)
    if with_traces:
        traces[0] = out.engine.cache[0][1]
    return EpisodeResult(index, records, dump, traces, counts)


class EvalResult:
    "Metrics, per-question dump lines, traces and diagnostics."
    def __init__(self, results):
        self.records = [r for res in results for r in res.records]
        self.dump = [line for res in results for line in res.dump]
        self.traces = {res.index: res.traces for res in results
                       if res.traces}
        totals = {}
        for res in results:
            for key, (hits, total) in res.counts.items():
                old = totals.get(key, (0.0, 0))
                totals[key] = (old[0] + hits, old[1] + total)
        self.diagnostics = {key: hits/total for key, (hits, total)
                            in totals.items() if total}
        self.diagnostic_counts = {key: total for key, (_, total)
                                  in totals.items()}
        self.metrics = summarize(self.records)

    def table(self):
        "Printable metrics and diagnostics."
        lines = metrics_table(self.metrics)
        lines += table([(key, self.diagnostics[key],
                         self.diagnostic_counts[key])
                        for key in DIAGNOSTIC_KEYS
                        if key in self.diagnostics],
                       "Co-reference diagnostics",
                       headers=("measure", "value", "count"))
        return "\n".join(lines)

    def save_dump(self, path):
        "Writes one JSON line per question."
        with open(path, "w") as f:
            f.write("\n".join(self.dump) + "\n")

    def save_diagnostics(self, path):
        "Writes diagnostics as key = value lines."
        with open(path, "w") as f:
            for key in DIAGNOSTIC_KEYS:
                if key in self.diagnostics:
                    f.write("%s = %r\n" % (key, self.diagnostics[key]))


def evaluate(model, episodes, *, workers=1, with_traces=False, verbosity=1):
    """Evaluates a model greedily with dropout off.

    Arguments
    ---------
    model : RvAModel
    episodes : list of Episode
    workers : int
        Threads to spread episodes over.
    with_traces : bool
        Keep every round's RecursionTrace.
    verbosity : int
        > 0 prints the metrics table.
    """
    ctx = ForwardContext.evaluation(model.config)

    def run(index):
        return evaluate_episode(model, episodes[index], index, ctx,
                                with_traces)

    with Precision(model.config.precision):
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(run, range(len(episodes))))
        else:
            results = [run(i) for i in range(len(episodes))]
    result = EvalResult(results)
    if verbosity > 0:
        print(result.table())
    return result
