"""Command-line interface: python -m rvakit <command> ...

Exit status is 0 on success, 1 for invalid input (ValidationError or a
usage error), 2 for numerical failures (NumericalError) and 3 when a file
cannot be read or written (OSError).
"""
import argparse
import os
import sys
from .config import RunConfig, DialogConfig, load_config, default_config
from .evaluation import evaluate
from .exceptions import ValidationError, NumericalError, ConfigError
from .globals import Precision
from .interactive import save_traces, trace_to_dot, trace_to_text
from .metrics import EvalRecord, summarize, metrics_table, write_report
from .metrics import dump_record
from .modules import ForwardContext
from .small_classes import TrainLog
from .small_scripts import stable_ranking
from .synthetic import ScriptedResolver, generate_dataset, dataset
from .tools.experiment import experiment
from .tools.gradcheck import gradcheck
from .training import Checkpoint, train, CHECKPOINT_NAME

TRAIN_LOG_NAME = "train_log.txt"


class ArgumentParser(argparse.ArgumentParser):
    "Reports usage errors with exit status 1, like other invalid input."
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, "%s: error: %s\n" % (self.prog, message))


def _config(arg, cls):
    "A config from a file path, or by name from rvakit/env."
    if arg is None:
        return default_config("dialog" if cls is DialogConfig else "default")
    if os.path.exists(arg):
        return load_config(arg, cls)
    try:
        config = default_config(arg)
    except ConfigError:
        raise ConfigError("no config file or shipped config named '%s'"
                          % arg) from None
    if not isinstance(config, cls):
        raise ConfigError("'%s' is not a %s" % (arg, cls.__name__))
    return config


def cmd_gen_data(args):
    "Generates a synthetic dialog dataset."
    config = _config(args.config, DialogConfig)
    episodes = generate_dataset(args.seed, args.episodes, config)
    dataset.save(args.out, episodes)
    if args.verbosity > 0:
        print("Wrote %i episodes to %s." % (len(episodes), args.out))


def cmd_train(args):
    "Trains a model, writing a checkpoint after every epoch."
    resume = Checkpoint.load(args.resume) if args.resume else None
    if args.config is None and resume is not None:
        config = resume.config
    else:
        config = _config(args.config, RunConfig)
    data = args.data or config.train_data
    if not data:
        raise ConfigError("no training data: pass --data or set train_data")
    os.makedirs(args.out_dir, exist_ok=True)
    log = TrainLog()
    checkpoint = train(config, dataset.load(data), resume=resume,
                       out_dir=args.out_dir, verbosity=args.verbosity,
                       log=log, embeddings=args.embeddings)
    log.save(os.path.join(args.out_dir, TRAIN_LOG_NAME))
    checkpoint.save(os.path.join(args.out_dir, CHECKPOINT_NAME))


def cmd_eval(args):
    "Evaluates a checkpoint greedily."
    checkpoint = Checkpoint.load(args.checkpoint)
    data = args.data or checkpoint.config.test_data
    if not data:
        raise ConfigError("no test data: pass --data or set test_data")
    episodes = dataset.load(data)
    result = evaluate(checkpoint.model(), episodes, workers=args.workers,
                      with_traces=bool(args.traces),
                      verbosity=args.verbosity)
    write_report(args.report, result.metrics)
    if args.dump:
        result.save_dump(args.dump)
    if args.diagnostics:
        result.save_diagnostics(args.diagnostics)
    if args.traces:
        for index, traces in sorted(result.traces.items()):
            save_traces(traces, args.traces, index)


def cmd_gradcheck(args):
    "Finite-difference gradient check; fails with exit status 2."
    config = _config(args.config or "gradcheck", RunConfig)
    report = gradcheck(config, verbosity=args.verbosity)
    report.check()


def cmd_trace(args):
    "Writes the recursion trace of one episode round as DOT and text."
    checkpoint = Checkpoint.load(args.checkpoint)
    episodes = dataset.load(args.data)
    if not 0 <= args.episode < len(episodes):
        raise ValidationError("episode %i outside 0..%i"
                              % (args.episode, len(episodes) - 1))
    episode = episodes[args.episode]
    model = checkpoint.model()
    with Precision(model.config.precision):
        out = model.forward(episode, ForwardContext.evaluation(model.config))
    t = args.round if args.round is not None else len(episode)
    if not 1 <= t <= len(episode):
        raise ValidationError("round %i outside 1..%i" % (t, len(episode)))
    trace = out.rounds[t-1].trace
    with open(args.dot, "w") as f:
        f.write(trace_to_dot(trace, "episode_%i_round_%i"
                             % (args.episode, t)))
    text = trace_to_text(trace)
    if args.out:
        with open(args.out, "w") as f:
            f.write("\n".join(text) + "\n")
    if args.verbosity > 0:
        print("\n".join(text))


def cmd_oracle(args):
    "Scores a dataset with the scripted resolver."
    resolver = ScriptedResolver()
    records, lines = [], []
    for index, episode in enumerate(dataset.load(args.data)):
        for rnd in episode.rounds:
            scores = resolver.scores(episode, rnd.index)
            records.append(EvalRecord(stable_ranking(scores), rnd.gt_index,
                                      rnd.relevances))
            lines.append(dump_record(index, rnd.index, scores, rnd.gt_index,
                                     rnd.relevances))
    metrics = summarize(records)
    write_report(args.report, metrics)
    if args.dump:
        with open(args.dump, "w") as f:
            f.write("\n".join(lines) + "\n")
    if args.verbosity > 0:
        print("\n".join(metrics_table(metrics, "Scripted resolver")))


def cmd_experiment(args):
    "Full model against the rv_only ablation over several seeds."
    config = _config(args.config, RunConfig)
    result = experiment(config, dataset.load(args.train),
                        dataset.load(args.test), seeds=args.seeds,
                        verbosity=args.verbosity)
    if not result.passed():
        raise NumericalError("experiment failed: %s"
                             % "; ".join(result.failures()))


def build_parser():
    "The argparse parser for every command."
    parser = ArgumentParser(
        prog="rvakit", description="Recursive visual attention for"
                                   " synthetic visual dialog.")
    parser.add_argument("-v", "--verbosity", type=int, default=1)
    commands = parser.add_subparsers(dest="command", required=True)

    sub = commands.add_parser("gen-data", help=cmd_gen_data.__doc__)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--episodes", type=int, required=True)
    sub.add_argument("--config", help="dialog config file or name")
    sub.add_argument("--out", required=True)
    sub.set_defaults(func=cmd_gen_data)

    sub = commands.add_parser("train", help=cmd_train.__doc__)
    sub.add_argument("--config", help="run config file or name")
    sub.add_argument("--data")
    sub.add_argument("--out-dir", required=True)
    sub.add_argument("--resume", metavar="CHECKPOINT")
    sub.add_argument("--embeddings", help="word-vector text file")
    sub.set_defaults(func=cmd_train)

    sub = commands.add_parser("eval", help=cmd_eval.__doc__)
    sub.add_argument("--checkpoint", required=True)
    sub.add_argument("--data")
    sub.add_argument("--report", required=True)
    sub.add_argument("--dump")
    sub.add_argument("--traces", metavar="DIR")
    sub.add_argument("--diagnostics")
    sub.add_argument("--workers", type=int, default=1)
    sub.set_defaults(func=cmd_eval)

    sub = commands.add_parser("gradcheck", help=cmd_gradcheck.__doc__)
    sub.add_argument("--config")
    sub.set_defaults(func=cmd_gradcheck)

    sub = commands.add_parser("trace", help=cmd_trace.__doc__)
    sub.add_argument("--checkpoint", required=True)
    sub.add_argument("--data", required=True)
    sub.add_argument("--episode", type=int, required=True)
    sub.add_argument("--round", type=int)
    sub.add_argument("--dot", required=True)
    sub.add_argument("--out", metavar="PATH", help="text trace file")
    sub.set_defaults(func=cmd_trace)

    sub = commands.add_parser("oracle", help=cmd_oracle.__doc__)
    sub.add_argument("--data", required=True)
    sub.add_argument("--report", required=True)
    sub.add_argument("--dump")
    sub.set_defaults(func=cmd_oracle)

    sub = commands.add_parser("experiment", help=cmd_experiment.__doc__)
    sub.add_argument("--config")
    sub.add_argument("--train", required=True)
    sub.add_argument("--test", required=True)
    sub.add_argument("--seeds", type=int, default=5)
    sub.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None):
    "Runs one command; returns the exit status."
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except ValidationError as err:
        print("rvakit %s: error: %s" % (args.command, err), file=sys.stderr)
        return 1
    except NumericalError as err:
        print("rvakit %s: numerical failure: %s" % (args.command, err),
              file=sys.stderr)
        return 2
    except OSError as err:
        print("rvakit %s: I/O error: %s" % (args.command, err),
              file=sys.stderr)
        return 3
    return 0
