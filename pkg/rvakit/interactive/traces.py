"Code to export recursion traces as DOT graphs and text"
import os
from ..exceptions import ValidationError
from ..repr_conventions import arraystr


def node_label(node):
    "One node's DOT label."
    return "round %i\\nlam = %.3f\\ncond = %s" % (node.round, node.lam,
                                                 str(node.cond).lower())


def trace_to_dot(trace, name="trace"):
    """DOT source for one RecursionTrace.

    Nodes are rounds, labelled with their Infer outcome; edges point from
    each round to the round Pair sent it back to. Terminal nodes are drawn
    doubled.
    """
    lines = ["digraph %s {" % name, "  rankdir=LR;"]
    for node in trace:
        shape = "doublecircle" if node.t_p is None else "circle"
        lines.append('  r%i [shape=%s, label="%s"];'
                     % (node.round, shape, node_label(node)))
    for t, t_p in trace.edges:
        lines.append('  r%i -> r%i [label="%i to %i"];' % (t, t_p, t, t_p))
    lines.append("}")
    return "\n".join(lines) + "\n"


def trace_to_text(trace):
    "Readable lines, one per visited round."
    lines = []
    for node in trace:
        target = ("terminal" if node.t_p is None
                  else "back to round %i" % node.t_p)
        lines.append("round %i: cond=%s lam=%.3f %s" % (
            node.round, node.cond, node.lam, target))
        lines.append("    alpha     %s" % arraystr(node.alpha))
        lines.append("    att alpha %s" % arraystr(node.att_alpha))
    return lines


WRITERS = {"dot": trace_to_dot,
           "txt": lambda trace, name: "\n".join(trace_to_text(trace)) + "\n"}


def save_traces(traces, directory, episode, formats=("dot", "txt")):
    """Writes each round's trace of an episode as DOT and as text.

    Arguments
    ---------
    traces : dict
        round -> RecursionTrace
    directory : str
        Created if missing.
    episode : int
        Used in the file names (episode_<e>_round_<t>.dot and .txt).
    formats : tuple of str
        Any of "dot" and "txt".

    Returns the list of written paths.
    """
    unknown = set(formats) - set(WRITERS)
    if unknown:
        raise ValidationError("unknown trace formats %s" % sorted(unknown))
    os.makedirs(directory, exist_ok=True)
    paths = []
    for t in sorted(traces):
        name = "episode_%i_round_%i" % (episode, t)
        for fmt in formats:
            path = os.path.join(directory, "%s.%s" % (name, fmt))
            with open(path, "w") as f:
                f.write(WRITERS[fmt](traces[t], name))
            paths.append(path)
    return paths
