"""Synthetic grounded dialogs with labelled co-reference.

An episode is a world of regions, a caption naming one topic object and
T question rounds. Unambiguous questions name a topic object's category;
ambiguous ones say "it" and refer to the latest round that grounded an
object. A skip round asks about an absent object ("is there a vase" ->
"no"), grounds nothing, and makes the following pronoun skip over it.
"""
from ..exceptions import ConfigError, ValidationError
from ..tensor import Rng
from .world import (CATEGORIES, COLORS, SIZES, STATES,
                    POSITIONS, generate_world)

PRONOUN = "it"
QUESTION_TYPES = ("color", "size", "state", "position")
NUMBERS = ("zero", "one", "two", "three", "four", "five", "six", "seven",
           "eight", "nine", "ten", "eleven")
FILLERS = (("i", "can", "not", "tell"), ("not", "sure"), ("maybe",),
           ("hard", "to", "say"), ("it", "is", "unclear"), ("no", "idea"))


def answer_pool():
    "Every candidate answer as (tokens, answer type), in a fixed order."
    pool = [((c,), "color") for c in COLORS]
    pool += [((shade, c), "color") for shade in ("light", "dark")
             for c in COLORS]
    pool += [((c1, "and", c2), "color") for c1 in COLORS for c2 in COLORS
             if c1 != c2]
    pool += [((s,), "size") for s in SIZES]
    pool += [(("very", "small"), "size"), (("very", "large"), "size")]
    pool += [(("yes",), "yesno"), (("no",), "yesno"),
             (("yes", "it", "is"), "yesno"), (("no", "it", "is", "not"),
                                             "yesno"),
             (("i", "think", "so"), "yesno")]
    pool += [(position, "position") for position in POSITIONS]
    pool += [((n,), "number") for n in NUMBERS]
    pool += [(filler, "filler") for filler in FILLERS]
    return pool


ANSWER_POOL = answer_pool()
ANSWER_TYPES = {tokens: kind for tokens, kind in ANSWER_POOL}


class DialogRound:
    """One question with its candidates and co-reference labels.

    Attributes
    ----------
    index : int
        Round number, from 1.
    question, answer : list of str
    qtype : str
        color, size, state, position or existence.
    ambiguous : bool
        Whether the question uses a pronoun.
    antecedent : int or None
        The round an ambiguous question refers to (0 is the caption).
    gt_region : int or None
        The region the question is about; None for absent objects.
    candidates : list of token lists
    gt_index : int
    relevances : list of float
    """
    def __init__(self, index, question, answer, qtype, ambiguous,
                 antecedent, gt_region, candidates, gt_index, relevances):
        self.index = index
        self.question = question
        self.answer = answer
        self.qtype = qtype
        self.ambiguous = ambiguous
        self.antecedent = antecedent
        self.gt_region = gt_region
        self.candidates = candidates
        self.gt_index = gt_index
        self.relevances = relevances

    @property
    def is_skip(self):
        "An ambiguous round whose antecedent is not the previous round."
        return self.ambiguous and self.antecedent != self.index - 1


class Episode:
    "A world, its caption and the dialog rounds about it."
    def __init__(self, seed, index, world, caption, caption_region, rounds):
        self.seed = seed
        self.index = index
        self.world = world
        self.caption = caption
        self.caption_region = caption_region
        self.rounds = rounds

    def __len__(self):
        return len(self.rounds)

    @property
    def features(self):
        "(K, d_v) region features."
        return self.world.features

    def referent(self, t):
        "The region round t is about (round 0 is the caption)."
        return self.caption_region if t == 0 else self.rounds[t-1].gt_region

    def sentences(self):
        "Every token list in the episode."
        yield self.caption
        for rnd in self.rounds:
            yield rnd.question
            yield rnd.answer
            yield from rnd.candidates


def describe(region, qtype, state_word=None):
    "The ground-truth answer tokens for a question about a region."
    if qtype == "color":
        return [region.color]
    if qtype == "size":
        return [region.size]
    if qtype == "state":
        return ["yes"] if region.state == state_word else ["no"]
    if qtype == "position":
        return list(region.position)
    if qtype == "existence":
        return ["yes"]
    raise ValidationError("unknown question type '%s'" % qtype)


def ask(qtype, subject, state_word=None):
    "Question tokens; subject is a category or 'it'."
    noun = [PRONOUN] if subject == PRONOUN else ["the", subject]
    if qtype == "color":
        return ["what", "color", "is"] + noun
    if qtype == "size":
        return ["how", "big", "is"] + noun
    if qtype == "state":
        return ["is"] + noun + [state_word]
    if qtype == "position":
        return ["where", "is"] + noun
    if qtype == "existence":
        return ["is", "there", "a", subject]
    raise ValidationError("unknown question type '%s'" % qtype)


def _closest_in_length(rng, pool, n, length):
    "n pool entries, nearest token length first, random within a length."
    shuffled = [pool[i] for i in rng.permutation(len(pool))]
    shuffled.sort(key=lambda tokens: abs(len(tokens) - length))
    return shuffled[:n]


def build_candidates(rng, answer, count, near_misses):
    """Shuffled candidates with graded relevances.

    The answer has relevance 1. Answers of the same type are near misses
    (0.5): at least `near_misses` of them, more when other types run out.
    Answers of other types have relevance 0. Every distractor comes from
    the same answer pool as the ground truth and has the answer's token
    length whenever the pool has enough such answers, so length alone
    does not give the answer away.
    """
    if count > len(ANSWER_POOL):
        raise ConfigError("%i candidates requested but only %i distinct"
                          " answers exist" % (count, len(ANSWER_POOL)))
    answer = tuple(answer)
    kind, length = ANSWER_TYPES[answer], len(answer)
    same = [tokens for tokens, k in ANSWER_POOL
            if k == kind and tokens != answer]
    other = [tokens for tokens, k in ANSWER_POOL if k != kind]
    n_near = min(near_misses, len(same), count - 1)
    n_other = min(len(other), count - 1 - n_near)
    near = _closest_in_length(rng, same, count - 1 - n_other, length)
    rest = _closest_in_length(rng, other, n_other, length)
    items = ([(answer, 1.0)] + [(t, 0.5) for t in near]
             + [(t, 0.0) for t in rest])
    order = rng.permutation(count)
    candidates = [list(items[i][0]) for i in order]
    relevances = [items[i][1] for i in order]
    return candidates, int(list(order).index(0)), relevances


def plan_rounds(rng, config):
    """Ambiguity and absent-object flags for rounds 1..T.

    An absent-object round is placed before an ambiguous round whose
    predecessor is unambiguous; when skips are enabled at least one is
    forced.
    """
    n = config.num_rounds
    ambiguous = [False] + [bool(x) for x in
                           rng.random(n) < config.ambiguity_rate]
    absent = [False]*(n + 1)
    if config.skip_rate > 0:
        for t in range(2, n + 1):
            if ambiguous[t] and not ambiguous[t-1] and not absent[t-1] \
                    and rng.random() < config.skip_rate:
                absent[t-1] = True
        if not any(absent):
            if n < 2:
                raise ConfigError("skip rounds need at least 2 rounds")
            eligible = [t for t in range(2, n + 1)
                        if ambiguous[t] and not ambiguous[t-1]]
            t = eligible[0] if eligible else n
            ambiguous[t], ambiguous[t-1], absent[t-1] = True, False, True
    return ambiguous, absent


def generate_episode(seed, config, index=0):
    """A reproducible episode from (seed, index, config).

    Raises ConfigError for infeasible configs.
    """
    rng = Rng(seed, "data", index)
    world = generate_world(rng, config)
    absent_pool = [c for c in CATEGORIES if c not in world.categories()]
    caption_region = world.topics[rng.integers(len(world.topics))]
    caption_noun = world.regions[caption_region].category
    caption = ["a", "picture", "of", "a", caption_noun, "and", "some",
               "other", "things"]
    ambiguous, absent = plan_rounds(rng, config)
    if any(absent) and not absent_pool:
        raise ConfigError("every category is present; no absent objects to"
                          " ask about")
    referents = [caption_region]
    rounds = []
    for t in range(1, config.num_rounds + 1):
        antecedent = None
        state_word = STATES[rng.integers(len(STATES))]
        if absent[t]:
            subject = absent_pool[rng.integers(len(absent_pool))]
            qtype, region, answer = "existence", None, ["no"]
            question = ask(qtype, subject)
        elif ambiguous[t]:
            antecedent = max(s for s in range(t) if referents[s] is not None)
            region = referents[antecedent]
            qtype = QUESTION_TYPES[rng.integers(len(QUESTION_TYPES))]
            question = ask(qtype, PRONOUN, state_word)
            answer = describe(world.regions[region], qtype, state_word)
        else:
            region = world.topics[rng.integers(len(world.topics))]
            qtype = (QUESTION_TYPES + ("existence",))[rng.integers(
                len(QUESTION_TYPES) + 1)]
            question = ask(qtype, world.regions[region].category, state_word)
            answer = describe(world.regions[region], qtype, state_word)
        referents.append(region)
        candidates, gt_index, relevances = build_candidates(
            rng, answer, config.num_candidates, config.near_misses)
        rounds.append(DialogRound(t, question, answer, qtype, ambiguous[t],
                                  antecedent, region, candidates, gt_index,
                                  relevances))
    return Episode(seed, index, world, caption, caption_region, rounds)


def generate_dataset(seed, count, config):
    "Episodes 0..count-1 of a master seed."
    return [generate_episode(seed, config, i) for i in range(count)]
