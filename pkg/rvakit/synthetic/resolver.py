"A non-learned resolver that answers synthetic dialogs from the world"
import numpy as np
from ..exceptions import ValidationError
from .generator import describe, PRONOUN



class ScriptedResolver:
    """Follows the episode's co-reference links and reads attributes.

    Independent of the generator's stored answers: the region is found
    from the question's category word (or, for "it", the antecedent
    round's region) and the answer is recomputed from its attributes.
    """

    def resolve_region(self, episode, t):
        "The region round t is about, or None for an absent object."
        if t == 0:
            noun = episode.caption[4]
            found = episode.world.find(noun)
            return found[0] if len(found) == 1 else None
        rnd = episode.rounds[t-1]
        if PRONOUN in rnd.question and rnd.qtype != "existence":
            if rnd.antecedent is None or not 0 <= rnd.antecedent < t:
                raise ValidationError("round %i has no valid antecedent" % t)
            return self.resolve_region(episode, rnd.antecedent)
        noun = rnd.question[-1] if rnd.qtype == "existence" else None
        if noun is None:
            names = {r.category for r in episode.world.regions}
            nouns = [w for w in rnd.question if w in names]
            noun = nouns[0] if nouns else None
        found = episode.world.find(noun) if noun else []
        return found[0] if len(found) == 1 else None

    def answer(self, episode, t):
        "Answer tokens for round t (t >= 1)."
        rnd = episode.rounds[t-1]
        region = self.resolve_region(episode, t)
        if region is None:
            return ["no"]
        state_word = rnd.question[-1] if rnd.qtype == "state" else None
        return describe(episode.world.regions[region], rnd.qtype, state_word)

    def scores(self, episode, t):
        "1 for the candidate equal to the resolved answer, 0 elsewhere."
        answer = self.answer(episode, t)
        rnd = episode.rounds[t-1]
        return np.array([1.0 if list(c) == answer else 0.0
                         for c in rnd.candidates])

    def region_accuracy(self, episodes):
        "Fraction of grounded rounds whose region is resolved correctly."
        hits = total = 0
        for episode in episodes:
            for rnd in episode.rounds:
                if rnd.gt_region is None:
                    continue
                total += 1
                hits += self.resolve_region(episode, rnd.index) \
                    == rnd.gt_region
        return hits / total if total else 0.0
