"The full recursive visual attention dialog model"
from ..tensor import ParameterSet, Rng, Tensor
from ..exceptions import ConfigError, ValidationError
from .text import TextEncoder, QUESTION_LIMIT, ANSWER_LIMIT, CAPTION_LIMIT
from .decisions import Infer, Pair, Att
from .recursion import RecursionEngine
from .answer import AnswerHead, CandidateSet, discriminative_loss

GROUPS = ("embedding", "question", "history", "selfatt", "infer", "pair",
          "att", "filter", "fact", "joint", "candidate")


class RoundOutput:
    "Everything one answered round produced."
    def __init__(self, round_, state, trace, scores, loss, alpha_h):
        self.round = round_
        self.state = state
        self.trace = trace
        self.scores = scores
        self.loss = loss
        self.alpha_h = alpha_h


class DialogForward:
    """A forward pass over one episode.

    Attributes
    ----------
    rounds : list of RoundOutput
        Rounds 1..T.
    loss : Tensor
        Sum of the per-round losses.
    engine : RecursionEngine
        Holds every round's decisions, including the caption's.
    questions : list of QuestionEncoding
        Index 0 is the caption.
    history : list of Tensor
        History codes e^h_0..e^h_{T-1}.
    """
    def __init__(self, rounds, engine, questions, history):
        self.rounds = rounds
        self.engine = engine
        self.questions = questions
        self.history = history
        self.loss = rounds[0].loss
        for out in rounds[1:]:
            self.loss = self.loss + out.loss


class RvAModel:
    """Text encoders, Infer/Pair/Att, recursion and the answer head.

    Parameters are created in a fixed order from the "init" stream of
    the config's seed, so equal configs and vocabularies give equal
    models.
    """
    def __init__(self, config, vocab):
        self.config = config
        self.vocab = vocab
        self.params = ParameterSet()
        rng = Rng(config.seed, "init")
        self.text = TextEncoder(self.params, config, vocab, rng)
        self.infer = Infer(self.params, config, rng)
        self.pair = Pair(self.params, config, rng)
        self.att = Att(self.params, config, rng)
        self.head = AnswerHead(self.params, config, rng)

    def check_episode(self, episode):
        "Raises if an episode does not fit the configured dimensions."
        k, d_v = episode.features.shape
        if d_v != self.config.d_v:
            raise ConfigError("episode %i has d_v = %i, model expects %i"
                              % (episode.index, d_v, self.config.d_v))
        if k != self.config.num_regions:
            raise ConfigError("episode %i has %i regions, model expects %i"
                              % (episode.index, k, self.config.num_regions))
        if not episode.rounds:
            raise ValidationError("episode %i has no rounds" % episode.index)

    def forward(self, episode, ctx):
        "Runs every round of an episode; returns a DialogForward."
        self.check_episode(episode)
        vocab, text = self.vocab, self.text
        regions = Tensor(episode.features)
        caption = vocab.encode(episode.caption, CAPTION_LIMIT)
        questions = [text.encode_question(caption, ctx)]
        questions += [text.encode_question(
            vocab.encode(rnd.question, QUESTION_LIMIT), ctx)
                      for rnd in episode.rounds]
        history = [text.encode_history_round(caption, round_index=0)]
        history += [text.encode_history_round(
            vocab.encode(rnd.question), vocab.encode(rnd.answer),
            round_index=rnd.index) for rnd in episode.rounds[:-1]]
        engine = RecursionEngine(
            att=lambda t: self.att(regions, questions[t].q_ref, ctx),
            infer=lambda t: self.infer(questions[t].q_ref, t, ctx),
            pair=lambda t: self.pair(questions[t].code, history[:t], t, ctx),
            regions=regions, rv_only=self.config.rv_only,
            pair_last=self.config.pair_last)
        codes = {}
        outputs = []
        for t in range(len(episode.rounds) + 1):
            state, trace = engine.rva(t)
            if t == 0:
                continue
            rnd = episode.rounds[t-1]
            candidates = CandidateSet(rnd.candidates, rnd.gt_index,
                                      rnd.relevances)
            candidates.check_count(self.config.num_candidates)
            round_codes = []
            for tokens in rnd.candidates:
                key = tuple(vocab.encode(tokens, ANSWER_LIMIT))
                if key not in codes:
                    codes[key] = text.encode_answer(list(key))
                round_codes.append(codes[key])
            scores, _, alpha_h = self.head(state.v_hat, questions[t],
                                           history[:t], round_codes, ctx)
            loss = discriminative_loss(scores, rnd.gt_index)
            outputs.append(RoundOutput(t, state, trace, scores, loss,
                                       alpha_h))
        return DialogForward(outputs, engine, questions, history)

    def pair_choice(self, forward, t, ctx):
        "Pair's choice for round t even where the recursion did not ask."
        pairing = forward.engine.decisions[t][1]
        if pairing is not None:
            return pairing.t_p
        return self.pair(forward.questions[t].code, forward.history[:t], t,
                         ctx).t_p
