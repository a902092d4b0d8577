"Vocabulary, word embeddings, bi-LSTM sentence encoders and self-attention"
import numpy as np
from .. import tensor as tn
from ..exceptions import ValidationError, EmbeddingFormatError
from ..small_scripts import strip_pads
from .layers import BiLSTM, GatedTransform, INIT_SCALE

CAPTION_LIMIT = 40
QUESTION_LIMIT = 20
ANSWER_LIMIT = 20


class Vocabulary:
    """Token <-> index map with pad = 0 and unk = 1.

    Non-reserved tokens are sorted, so equal token sets give equal maps.
    """
    PAD, UNK = 0, 1
    RESERVED = ("<pad>", "<unk>")

    def __init__(self, tokens=()):
        self.itos = list(self.RESERVED) + sorted(set(tokens)
                                                 - set(self.RESERVED))
        self.stoi = {token: i for i, token in enumerate(self.itos)}

    @classmethod
    def from_episodes(cls, episodes):
        "Every token of every caption, question and candidate answer."
        tokens = set()
        for episode in episodes:
            for sentence in episode.sentences():
                tokens.update(sentence)
        return cls(tokens)

    def __len__(self):
        return len(self.itos)

    def __eq__(self, other):
        return isinstance(other, Vocabulary) and self.itos == other.itos

    def __contains__(self, token):
        return token in self.stoi

    def index(self, token):
        "Index of a token; unknown tokens map to unk."
        return self.stoi.get(token, self.UNK)

    def encode(self, tokens, limit=None):
        "Token list to index list, truncated to limit."
        indices = [self.index(token) for token in tokens]
        return indices[:limit] if limit else indices

    def decode(self, indices):
        "Index list to tokens, dropping pads."
        return [self.itos[i] for i in indices if i != self.PAD]


def load_embeddings(path, vocab, table):
    """Overwrites rows of an embedding table from a plain-text file.

    Each line is "token v1 ... vd". Tokens missing from the file keep
    their initialization, tokens missing from the vocabulary are skipped,
    and the pad row stays zero. Returns the number of rows loaded.
    """
    d_emb = table.shape[1]
    loaded = 0
    with open(path) as f:
        for lineno, line in enumerate(f, 1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != d_emb + 1:
                raise EmbeddingFormatError(
                    lineno, "expected a token and %i values, found %i fields"
                    % (d_emb, len(parts)))
            try:
                values = np.array([float(v) for v in parts[1:]])
            except ValueError as err:
                raise EmbeddingFormatError(lineno, str(err)) from None
            if not np.isfinite(values).all():
                raise EmbeddingFormatError(lineno, "non-finite value")
            token = parts[0]
            if token in vocab and vocab.index(token) != Vocabulary.PAD:
                table.value[vocab.index(token)] = values
                loaded += 1
    return loaded


class SequenceEncoding:
    "Bi-LSTM output for one sentence."
    def __init__(self, indices, embedded, hidden, code):
        self.indices = indices
        self.embedded = embedded  # (m, d_emb)
        self.hidden = hidden  # (m, 2*d_h)
        self.code = code  # (2*d_h,)


class QuestionEncoding:
    """Sentence code plus the reference-aware and answering-aware features.

    Attributes
    ----------
    code : Tensor (2*d_h,)
        e^q, the concatenated last hidden states.
    q_ref, q_ans : Tensor (d_q,)
        Self-attended features.
    alpha_ref, alpha_ans : Tensor (m,)
        Word attention over the sentence's non-pad words.
    """
    def __init__(self, sequence, q_ref, alpha_ref, q_ans, alpha_ans):
        self.sequence = sequence
        self.code = sequence.code
        self.hidden = sequence.hidden
        self.q_ref, self.alpha_ref = q_ref, alpha_ref
        self.q_ans, self.alpha_ans = q_ans, alpha_ans


class SelfAttention:
    "alpha = softmax(l2norm(f(H)) @ w); q* = alpha @ E (or alpha @ H)."
    def __init__(self, params, name, d_in, d_h, rng, attend_hidden=False):
        self.transform = GatedTransform(params, name + ".f", d_in, d_h, rng)
        self.weight = params.uniform(name + ".w", (d_h,), rng, INIT_SCALE)
        self.attend_hidden = attend_hidden

    def scores(self, sequence, ctx):
        "Per-word logits."
        z = tn.l2_normalize(self.transform(sequence.hidden, ctx), axis=1)
        return z @ self.weight

    def __call__(self, sequence, ctx):
        alpha = tn.softmax(self.scores(sequence, ctx), axis=0)
        words = sequence.hidden if self.attend_hidden else sequence.embedded
        return alpha @ words, alpha


class TextEncoder:
    """Shared word embeddings and the question and history bi-LSTMs.

    The two encoders have separate parameters ("question.*" and
    "history.*"); the embedding table is shared by captions, questions
    and answers.
    """
    def __init__(self, params, config, vocab, rng):
        self.vocab = vocab
        self.config = config
        table = rng.uniform(-INIT_SCALE, INIT_SCALE, (len(vocab),
                                                     config.d_emb))
        table[Vocabulary.PAD] = 0
        self.embedding = params.add("embedding.table", table)
        self.encoders = {
            "question": BiLSTM(params, "question", config.d_emb,
                               config.d_h, rng),
            "history": BiLSTM(params, "history", config.d_emb,
                              config.d_h, rng)}
        self.attention = {
            purpose: SelfAttention(params, "selfatt." + purpose,
                                   2*config.d_h, config.d_h, rng,
                                   config.attend_hidden)
            for purpose in ("ref", "ans")}

    def encode_sequence(self, indices, encoder="question"):
        """Runs one bi-LSTM over a padded index list.

        Trailing pads are removed first, so they never influence the code.
        """
        if encoder not in self.encoders:
            raise ValidationError("unknown encoder '%s'" % encoder)
        stripped = strip_pads(indices, Vocabulary.PAD)
        if stripped is None:
            raise ValidationError("pad inside sentence %s" % list(indices))
        if not stripped:
            raise ValidationError("empty sentence")
        if max(stripped) >= len(self.vocab) or min(stripped) < 0:
            raise ValidationError("token index %i out of range [0, %i)"
                                  % (max(stripped), len(self.vocab)))
        embedded = tn.embedding_lookup(self.embedding, stripped)
        hidden, code = self.encoders[encoder](embedded)
        return SequenceEncoding(stripped, embedded, hidden, code)

    def self_attend(self, sequence, purpose, ctx):
        "The purpose-specific ('ref' or 'ans') feature and word attention."
        if purpose not in self.attention:
            raise ValidationError("unknown self-attention purpose '%s'"
                                  % purpose)
        return self.attention[purpose](sequence, ctx)

    def encode_question(self, indices, ctx):
        "A QuestionEncoding from question (or caption) indices."
        sequence = self.encode_sequence(indices, "question")
        q_ref, alpha_ref = self.self_attend(sequence, "ref", ctx)
        q_ans, alpha_ans = self.self_attend(sequence, "ans", ctx)
        return QuestionEncoding(sequence, q_ref, alpha_ref, q_ans, alpha_ans)

    def encode_history_round(self, question, answer=None, *, round_index):
        """e^h for one history entry.

        Round 0 is the caption alone (truncated to 40 tokens); later
        rounds are question (20) followed by answer (20).
        """
        if round_index == 0:
            return self.encode_sequence(question[:CAPTION_LIMIT],
                                        "history").code
        if answer is None:
            raise ValidationError("history round %i has no answer"
                                  % round_index)
        q = strip_pads(question[:QUESTION_LIMIT], Vocabulary.PAD)
        a = strip_pads(answer[:ANSWER_LIMIT], Vocabulary.PAD)
        if q is None or a is None:
            raise ValidationError("pad inside history round %i"
                                  % round_index)
        return self.encode_sequence(q + a, "history").code

    def encode_answer(self, indices):
        "Candidate answer code from the history pathway."
        return self.encode_sequence(indices[:ANSWER_LIMIT], "history").code
