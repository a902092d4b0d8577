"Model modules: text encoders, decisions, recursion and answer head"
from .layers import ForwardContext, Linear, GatedTransform, LSTM, BiLSTM
from .text import Vocabulary, TextEncoder, load_embeddings
from .decisions import (gumbel_sample, gumbel_max, GumbelSample, Infer, Pair,
                        Att, infer_decision, pair_decision)
from .recursion import (RecursionEngine, AttentionState, RecursionTrace,
                        attend_feature)
from .answer import (AnswerHead, CandidateSet, filter_visual,
                     score_candidates, ranking, discriminative_loss)
from .model import RvAModel, DialogForward
