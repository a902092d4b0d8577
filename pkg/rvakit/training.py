"""Adam training of the dialog model, with checkpoints.

Each batch is a set of episodes. Per-episode losses are summed over the
episode's questions, divided by the number of questions in the batch,
and the gradients of all episodes in the batch are accumulated before a
single Adam step. Random streams are keyed by (seed, epoch, episode), so
a resumed run reproduces the uninterrupted one.
"""
import os
from time import time
import numpy as np
from .config import RunConfig
from .exceptions import (CheckpointError, DivergedTraining, ConfigError,
                         NonFiniteError)
from .globals import Precision
from .modules import ForwardContext, RvAModel, Vocabulary, load_embeddings
from .small_classes import TrainLog
from .tensor import Graph, Rng
from .tensor import io as tensor_io

CHECKPOINT_NAME = "checkpoint.rva"


class Adam:
    "Adam with bias correction, updating ParameterSet values in place."
    def __init__(self, params, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = params
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.steps = 0
        self.m = {name: np.zeros_like(p.value) for name, p in params.items()}
        self.v = {name: np.zeros_like(p.value) for name, p in params.items()}

    def step(self, grads, lr):
        "One update from a name -> gradient mapping (missing = zero)."
        self.steps += 1
        b1, b2 = self.beta1, self.beta2
        correction1 = 1 - b1**self.steps
        correction2 = 1 - b2**self.steps
        for name, p in self.params.items():
            g = grads.get(name)
            if g is None:
                g = np.zeros_like(p.value)
            self.m[name] = b1*self.m[name] + (1 - b1)*g
            self.v[name] = b2*self.v[name] + (1 - b2)*g*g
            update = (lr * (self.m[name]/correction1)
                      / (np.sqrt(self.v[name]/correction2) + self.eps))
            p.value -= update.astype(p.value.dtype)

    def state_arrays(self):
        "Moment estimates as checkpoint records."
        out = {}
        for name in self.params:
            out["adam.m." + name] = self.m[name]
            out["adam.v." + name] = self.v[name]
        return out

    def load_state(self, arrays, steps):
        "Restores moments saved by state_arrays."
        self.steps = steps
        for name, p in self.params.items():
            try:
                self.m[name] = arrays["adam.m." + name].astype(p.value.dtype)
                self.v[name] = arrays["adam.v." + name].astype(p.value.dtype)
            except KeyError:
                raise CheckpointError("checkpoint has no optimizer state for"
                                      " '%s'" % name) from None


class Checkpoint:
    """Parameters, config, vocabulary, epoch and optimizer state.

    Saved as an RVA1 tensor file whose metadata block holds everything
    that is not a tensor.
    """
    def __init__(self, config, vocab, params, epoch, adam_steps=0,
                 adam_state=None, loss_curve=()):
        self.config = config
        self.vocab = vocab
        self.params = params  # name -> array
        self.epoch = epoch
        self.adam_steps = adam_steps
        self.adam_state = adam_state or {}
        self.loss_curve = list(loss_curve)

    def save(self, path):
        "Writes the checkpoint."
        metadata = {"config": self.config.asdict(), "epoch": self.epoch,
                    "vocab": self.vocab.itos[2:],
                    "adam_steps": self.adam_steps,
                    "loss_curve": self.loss_curve,
                    "rng": {"generator": "Philox4x64",
                            "key": "SeedSequence(seed, purpose, epoch,"
                                   " episode)"}}
        arrays = dict(self.params)
        arrays.update(self.adam_state)
        tensor_io.save(path, arrays, self.config.precision, metadata)

    @classmethod
    def load(cls, path):
        "Reads a checkpoint written by save."
        arrays, precision, metadata = tensor_io.load(path)
        try:
            config = RunConfig.fromdict(metadata["config"])
            vocab = Vocabulary(metadata["vocab"])
            epoch = metadata["epoch"]
        except (KeyError, TypeError, ConfigError) as err:
            raise CheckpointError("bad checkpoint metadata: %s" % err
                                  ) from None
        if precision != config.precision:
            raise CheckpointError("stored as %s but configured %s"
                                  % (precision, config.precision))
        params = {k: v for k, v in arrays.items() if not k.startswith("adam.")}
        adam = {k: v for k, v in arrays.items() if k.startswith("adam.")}
        return cls(config, vocab, params, epoch,
                   metadata.get("adam_steps", 0), adam,
                   metadata.get("loss_curve", ()))

    def model(self):
        "An RvAModel holding these parameters."
        with Precision(self.config.precision):
            model = RvAModel(self.config, self.vocab)
        try:
            model.params.load(self.params)
        except ValueError as err:
            raise CheckpointError("checkpoint does not fit the model: %s"
                                  % err) from None
        return model


def batches(config, count, epoch):
    "Episode index batches for an epoch, shuffled by the data stream."
    order = Rng(config.seed, "data", epoch).permutation(count)
    return [order[i:i+config.batch_size].tolist()
            for i in range(0, count, config.batch_size)]


def train_batch(model, episodes, batch, epoch):
    "Accumulated gradients and the summed loss of one batch."
    n_questions = sum(len(episodes[i]) for i in batch)
    grads = {}
    total = 0.0
    for idx in batch:
        ctx = ForwardContext.training(model.config, epoch, idx)
        with Graph() as graph:
            loss = model.forward(episodes[idx], ctx).loss
            scaled = loss * (1/n_questions)
        for tensor, grad in graph.backward(scaled).items():
            if tensor.name in grads:
                grads[tensor.name] = grads[tensor.name] + grad
            else:
                grads[tensor.name] = grad
        total += loss.item()
    return grads, total


def train(config, episodes, *, resume=None, out_dir=None, verbosity=1,
          log=None, embeddings=None):
    """Trains a model; returns the final Checkpoint.

    Arguments
    ---------
    config : RunConfig
    episodes : list of Episode
    resume : Checkpoint (optional)
        Continue from this checkpoint's epoch and optimizer state.
    out_dir : str (optional)
        Where to write a checkpoint after every epoch.
    verbosity : int
        > 0 prints one line per epoch; > 1 also one per batch.
    log : TrainLog (optional)
        Collects the printed lines.
    embeddings : str (optional)
        Word-vector file to initialise the embedding table from; ignored
        when resuming.
    """
    if not episodes:
        raise ConfigError("training needs at least one episode")
    log = log if log is not None else TrainLog()
    with Precision(config.precision):
        if resume is not None:
            if resume.config.asdict() != config.replace(
                    epochs=resume.config.epochs,
                    train_data=resume.config.train_data,
                    test_data=resume.config.test_data).asdict():
                raise CheckpointError("resumed checkpoint was trained with a"
                                      " different config")
            vocab = resume.vocab
            model = resume.model()
            adam = Adam(model.params)
            adam.load_state(resume.adam_state, resume.adam_steps)
            start, curve = resume.epoch, list(resume.loss_curve)
        else:
            vocab = Vocabulary.from_episodes(episodes)
            model = RvAModel(config, vocab)
            if embeddings:
                loaded = load_embeddings(embeddings, vocab,
                                         model.params["embedding.table"])
                _report(log, "Loaded %i of %i word vectors from %s."
                        % (loaded, len(vocab) - 1, embeddings), verbosity > 0)
            adam = Adam(model.params)
            start, curve = 0, []
        n_questions = sum(len(e) for e in episodes)

        def snapshot(epoch):
            checkpoint = Checkpoint(config, vocab, model.params.arrays(),
                                    epoch, adam.steps, adam.state_arrays(),
                                    curve)
            if out_dir:
                checkpoint.save(os.path.join(out_dir, CHECKPOINT_NAME))
            return checkpoint

        checkpoint = snapshot(start)
        for epoch in range(start, config.epochs):
            tic = time()
            lr = config.learning_rate(epoch)
            epoch_loss = 0.0
            for step, batch in enumerate(batches(config, len(episodes),
                                                 epoch)):
                try:
                    grads, batch_loss = train_batch(model, episodes, batch,
                                                    epoch)
                except NonFiniteError:
                    raise DivergedTraining(epoch, step) from None
                if not np.isfinite(batch_loss) or not all(
                        np.isfinite(g).all() for g in grads.values()):
                    raise DivergedTraining(epoch, step)
                adam.step(grads, lr)
                epoch_loss += batch_loss
                if verbosity > 1:
                    _report(log, "  batch %i: loss %.4f"
                            % (step, batch_loss / sum(len(episodes[i])
                                                      for i in batch)))
            curve.append(epoch_loss / n_questions)
            line = ("Epoch %i/%i: mean loss %.4f (lr %.2e), took %.3g"
                    " seconds." % (epoch + 1, config.epochs, curve[-1], lr,
                                   time() - tic))
            _report(log, line, verbosity > 0)
            checkpoint = snapshot(epoch + 1)
    return checkpoint


def _report(log, line, echo=True):
    log.write(line + "\n")
    if echo:
        print(line)
