"""SGD training for the attribute model and the shared-inventory baseline.

The objective is the batch-mean CTC loss plus reg_lambda * ||V||^2 for the
attribute model; the baseline output layer is not regularized. Each batch
comes from a single corpus chosen uniformly at random, so one signature
applies to the whole batch.
"""

import copy
import math
import os
import sys
from collections import OrderedDict

import numpy as np
from dotenv import dotenv_values

from core.errors import ConfigError, EmptyCorpus
from core.model import BASELINE, UPM
from core.numerics import global_norm


def _clip_value(value):
    if value is None:
        return None
    if isinstance(value, str):
        if value.strip().lower() in ("", "none", "off", "0"):
            return None
        value = float(value)
    value = float(value)
    return value if value > 0 else None


class TrainConfig:
    """Optimizer and encoder-shape settings.

    Precedence: explicit overrides, then a `key = value` file, then Config.
    """

    FIELDS = OrderedDict(
        [
            ("learning_rate", float),
            ("reg_lambda", float),
            ("batch_size", int),
            ("max_steps", int),
            ("grad_clip_norm", _clip_value),
            ("seed", int),
            ("validation_fraction", float),
            ("log_every", int),
            ("layers", int),
            ("cells", int),
        ]
    )

    def __init__(self, **overrides):
        from config import Config

        self.learning_rate = Config.LEARNING_RATE
        self.reg_lambda = Config.REG_LAMBDA
        self.batch_size = Config.BATCH_SIZE
        self.max_steps = Config.MAX_STEPS
        self.grad_clip_norm = Config.GRAD_CLIP_NORM
        self.seed = Config.SEED
        self.validation_fraction = Config.VALIDATION_FRACTION
        self.log_every = Config.LOG_EVERY
        self.layers = Config.ENCODER_LAYERS
        self.cells = Config.ENCODER_CELLS
        self.update(overrides)

    def update(self, values, source="override"):
        for key, raw in values.items():
            if raw is None:
                continue
            if key not in self.FIELDS:
                raise ConfigError(f"{source}: unknown training setting '{key}'")
            try:
                setattr(self, key, self.FIELDS[key](raw))
            except (TypeError, ValueError) as e:
                raise ConfigError(f"{source}: bad value {raw!r} for '{key}'") from e
        return self

    @classmethod
    def from_file(cls, path, **overrides):
        cfg = cls()
        if path is not None:
            cfg.update(read_settings(path), source=path)
        cfg.update(overrides)
        return cfg.validate()

    def validate(self):
        if self.learning_rate < 0:
            raise ConfigError("learning_rate must not be negative")
        if self.reg_lambda < 0:
            raise ConfigError("reg_lambda must not be negative")
        if self.batch_size <= 0 or self.log_every <= 0:
            raise ConfigError("batch_size and log_every must be positive")
        if self.layers <= 0 or self.cells <= 0:
            raise ConfigError("layers and cells must be positive")
        if self.max_steps < 0:
            raise ConfigError("max_steps must not be negative")
        if not 0 <= self.validation_fraction < 1:
            raise ConfigError("validation_fraction must be in [0, 1)")
        return self

    def replace(self, **changes):
        return copy.copy(self).update(changes).validate()

    def as_dict(self):
        return OrderedDict((key, getattr(self, key)) for key in self.FIELDS)

    def __repr__(self):
        return "TrainConfig(" + ", ".join(f"{k}={v!r}" for k, v in self.as_dict().items()) + ")"


def read_settings(path):
    """Parse a `key = value` file; `#` starts a comment."""
    if not os.path.isfile(path):
        raise ConfigError(f"settings file not found: {path}")
    return dotenv_values(path)


def objective_and_grads(model, batch, cfg):
    """Mean CTC loss over the batch (+ the V penalty) and its exact gradient."""
    if not batch:
        raise EmptyCorpus("cannot compute the objective of an empty batch")

    loss_sum = 0.0
    grad_sum = None
    for utt in batch:
        loss, grads = model.loss_and_grads(utt.features, utt.transcript, utt.language, utt.id)
        loss_sum += loss
        if grad_sum is None:
            grad_sum = grads
        else:
            for key in grad_sum:
                grad_sum[key] = grad_sum[key] + grads[key]

    n = len(batch)
    loss = loss_sum / n
    grads = OrderedDict((key, g / n) for key, g in grad_sum.items())

    if model.mode == UPM and cfg.reg_lambda:
        V = model.V
        loss += cfg.reg_lambda * float(np.sum(V * V))
        grads["V"] = grads["V"] + 2.0 * cfg.reg_lambda * V
    return loss, grads


def sample_batch(corpora, cfg, rng):
    if not corpora:
        raise EmptyCorpus("no corpora to sample from")
    for corpus in corpora:
        if not corpus.utterances:
            raise EmptyCorpus(f"corpus '{corpus.language}' has no utterances")
    corpus = corpora[int(rng.integers(len(corpora)))]
    picks = rng.integers(len(corpus.utterances), size=cfg.batch_size)
    return [corpus.utterances[int(i)] for i in picks]


def split_validation(corpora, fraction, rng):
    """Seeded shuffle per corpus; the last ceil(fraction * n) utterances are held out.

    At least one utterance always stays in training.
    """
    train_corpora = []
    held_out = []
    for corpus in corpora:
        n = len(corpus.utterances)
        order = rng.permutation(n)
        n_val = min(math.ceil(fraction * n), max(n - 1, 0))
        keep = [corpus.utterances[int(i)] for i in order[: n - n_val]]
        held_out += [corpus.utterances[int(i)] for i in order[n - n_val :]]
        train_corpora.append(corpus._replace(utterances=keep))
    return train_corpora, held_out


def mean_loss(model, utterances):
    """Mean CTC loss without the regularizer; NaN for an empty set."""
    if not utterances:
        return float("nan")
    total = 0.0
    for utt in utterances:
        loss, _ = model.loss_and_grads(utt.features, utt.transcript, utt.language, utt.id)
        total += loss
    return total / len(utterances)


def clip_gradients(grads, max_norm):
    norm = global_norm(grads)
    if max_norm is None or norm <= max_norm:
        return grads, norm
    scale = max_norm / norm
    return OrderedDict((key, g * scale) for key, g in grads.items()), norm


def print_progress(step, train_loss, val_loss):
    print(f"step={step} train_loss={train_loss:.6f} val_loss={val_loss:.6f}", flush=True)


def _sgd(model, corpora, cfg, progress):
    rng = np.random.default_rng(cfg.seed)
    train_corpora, held_out = split_validation(corpora, cfg.validation_fraction, rng)
    history = []
    if cfg.max_steps == 0:
        return model, history

    print(
        f"[Train] {model.mode}: {len(train_corpora)} corpora, "
        f"{sum(len(c.utterances) for c in train_corpora)} train / {len(held_out)} validation utterances, "
        f"{cfg.max_steps} steps",
        file=sys.stderr,
    )
    params = OrderedDict((key, p.copy()) for key, p in model.parameters().items())
    for step in range(1, cfg.max_steps + 1):
        batch = sample_batch(train_corpora, cfg, rng)
        loss, grads = objective_and_grads(model, batch, cfg)
        grads, _ = clip_gradients(grads, cfg.grad_clip_norm)
        if cfg.learning_rate:
            params = OrderedDict((key, p - cfg.learning_rate * grads[key]) for key, p in params.items())
            model = model.with_parameters(params)

        if step % cfg.log_every == 0 or step == cfg.max_steps:
            val_loss = mean_loss(model, held_out)
            history.append((step, loss, val_loss))
            if progress is not None:
                progress(step, loss, val_loss)
    return model, history


def train(model, corpora, cfg, progress=None):
    return _sgd(model, corpora, cfg, progress)


def train_baseline(baseline, corpora, cfg, progress=None):
    if baseline.mode != BASELINE:
        raise ConfigError("train_baseline expects a baseline model")
    return _sgd(baseline, corpora, cfg, progress)
