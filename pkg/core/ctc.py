"""CTC loss over raw logits, an enumeration oracle, and best-path decoding.

The blank is always the last logit column (index z). Everything runs in
log space; -inf marks unreachable lattice cells.
"""

import functools
import itertools
from collections import namedtuple

import numpy as np

from core.errors import ImpossibleAlignment, ShapeMismatch, TooLarge
from core.numerics import DTYPE, log_softmax, log_sum_exp, softmax

BRUTE_FORCE_LIMIT = 10**7

CtcResult = namedtuple("CtcResult", "loss grad_logits")


def _check_inputs(logits, y):
    logits = np.asarray(logits, dtype=DTYPE)
    if logits.ndim != 2 or logits.shape[0] < 1 or logits.shape[1] < 1:
        raise ShapeMismatch(f"logits must be T x (z+1) with T >= 1, got {logits.shape}")
    blank = logits.shape[1] - 1
    y = [int(label) for label in y]
    for label in y:
        if not 0 <= label < blank:
            raise ShapeMismatch(f"label {label} out of range for {blank} phonemes (blank excluded)")
    return logits, y, blank


def min_frames(y):
    """Shortest input that can emit y: one frame per label plus a blank between repeats."""
    return len(y) + sum(1 for prev, cur in zip(y, y[1:]) if prev == cur)


def _extend(y, blank):
    ext = [blank]
    for label in y:
        ext += [label, blank]
    return np.array(ext, dtype=np.int64)


def ctc_loss(logits, y):
    logits, y, blank = _check_inputs(logits, y)
    T = logits.shape[0]
    needed = min_frames(y)
    if T < needed:
        raise ImpossibleAlignment(f"{T} frames cannot emit {len(y)} labels (need at least {needed})")

    log_probs = log_softmax(logits, axis=1)
    ext = _extend(y, blank)
    S = ext.size
    emit = log_probs[:, ext]

    # Transition s-2 -> s is allowed into a non-blank that differs from ext[s-2].
    skip = np.zeros(S, dtype=bool)
    skip[2:] = (ext[2:] != blank) & (ext[2:] != ext[:-2])

    alpha = np.full((T, S), -np.inf, dtype=DTYPE)
    alpha[0, 0] = emit[0, 0]
    if S > 1:
        alpha[0, 1] = emit[0, 1]
    for t in range(1, T):
        prev = alpha[t - 1]
        acc = prev.copy()
        acc[1:] = np.logaddexp(acc[1:], prev[:-1])
        acc[2:] = np.where(skip[2:], np.logaddexp(acc[2:], prev[:-2]), acc[2:])
        alpha[t] = acc + emit[t]

    # beta[t, s]: log-prob of emitting the rest after frame t, given state s at t.
    beta = np.full((T, S), -np.inf, dtype=DTYPE)
    beta[T - 1, S - 1] = 0.0
    if S > 1:
        beta[T - 1, S - 2] = 0.0
    for t in range(T - 2, -1, -1):
        nxt = beta[t + 1] + emit[t + 1]
        acc = nxt.copy()
        acc[:-1] = np.logaddexp(acc[:-1], nxt[1:])
        acc[:-2] = np.where(skip[2:], np.logaddexp(acc[:-2], nxt[2:]), acc[:-2])
        beta[t] = acc

    tail = alpha[T - 1, S - 2 :] if S > 1 else alpha[T - 1, :1]
    log_likelihood = log_sum_exp(tail)
    if not np.isfinite(log_likelihood):
        raise ImpossibleAlignment("no alignment path has non-zero probability")

    occupancy = np.exp(alpha + beta - log_likelihood)
    label_posterior = np.zeros_like(logits)
    for s in range(S):
        label_posterior[:, ext[s]] += occupancy[:, s]
    grad = softmax(logits, axis=1) - label_posterior
    return CtcResult(max(0.0, -log_likelihood), grad)


def collapse(path, blank):
    out = []
    prev = None
    for label in path:
        if label != prev and label != blank:
            out.append(int(label))
        prev = label
    return out


@functools.lru_cache(maxsize=32)
def _path_table(T, K):
    paths = np.array(list(itertools.product(range(K), repeat=T)), dtype=np.int64).reshape(-1, T)
    groups = {}
    for row, path in enumerate(paths):
        groups.setdefault(tuple(collapse(path, K - 1)), []).append(row)
    return paths, {key: np.array(rows, dtype=np.int64) for key, rows in groups.items()}


def brute_force_ctc(logits, y):
    """-log of the summed probability of every frame path that collapses to y."""
    logits, y, blank = _check_inputs(logits, y)
    T, K = logits.shape
    if K**T > BRUTE_FORCE_LIMIT:
        raise TooLarge(f"{K}^{T} paths exceeds the enumeration limit of {BRUTE_FORCE_LIMIT}")

    paths, groups = _path_table(T, K)
    rows = groups.get(tuple(y))
    if rows is None:
        raise ImpossibleAlignment(f"no {T}-frame path collapses to {y}")
    log_probs = log_softmax(logits, axis=1)
    path_scores = log_probs[np.arange(T), paths[rows]].sum(axis=1)
    return -log_sum_exp(path_scores)


def greedy_decode(logits):
    """Per-frame argmax (lowest index wins ties), merge repeats, drop blanks."""
    logits = np.asarray(logits, dtype=DTYPE)
    if logits.ndim != 2:
        raise ShapeMismatch(f"logits must be a matrix, got shape {logits.shape}")
    blank = logits.shape[1] - 1
    return collapse(np.argmax(logits, axis=1), blank)
