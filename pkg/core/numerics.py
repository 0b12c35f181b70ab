"""Dense float64 helpers shared by the encoder, CTC and training code."""

import numpy as np
from scipy import special

from core.errors import ShapeMismatch

DTYPE = np.float64


def as_mat(values):
    m = np.asarray(values, dtype=DTYPE)
    if m.ndim == 1:
        m = m.reshape(1, -1)
    if m.ndim != 2:
        raise ShapeMismatch(f"expected a matrix, got shape {m.shape}")
    return m


def matmul(A, B):
    A = np.asarray(A, dtype=DTYPE)
    B = np.asarray(B, dtype=DTYPE)
    if A.ndim != 2 or B.ndim != 2 or A.shape[1] != B.shape[0]:
        raise ShapeMismatch(f"cannot multiply {A.shape} by {B.shape}")
    return A @ B


def log_sum_exp(xs):
    xs = np.asarray(xs, dtype=DTYPE)
    if xs.size == 0:
        raise ValueError("log_sum_exp of an empty sequence")
    return float(special.logsumexp(xs))


def softmax(v, axis=-1):
    return special.softmax(np.asarray(v, dtype=DTYPE), axis=axis)


def log_softmax(v, axis=-1):
    return special.log_softmax(np.asarray(v, dtype=DTYPE), axis=axis)


def grad_check(f, theta, analytic_grad, eps=1e-5):
    """Max relative error between the analytic gradient and central differences."""
    theta = np.array(theta, dtype=DTYPE).ravel()
    analytic_grad = np.asarray(analytic_grad, dtype=DTYPE).ravel()
    worst = 0.0
    for i in range(theta.size):
        plus = theta.copy()
        minus = theta.copy()
        plus[i] += eps
        minus[i] -= eps
        numeric = (f(plus) - f(minus)) / (2 * eps)
        err = abs(numeric - analytic_grad[i]) / max(1.0, abs(analytic_grad[i]), abs(numeric))
        worst = max(worst, err)
    return worst


def flatten(params):
    """Concatenate an ordered dict of arrays into one vector."""
    return np.concatenate([np.asarray(p, dtype=DTYPE).ravel() for p in params.values()])


def unflatten(vector, like):
    out = {}
    offset = 0
    for name, p in like.items():
        out[name] = np.asarray(vector[offset : offset + p.size], dtype=DTYPE).reshape(p.shape)
        offset += p.size
    return out


def global_norm(grads):
    return float(np.sqrt(sum(float(np.sum(g * g)) for g in grads.values())))
