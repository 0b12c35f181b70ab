"""Stacked bidirectional LSTM encoder with exact backpropagation.

Standard LSTM cell with a forget gate and no peepholes; gates are stacked
in the order input, forget, cell, output. Each layer runs one direction
left-to-right and one right-to-left and concatenates them, so the hidden
size is d = 2 * cells.
"""

from collections import OrderedDict

import numpy as np

from core.errors import MissingCache, ShapeMismatch
from core.numerics import DTYPE

DIRECTIONS = ("fwd", "bwd")


class EncoderConfig:
    """Unset fields fall back to the ZPH_INPUT_DIM / ZPH_ENCODER_* settings."""

    def __init__(self, input_dim=None, layers=None, cells=None):
        from config import Config

        input_dim = Config.INPUT_DIM if input_dim is None else input_dim
        layers = Config.ENCODER_LAYERS if layers is None else layers
        cells = Config.ENCODER_CELLS if cells is None else cells
        if min(input_dim, layers, cells) <= 0:
            raise ValueError("encoder input_dim, layers and cells must all be positive")
        self.input_dim = int(input_dim)
        self.layers = int(layers)
        self.cells = int(cells)

    @property
    def hidden_dim(self):
        return 2 * self.cells

    def as_dict(self):
        return {"input_dim": self.input_dim, "layers": self.layers, "cells": self.cells}

    def __eq__(self, other):
        return isinstance(other, EncoderConfig) and self.as_dict() == other.as_dict()

    def __repr__(self):
        return f"EncoderConfig(input_dim={self.input_dim}, layers={self.layers}, cells={self.cells})"


class EncoderParams:
    """Gate weights per layer and direction, kept in a flat ordered dict.

    Keys look like 'enc.0.fwd.W' (4c x n_in), 'enc.0.fwd.U' (4c x c) and
    'enc.0.fwd.b' (4c).
    """

    def __init__(self, config, weights):
        self.config = config
        self.weights = OrderedDict(weights)
        for key, shape in param_shapes(config).items():
            if key not in self.weights or self.weights[key].shape != shape:
                raise ShapeMismatch(f"encoder parameter {key} should have shape {shape}")

    def block(self, layer, direction):
        prefix = f"enc.{layer}.{direction}."
        return self.weights[prefix + "W"], self.weights[prefix + "U"], self.weights[prefix + "b"]

    def copy(self):
        return EncoderParams(self.config, OrderedDict((k, v.copy()) for k, v in self.weights.items()))


def param_shapes(config):
    shapes = OrderedDict()
    c = config.cells
    for layer in range(config.layers):
        n_in = config.input_dim if layer == 0 else config.hidden_dim
        for direction in DIRECTIONS:
            prefix = f"enc.{layer}.{direction}."
            shapes[prefix + "W"] = (4 * c, n_in)
            shapes[prefix + "U"] = (4 * c, c)
            shapes[prefix + "b"] = (4 * c,)
    return shapes


def init_params(config, rng):
    """Uniform in [-s, s] with s = 1/sqrt(fan-in); forget-gate bias starts at 1."""
    weights = OrderedDict()
    c = config.cells
    # Keys come in W, U, b order per block, so s set from W applies to U too.
    for key, shape in param_shapes(config).items():
        if key.endswith(".W"):
            s = 1.0 / np.sqrt(shape[1] + c)
        if key.endswith(".b"):
            b = np.zeros(shape, dtype=DTYPE)
            b[c : 2 * c] = 1.0
            weights[key] = b
        else:
            weights[key] = rng.uniform(-s, s, size=shape).astype(DTYPE)
    return EncoderParams(config, weights)


def zero_params(config):
    return EncoderParams(
        config, OrderedDict((k, np.zeros(s, dtype=DTYPE)) for k, s in param_shapes(config).items())
    )


def _sigmoid(x):
    return 0.5 * (np.tanh(0.5 * x) + 1.0)


class HiddenSequence:
    """Encoder output h (T x d) plus what backprop needs."""

    def __init__(self, values, x, cache):
        self.values = values
        self.x = x
        self.cache = cache

    @property
    def T(self):
        return self.values.shape[0]


def _run_direction(X, W, U, b):
    T = X.shape[0]
    c = U.shape[1]
    H = np.zeros((T, c), dtype=DTYPE)
    C = np.zeros((T, c), dtype=DTYPE)
    gates = np.zeros((T, 4 * c), dtype=DTYPE)
    Z_in = X @ W.T + b
    h = np.zeros(c, dtype=DTYPE)
    cell = np.zeros(c, dtype=DTYPE)
    for t in range(T):
        z = Z_in[t] + U @ h
        i = _sigmoid(z[:c])
        f = _sigmoid(z[c : 2 * c])
        g = np.tanh(z[2 * c : 3 * c])
        o = _sigmoid(z[3 * c :])
        cell = f * cell + i * g
        h = o * np.tanh(cell)
        gates[t] = np.concatenate([i, f, g, o])
        C[t] = cell
        H[t] = h
    return H, {"X": X, "H": H, "C": C, "gates": gates}


def _backprop_direction(dH, W, U, cache):
    X, H, C, gates = cache["X"], cache["H"], cache["C"], cache["gates"]
    T, c = H.shape
    dZ = np.zeros((T, 4 * c), dtype=DTYPE)
    dh_next = np.zeros(c, dtype=DTYPE)
    dc_next = np.zeros(c, dtype=DTYPE)
    for t in range(T - 1, -1, -1):
        i, f, g, o = gates[t, :c], gates[t, c : 2 * c], gates[t, 2 * c : 3 * c], gates[t, 3 * c :]
        c_prev = C[t - 1] if t > 0 else np.zeros(c, dtype=DTYPE)
        tanh_c = np.tanh(C[t])
        dh = dH[t] + dh_next
        do = dh * tanh_c
        dc = dh * o * (1.0 - tanh_c * tanh_c) + dc_next
        di = dc * g
        dg = dc * i
        df = dc * c_prev
        dc_next = dc * f
        dZ[t] = np.concatenate([di * i * (1.0 - i), df * f * (1.0 - f), dg * (1.0 - g * g), do * o * (1.0 - o)])
        dh_next = U.T @ dZ[t]

    H_prev = np.vstack([np.zeros((1, c), dtype=DTYPE), H[:-1]])
    dW = dZ.T @ X
    dU = dZ.T @ H_prev
    db = dZ.sum(axis=0)
    dX = dZ @ W
    return dW, dU, db, dX


def encoder_forward(params, x):
    x = np.asarray(x, dtype=DTYPE)
    cfg = params.config
    if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] != cfg.input_dim:
        raise ShapeMismatch(f"encoder expects T x {cfg.input_dim} input with T >= 1, got {x.shape}")

    layer_in = x
    caches = []
    for layer in range(cfg.layers):
        W, U, b = params.block(layer, "fwd")
        H_f, cache_f = _run_direction(layer_in, W, U, b)
        W, U, b = params.block(layer, "bwd")
        H_b, cache_b = _run_direction(layer_in[::-1], W, U, b)
        caches.append((cache_f, cache_b))
        layer_in = np.hstack([H_f, H_b[::-1]])
    return HiddenSequence(layer_in, x, caches)


def encoder_backward(params, hidden, grad_h):
    """Gradients of sum_t <grad_h[t], h[t]> w.r.t. every parameter and the input."""
    if hidden is None or hidden.cache is None:
        raise MissingCache("encoder_backward needs the HiddenSequence returned by encoder_forward")
    grad_h = np.asarray(grad_h, dtype=DTYPE)
    if grad_h.shape != hidden.values.shape:
        raise ShapeMismatch(f"grad_h has shape {grad_h.shape}, hidden is {hidden.values.shape}")

    c = params.config.cells
    grads = OrderedDict((k, None) for k in params.weights)
    d_out = grad_h
    for layer in range(params.config.layers - 1, -1, -1):
        cache_f, cache_b = hidden.cache[layer]
        W, U, _ = params.block(layer, "fwd")
        dW_f, dU_f, db_f, dX_f = _backprop_direction(d_out[:, :c], W, U, cache_f)
        W, U, _ = params.block(layer, "bwd")
        dW_b, dU_b, db_b, dX_b = _backprop_direction(d_out[::-1, c:], W, U, cache_b)
        for direction, (dW, dU, db) in (("fwd", (dW_f, dU_f, db_f)), ("bwd", (dW_b, dU_b, db_b))):
            prefix = f"enc.{layer}.{direction}."
            grads[prefix + "W"] = dW
            grads[prefix + "U"] = dU
            grads[prefix + "b"] = db
        d_out = dX_f + dX_b[::-1]
    return grads, d_out
