"""Acoustic models on top of the shared BiLSTM encoder.

UpmModel: attribute logits g = V h, phoneme logits l = S g, with a
language-specific constant signature S (blank row included). No bias and
no nonlinearity sit between V and S.

BaselineModel: one output layer over a fixed shared inventory plus blank.
"""

from collections import OrderedDict

import numpy as np

from core.ctc import ctc_loss, greedy_decode
from core.encoder import EncoderParams, encoder_backward, encoder_forward, init_params
from core.errors import ImpossibleAlignment, ShapeMismatch, TranscriptPhonemeOutsideInventory, UnknownLanguage
from core.numerics import DTYPE, softmax
from core.signature import BLANK_LABEL, build_inventory, build_signature

UPM = "upm"
BASELINE = "baseline"


class _AcousticModel:
    """Shared plumbing: encoder parameters, label mapping, CTC per utterance."""

    mode = None
    head_name = None

    def __init__(self, encoder_params, head, catalog, table):
        self.encoder_params = encoder_params
        self.head = np.asarray(head, dtype=DTYPE)
        self.catalog = catalog
        self.table = table

    @property
    def config(self):
        return self.encoder_params.config

    def parameters(self):
        params = OrderedDict(self.encoder_params.weights)
        params[self.head_name] = self.head
        return params

    def with_parameters(self, params):
        weights = OrderedDict((k, params[k]) for k in self.encoder_params.weights)
        return self._replace(EncoderParams(self.config, weights), params[self.head_name])

    def _replace(self, encoder_params, head):
        raise NotImplementedError

    def output_labels(self, language):
        raise NotImplementedError

    def labels_for(self, language, transcript, utterance_id=None):
        index = {p: i for i, p in enumerate(self.output_labels(language)[:-1])}
        labels = []
        for p in transcript:
            if p not in index:
                raise TranscriptPhonemeOutsideInventory(utterance_id or "?", p, language)
            labels.append(index[p])
        return labels

    def phonemes_for(self, language, labels):
        names = self.output_labels(language)
        return [names[i] for i in labels]

    def _head_logits(self, h, language):
        raise NotImplementedError

    def _head_backward(self, h, grad_logits, language):
        raise NotImplementedError

    def logits(self, x, language):
        hidden = encoder_forward(self.encoder_params, x)
        return self._head_logits(hidden.values, language)

    def posterior(self, x, language):
        return softmax(self.logits(x, language), axis=1)

    def decode(self, x, language):
        return self.phonemes_for(language, greedy_decode(self.logits(x, language)))

    def loss_and_grads(self, x, transcript, language, utterance_id=None):
        """CTC loss of one utterance and its gradient for every parameter."""
        labels = self.labels_for(language, transcript, utterance_id)
        hidden = encoder_forward(self.encoder_params, x)
        logits = self._head_logits(hidden.values, language)
        try:
            result = ctc_loss(logits, labels)
        except ImpossibleAlignment as e:
            raise ImpossibleAlignment(str(e), utterance_id) from e
        grad_head, grad_h = self._head_backward(hidden.values, result.grad_logits, language)
        grads, _ = encoder_backward(self.encoder_params, hidden, grad_h)
        grads[self.head_name] = grad_head
        return result.loss, grads


class UpmModel(_AcousticModel):
    mode = UPM
    head_name = "V"

    def __init__(self, encoder_params, V, catalog, table, signatures=None):
        super().__init__(encoder_params, V, catalog, table)
        if self.head.shape != (len(catalog), self.config.hidden_dim):
            raise ShapeMismatch(
                f"V must be {len(catalog)} x {self.config.hidden_dim}, got {self.head.shape}"
            )
        self.signatures = dict(signatures or {})
        for language, sig in self.signatures.items():
            if sig.cols != len(catalog) or sig.blank_index != catalog.blank_index:
                raise ShapeMismatch(f"signature for '{language}' does not match the catalog")

    @property
    def V(self):
        return self.head

    def _replace(self, encoder_params, head):
        return UpmModel(encoder_params, head, self.catalog, self.table, self.signatures)

    def signature(self, language):
        try:
            return self.signatures[language]
        except KeyError:
            raise UnknownLanguage(language) from None

    def output_labels(self, language):
        return self.signature(language).row_labels

    def attribute_logits(self, x):
        hidden = encoder_forward(self.encoder_params, x)
        return hidden.values @ self.V.T

    def _head_logits(self, h, language):
        S = self.signature(language).as_float()
        return (h @ self.V.T) @ S.T

    def _head_backward(self, h, grad_logits, language):
        S = self.signature(language).as_float()
        grad_g = grad_logits @ S
        return grad_g.T @ h, grad_g @ self.V

    def register(self, inventory):
        """New model with one more (or a replaced) language signature."""
        signatures = dict(self.signatures)
        signatures[inventory.language] = build_signature(inventory, self.catalog)
        return UpmModel(self.encoder_params, self.V, self.catalog, self.table, signatures)


class BaselineModel(_AcousticModel):
    mode = BASELINE
    head_name = "output"

    def __init__(self, encoder_params, output, catalog, table, shared_inventory):
        super().__init__(encoder_params, output, catalog, table)
        self.shared_inventory = tuple(shared_inventory)
        expected = (len(self.shared_inventory) + 1, self.config.hidden_dim)
        if self.head.shape != expected:
            raise ShapeMismatch(f"output layer must be {expected}, got {self.head.shape}")

    @property
    def output(self):
        return self.head

    def _replace(self, encoder_params, head):
        return BaselineModel(encoder_params, head, self.catalog, self.table, self.shared_inventory)

    def output_labels(self, language=None):
        # Every language shares one inventory; the language id is ignored.
        return self.shared_inventory + (BLANK_LABEL,)

    def _head_logits(self, h, language=None):
        return h @ self.output.T

    def _head_backward(self, h, grad_logits, language=None):
        return grad_logits.T @ h, grad_logits @ self.output


def new_upm(encoder_params, catalog, table, inventories, rng):
    d = encoder_params.config.hidden_dim
    s = 1.0 / np.sqrt(d)
    V = rng.uniform(-s, s, size=(len(catalog), d)).astype(DTYPE)
    model = UpmModel(encoder_params, V, catalog, table)
    for inventory in inventories:
        model = model.register(inventory)
    return model


def shared_inventory_of(inventories):
    return sorted(set(p for inv in inventories for p in inv.phonemes))


def new_baseline(encoder_params, catalog, table, inventories, rng):
    shared = shared_inventory_of(inventories)
    d = encoder_params.config.hidden_dim
    s = 1.0 / np.sqrt(d)
    output = rng.uniform(-s, s, size=(len(shared) + 1, d)).astype(DTYPE)
    return BaselineModel(encoder_params, output, catalog, table, shared)


def upm_logits(m, x, lang):
    return m.logits(x, lang)


def posterior(m, x, lang):
    return m.posterior(x, lang)


def baseline_logits(b, x):
    return b.logits(x, None)


def retarget(m, inv):
    """Zero-shot transfer: register S' for a new inventory, parameters untouched."""
    return m.register(inv)


def retarget_phonemes(m, language, phonemes):
    return retarget(m, build_inventory(language, phonemes, m.table))


def init_model(mode, encoder_config, catalog, table, inventories, seed):
    """Fresh model of either kind; encoder and head drawn from one seeded stream."""
    rng = np.random.default_rng(seed)
    encoder_params = init_params(encoder_config, rng)
    if mode == UPM:
        return new_upm(encoder_params, catalog, table, inventories, rng)
    if mode == BASELINE:
        return new_baseline(encoder_params, catalog, table, inventories, rng)
    raise ValueError(f"unknown model mode '{mode}'")
