"""Synthetic attribute-grounded languages for desk-scale zero-shot experiments.

Every attribute gets a random prototype vector; a phoneme's frames scatter
around the mean of its attributes' prototypes. The test language holds a
fixed number of phonemes that no training language uses but whose
attributes all appear in training, so a model that has learned attributes
can in principle recognize them.
"""

import copy
import os
import sys
from collections import OrderedDict

import numpy as np
from dotenv import dotenv_values

from core.errors import ConfigError, InfeasibleSpec
from core.signature import build_inventory
from services.dataset import Corpus, Utterance, write_dataset, write_phoneme_set

MAX_DRAWS = 200          # attempts at an attribute-covering training draw
TEST_LANGUAGE = "TEST"

TRAIN_MANIFEST = "train.tsv"
TEST_MANIFEST = "test.tsv"
TRAIN_UNION_FILE = "train_union.txt"


def _parse_range(value):
    if isinstance(value, str):
        parts = value.replace(",", "-").split("-")
        if len(parts) != 2:
            raise ValueError(f"expected 'lo-hi', got {value!r}")
        value = parts
    lo, hi = (int(v) for v in value)
    return (lo, hi)


class SynthSpec:
    FIELDS = OrderedDict(
        [
            ("num_languages", int),
            ("phonemes_per_language", int),
            ("num_unseen_test_phonemes", int),
            ("frames_per_phoneme_range", _parse_range),
            ("feature_dim", int),
            ("noise_sigma", float),
            ("seed", int),
            ("utterances_per_language", int),
            ("test_utterances", int),
            ("transcript_length_range", _parse_range),
        ]
    )

    def __init__(self, **values):
        self.num_languages = 3
        self.phonemes_per_language = 8
        self.num_unseen_test_phonemes = 3
        self.frames_per_phoneme_range = (2, 5)
        self.feature_dim = 12
        self.noise_sigma = 0.3
        self.seed = 0
        self.utterances_per_language = 40
        self.test_utterances = 40
        self.transcript_length_range = (4, 8)
        self.update(values)

    def update(self, values, source="override"):
        for key, raw in values.items():
            if raw is None:
                continue
            if key not in self.FIELDS:
                raise ConfigError(f"{source}: unknown synth setting '{key}'")
            try:
                setattr(self, key, self.FIELDS[key](raw))
            except (TypeError, ValueError) as e:
                raise ConfigError(f"{source}: bad value {raw!r} for '{key}'") from e
        return self

    @classmethod
    def from_file(cls, path, **overrides):
        if not os.path.isfile(path):
            raise ConfigError(f"spec file not found: {path}")
        spec = cls()
        spec.update(dotenv_values(path), source=path)
        spec.update(overrides)
        return spec.validate()

    def validate(self):
        for key in ("num_languages", "feature_dim", "utterances_per_language", "test_utterances"):
            if getattr(self, key) <= 0:
                raise ConfigError(f"{key} must be positive")
        if self.phonemes_per_language < 2:
            raise ConfigError("phonemes_per_language must be at least 2")
        if not 0 <= self.num_unseen_test_phonemes <= self.phonemes_per_language:
            raise ConfigError("num_unseen_test_phonemes must be between 0 and phonemes_per_language")
        for key in ("frames_per_phoneme_range", "transcript_length_range"):
            lo, hi = getattr(self, key)
            if lo < 1 or hi < lo:
                raise ConfigError(f"{key} must satisfy 1 <= lo <= hi")
        if self.noise_sigma < 0:
            raise ConfigError("noise_sigma must not be negative")
        return self

    def replace(self, **changes):
        return copy.copy(self).update(changes).validate()

    def as_dict(self):
        return OrderedDict((key, getattr(self, key)) for key in self.FIELDS)


def _phoneme_pool(table):
    """Base phonemes with pairwise distinct attribute sets, in table order."""
    pool = OrderedDict()
    seen_sets = set()
    for p in table.base_phonemes():
        attrs = table.lookup(p)
        if attrs in seen_sets:
            continue
        seen_sets.add(attrs)
        pool[p] = attrs
    return pool


def _draw_languages(spec, pool, rng):
    names = list(pool)
    need = spec.phonemes_per_language
    if need > len(names):
        raise InfeasibleSpec(f"{need} phonemes per language, but the table only offers {len(names)}")

    for _ in range(MAX_DRAWS):
        inventories = [
            [names[int(i)] for i in sorted(rng.choice(len(names), size=need, replace=False))]
            for _ in range(spec.num_languages)
        ]
        union = set(p for inv in inventories for p in inv)
        covered = frozenset().union(*(pool[p] for p in union))
        candidates = [p for p in names if p not in union and pool[p] <= covered]
        if len(candidates) >= spec.num_unseen_test_phonemes:
            return inventories, union, candidates
    raise InfeasibleSpec(
        f"could not find {spec.num_unseen_test_phonemes} unseen phonemes covered by training attributes "
        f"in {MAX_DRAWS} draws"
    )


def _transcript(phonemes, spec, rng):
    # No immediate repeats, so every transcript aligns with one frame per phoneme.
    lo, hi = spec.transcript_length_range
    out = []
    for _ in range(int(rng.integers(lo, hi + 1))):
        choices = [p for p in phonemes if not out or p != out[-1]]
        out.append(choices[int(rng.integers(len(choices)))])
    return out


def _utterance(utt_id, language, phonemes, means, spec, rng):
    transcript = _transcript(phonemes, spec, rng)
    lo, hi = spec.frames_per_phoneme_range
    segments = []
    for p in transcript:
        frames = int(rng.integers(lo, hi + 1))
        noise = rng.normal(0.0, spec.noise_sigma, size=(frames, spec.feature_dim))
        segments.append(means[p] + noise)
    # Round to float32 so features survive the on-disk format bit for bit.
    features = np.vstack(segments).astype(np.float32).astype(np.float64)
    return Utterance(utt_id, language, features, tuple(transcript))


def _corpus(language, phonemes, count, means, spec, table, rng):
    utterances = [_utterance(f"{language}_{n:04d}", language, phonemes, means, spec, rng) for n in range(count)]
    return Corpus(language, utterances, build_inventory(language, phonemes, table))


def generate_synthetic(spec, catalog, table):
    """Returns (train corpora, test corpus, train_union)."""
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    pool = _phoneme_pool(table)

    inventories, union, candidates = _draw_languages(spec, pool, rng)
    picks = rng.choice(len(candidates), size=spec.num_unseen_test_phonemes, replace=False)
    unseen = [candidates[int(i)] for i in sorted(picks)]
    seen_pool = sorted(union)
    n_seen = spec.phonemes_per_language - len(unseen)
    if n_seen > len(seen_pool):
        raise InfeasibleSpec(f"test language needs {n_seen} seen phonemes, training only has {len(seen_pool)}")
    seen = [seen_pool[int(i)] for i in sorted(rng.choice(len(seen_pool), size=n_seen, replace=False))]
    test_phonemes = seen + unseen

    prototypes = rng.normal(0.0, 1.0, size=(len(catalog), spec.feature_dim))
    means = {}
    for p in sorted(union | set(test_phonemes)):
        idx = sorted(a.index for a in pool[p])
        means[p] = prototypes[idx].mean(axis=0)

    train = [
        _corpus(f"L{k + 1:02d}", inv, spec.utterances_per_language, means, spec, table, rng)
        for k, inv in enumerate(inventories)
    ]
    test = _corpus(TEST_LANGUAGE, test_phonemes, spec.test_utterances, means, spec, table, rng)

    covered = frozenset().union(*(pool[p] for p in union))
    assert all(p not in union and pool[p] <= covered for p in unseen)
    print(
        f"[Synth] {len(train)} training languages, {len(union)} training phonemes, "
        f"test inventory {len(test_phonemes)} ({len(unseen)} unseen: {' '.join(unseen)})",
        file=sys.stderr,
    )
    return train, test, union


def write_synthetic(out_dir, train, test, train_union):
    write_dataset(out_dir, TRAIN_MANIFEST, train)
    write_dataset(out_dir, TEST_MANIFEST, [test])
    write_phoneme_set(os.path.join(out_dir, TRAIN_UNION_FILE), train_union)
    return os.path.join(out_dir, TRAIN_MANIFEST), os.path.join(out_dir, TEST_MANIFEST)
