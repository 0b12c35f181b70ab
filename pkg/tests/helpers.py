"""Small shared fixtures: a four-attribute catalog, tiny models and corpora."""

import functools

import numpy as np

from core.catalog import BASE, DIACRITIC, AttributeCatalog, BasePhonemeTable, load_default
from core.encoder import EncoderConfig, init_params
from core.model import new_baseline, new_upm
from core.signature import build_inventory
from services.dataset import Corpus, Utterance


@functools.lru_cache(maxsize=1)
def shipped_tables():
    return load_default()


def tiny_tables():
    """vowel, open, nasal, blank; 'a' and 'm' are base phonemes, '~' nasalizes."""
    catalog = AttributeCatalog(
        [("vowel", "vowel"), ("open", "vowel"), ("nasal", "consonant"), ("blank", "blank")]
    )
    a = {name: catalog.get(name) for name in ("vowel", "open", "nasal")}
    table = BasePhonemeTable(
        catalog,
        [
            ("a", BASE, {a["vowel"], a["open"]}),
            ("m", BASE, {a["nasal"]}),
            ("~", DIACRITIC, {a["nasal"]}),
        ],
    )
    return catalog, table


def tiny_upm(seed=0, input_dim=3, layers=1, cells=2, phonemes=("a", "m"), language="xx"):
    catalog, table = tiny_tables()
    rng = np.random.default_rng(seed)
    params = init_params(EncoderConfig(input_dim, layers, cells), rng)
    return new_upm(params, catalog, table, [build_inventory(language, phonemes, table)], rng)


def tiny_baseline(seed=0, input_dim=3, layers=1, cells=2, inventories=None):
    catalog, table = tiny_tables()
    rng = np.random.default_rng(seed)
    params = init_params(EncoderConfig(input_dim, layers, cells), rng)
    if inventories is None:
        inventories = [build_inventory("xx", ("a", "m"), table)]
    return new_baseline(params, catalog, table, inventories, rng)


def random_corpus(language, phonemes, table, count, rng, input_dim=3, frames=(4, 6), length=(1, 2)):
    utterances = []
    for n in range(count):
        size = int(rng.integers(length[0], length[1] + 1))
        transcript = []
        for _ in range(size):
            choices = [p for p in phonemes if not transcript or p != transcript[-1]]
            transcript.append(choices[int(rng.integers(len(choices)))])
        T = int(rng.integers(frames[0], frames[1] + 1))
        x = rng.normal(size=(T, input_dim))
        utterances.append(Utterance(f"{language}_{n:03d}", language, x, tuple(transcript)))
    return Corpus(language, utterances, build_inventory(language, phonemes, table))
