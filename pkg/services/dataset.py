"""Corpus I/O: TSV manifests, `<language>.inv` inventories, ZPHF feature files.

Manifest line:  utt_id<TAB>language<TAB>feature_file<TAB>space-separated X-SAMPA
Feature file:   b"ZPHF", uint32 version, uint32 T, uint32 d, T*d float32 (all little-endian, row-major)

Feature paths in a manifest are relative to the manifest's directory, and
so are the inventory files.
"""

import os
import struct
import sys
from collections import OrderedDict, namedtuple

import numpy as np

from core.errors import (
    BadFeatureHeader,
    DataIOError,
    FormatVersionMismatch,
    ParseError,
    TranscriptPhonemeOutsideInventory,
)
from core.numerics import DTYPE
from core.signature import build_inventory, read_inventory_file
from core.xsampa import check_phoneme

FEATURE_MAGIC = b"ZPHF"
FEATURE_VERSION = 1
FEATURE_HEADER = struct.Struct("<4sIII")
FEATURE_DTYPE = np.dtype("<f4")

INVENTORY_SUFFIX = ".inv"
FEATURE_DIR = "features"

Utterance = namedtuple("Utterance", "id language features transcript")
Corpus = namedtuple("Corpus", "language utterances inventory")
ManifestRow = namedtuple("ManifestRow", "id language feature_path transcript")


# --- Feature files ---

def write_features(path, x):
    x = np.asarray(x)
    if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
        raise BadFeatureHeader(f"features must be a non-empty T x d matrix, got {x.shape}", path)
    T, d = x.shape
    try:
        with open(path, "wb") as f:
            f.write(FEATURE_HEADER.pack(FEATURE_MAGIC, FEATURE_VERSION, T, d))
            f.write(np.ascontiguousarray(x, dtype=FEATURE_DTYPE).tobytes())
    except OSError as e:
        raise DataIOError(f"cannot write features to {path}: {e}") from e


def read_features(path):
    """Load a feature matrix as float64 (values are exactly the stored float32s)."""
    try:
        with open(path, "rb") as f:
            data = f.read()
    except OSError as e:
        raise DataIOError(f"cannot read features from {path}: {e}") from e

    if len(data) < FEATURE_HEADER.size:
        raise BadFeatureHeader("file is shorter than the feature header", path)
    magic, version, T, d = FEATURE_HEADER.unpack_from(data)
    if magic != FEATURE_MAGIC:
        raise BadFeatureHeader(f"bad magic {magic!r}", path)
    if version != FEATURE_VERSION:
        raise FormatVersionMismatch(f"{path}: feature format version {version}, expected {FEATURE_VERSION}")
    if T == 0 or d == 0:
        raise BadFeatureHeader(f"header declares T={T}, d={d}", path)
    body = data[FEATURE_HEADER.size :]
    if len(body) != T * d * FEATURE_DTYPE.itemsize:
        raise BadFeatureHeader(f"expected {T * d} values, file holds {len(body) // FEATURE_DTYPE.itemsize}", path)
    return np.frombuffer(body, dtype=FEATURE_DTYPE).reshape(T, d).astype(DTYPE)


# --- Manifests ---

def read_manifest(path):
    try:
        with open(path, encoding="utf-8") as f:
            lines = f.read().splitlines()
    except OSError as e:
        raise DataIOError(f"cannot read manifest {path}: {e}") from e

    rows = []
    seen = set()
    for line_no, line in enumerate(lines, start=1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 4:
            raise ParseError("expected 'utt_id<TAB>language<TAB>features<TAB>transcript'", path, line_no)
        utt_id, language, feature_path, transcript = parts
        if not utt_id or not language or not feature_path:
            raise ParseError("utterance id, language and feature path must be non-empty", path, line_no)
        if utt_id in seen:
            raise ParseError(f"duplicate utterance id '{utt_id}'", path, line_no)
        seen.add(utt_id)
        try:
            phonemes = [check_phoneme(p) for p in transcript.split()]
        except ValueError as e:
            raise ParseError(str(e), path, line_no) from e
        rows.append(ManifestRow(utt_id, language, feature_path, phonemes))
    return rows


def inventory_path(directory, language):
    return os.path.join(directory, language + INVENTORY_SUFFIX)


def load_dataset(manifest_path, table):
    """Read every utterance and group them into one Corpus per language."""
    rows = read_manifest(manifest_path)
    base = os.path.dirname(os.path.abspath(manifest_path))

    inventories = OrderedDict()
    grouped = OrderedDict()
    for row in rows:
        if row.language not in inventories:
            inv_file = inventory_path(base, row.language)
            if not os.path.isfile(inv_file):
                raise DataIOError(f"{manifest_path}: missing inventory file {inv_file}")
            inventories[row.language] = build_inventory(row.language, read_inventory_file(inv_file), table)
            grouped[row.language] = []
        allowed = set(inventories[row.language].phonemes)
        for p in row.transcript:
            if p not in allowed:
                raise TranscriptPhonemeOutsideInventory(row.id, p, row.language)
        features = read_features(os.path.join(base, row.feature_path))
        grouped[row.language].append(Utterance(row.id, row.language, features, tuple(row.transcript)))

    corpora = [Corpus(lang, utts, inventories[lang]) for lang, utts in grouped.items()]
    print(
        f"[Data] Loaded {len(rows)} utterances in {len(corpora)} language(s) from {manifest_path}",
        file=sys.stderr,
    )
    return corpora


def write_inventory(path, phonemes):
    with open(path, "w", encoding="utf-8") as f:
        f.write("".join(p + "\n" for p in phonemes))


def write_dataset(out_dir, manifest_name, corpora):
    """Write features, inventories and a manifest; returns the manifest path."""
    feature_dir = os.path.join(out_dir, FEATURE_DIR)
    try:
        os.makedirs(feature_dir, exist_ok=True)
    except OSError as e:
        raise DataIOError(f"cannot create {feature_dir}: {e}") from e

    lines = []
    for corpus in corpora:
        write_inventory(inventory_path(out_dir, corpus.language), corpus.inventory.phonemes)
        for utt in corpus.utterances:
            rel = f"{FEATURE_DIR}/{utt.id}.zphf"
            write_features(os.path.join(out_dir, rel), utt.features)
            lines.append(f"{utt.id}\t{utt.language}\t{rel}\t{' '.join(utt.transcript)}\n")

    manifest_path = os.path.join(out_dir, manifest_name)
    with open(manifest_path, "w", encoding="utf-8") as f:
        f.write("".join(lines))
    return manifest_path


# --- Transcripts and phoneme sets ---

def read_transcripts(path):
    """`utt_id<TAB>space-separated phonemes` lines -> ordered {utt_id: [phonemes]}."""
    try:
        with open(path, encoding="utf-8") as f:
            lines = f.read().splitlines()
    except OSError as e:
        raise DataIOError(f"cannot read transcripts {path}: {e}") from e
    out = OrderedDict()
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        utt_id, sep, phonemes = line.partition("\t")
        if not sep or not utt_id:
            raise ParseError("expected 'utt_id<TAB>phonemes'", path, line_no)
        if utt_id in out:
            raise ParseError(f"duplicate utterance id '{utt_id}'", path, line_no)
        out[utt_id] = phonemes.split()
    return out


def format_transcript(utt_id, phonemes):
    return f"{utt_id}\t{' '.join(phonemes)}"


def read_phoneme_set(path):
    return set(read_inventory_file(path))


def write_phoneme_set(path, phonemes):
    write_inventory(path, sorted(phonemes))
