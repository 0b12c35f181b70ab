"""Binary phoneme-by-attribute signature matrices.

Row i marks the attributes of phoneme i; the extra last row is the CTC
blank, one-hot at the catalog's blank column, so every output logit
(blank included) comes out of the same S V h product.
"""

import os
import sys
from collections import namedtuple
from itertools import combinations

import numpy as np

from core.errors import EmptyAttributeSet, ParseError
from core.xsampa import assign_inventory, check_phoneme

BLANK_LABEL = "<blank>"

PhonemeInventory = namedtuple("PhonemeInventory", "language phonemes assignments")


def build_inventory(language, phonemes, table):
    phonemes = tuple(phonemes)
    return PhonemeInventory(language, phonemes, tuple(assign_inventory(phonemes, table)))


def read_inventory_file(path):
    try:
        with open(path, encoding="utf-8") as f:
            lines = f.read().splitlines()
    except OSError as e:
        raise ParseError(f"cannot read inventory: {e}", path) from e
    phonemes = []
    for line_no, line in enumerate(lines, start=1):
        p = line.strip()
        if not p or p.startswith("#"):
            continue
        try:
            phonemes.append(check_phoneme(p))
        except ValueError as e:
            raise ParseError(str(e), path, line_no) from e
    return phonemes


def load_inventory(path, table, language=None):
    """Inventory file: one X-SAMPA phoneme per line. Language defaults to the file stem."""
    if language is None:
        language = os.path.splitext(os.path.basename(path))[0]
    return build_inventory(language, read_inventory_file(path), table)


class SignatureMatrix:
    def __init__(self, bits, row_labels, blank_index):
        self.bits = np.asarray(bits, dtype=np.uint8)
        self.bits.setflags(write=False)
        self.row_labels = tuple(row_labels)
        self.blank_index = blank_index

    @property
    def rows(self):
        return self.bits.shape[0]

    @property
    def cols(self):
        return self.bits.shape[1]

    @property
    def blank_row(self):
        return self.rows - 1

    @property
    def phonemes(self):
        return self.row_labels[:-1]

    def as_float(self):
        return self.bits.astype(np.float64)

    def index_of(self, phoneme):
        return self.row_labels.index(phoneme)

    def __eq__(self, other):
        return (
            isinstance(other, SignatureMatrix)
            and self.row_labels == other.row_labels
            and self.blank_index == other.blank_index
            and np.array_equal(self.bits, other.bits)
        )

    def __hash__(self):
        return hash((self.row_labels, self.bits.tobytes()))


def build_signature(inv, catalog):
    a = len(catalog)
    bits = np.zeros((len(inv.phonemes) + 1, a), dtype=np.uint8)
    for i, assignment in enumerate(inv.assignments):
        if not assignment.attributes:
            raise EmptyAttributeSet(f"phoneme '{assignment.phoneme}' has no attributes")
        for attr in assignment.attributes:
            if attr.index >= a or catalog.attributes[attr.index] != attr:
                raise ParseError(f"phoneme '{assignment.phoneme}' uses attribute {attr.name} outside the catalog")
            bits[i, attr.index] = 1
    bits[-1, catalog.blank_index] = 1
    return SignatureMatrix(bits, list(inv.phonemes) + [BLANK_LABEL], catalog.blank_index)


def warn_collisions(sig):
    """Pairs of phoneme rows with identical attribute sets."""
    pairs = []
    phoneme_rows = sig.bits[:-1]
    for i, j in combinations(range(phoneme_rows.shape[0]), 2):
        if np.array_equal(phoneme_rows[i], phoneme_rows[j]):
            pairs.append((i, j))
            print(
                f"[Signature] Warning: '{sig.row_labels[i]}' and '{sig.row_labels[j]}' "
                "have identical attributes",
                file=sys.stderr,
            )
    return pairs


def signature_to_text(sig):
    lines = [f"{sig.rows - 1} {sig.cols}"]
    lines += [" ".join(str(int(b)) for b in row) for row in sig.bits]
    lines += list(sig.row_labels)
    return "\n".join(lines) + "\n"


def signature_from_text(text, catalog, path=None):
    lines = text.splitlines()
    try:
        z, a = (int(v) for v in lines[0].split())
    except (IndexError, ValueError) as e:
        raise ParseError("signature header must be 'z a'", path, 1) from e
    if a != len(catalog):
        raise ParseError(f"signature has {a} columns, catalog has {len(catalog)}", path, 1)
    if len(lines) < 1 + 2 * (z + 1):
        raise ParseError("signature file is truncated", path)

    try:
        bits = np.array([[int(v) for v in line.split()] for line in lines[1 : z + 2]], dtype=np.int64)
    except ValueError as e:
        raise ParseError(f"bad signature row: {e}", path) from e
    if bits.shape != (z + 1, a) or not np.isin(bits, (0, 1)).all():
        raise ParseError("signature rows must hold exactly 'a' values of 0 or 1", path)
    labels = lines[z + 2 : 2 * z + 3]

    blank = catalog.blank_index
    if labels[-1] != BLANK_LABEL or bits[-1].sum() != 1 or bits[-1, blank] != 1:
        raise ParseError("last signature row must be the blank one-hot row", path)
    if z and (bits[:-1, blank].any() or (bits[:-1].sum(axis=1) == 0).any()):
        raise ParseError("phoneme rows need at least one attribute and no blank bit", path)
    if len(set(labels)) != len(labels):
        raise ParseError("signature row labels must be distinct", path)
    return SignatureMatrix(bits, labels, blank)


def write_signature(sig, path):
    with open(path, "w", encoding="utf-8") as f:
        f.write(signature_to_text(sig))


def read_signature(path, catalog):
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise ParseError(f"cannot read signature: {e}", path) from e
    return signature_from_text(text, catalog, path)
