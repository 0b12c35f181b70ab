"""Attribute assignment for X-SAMPA phonemes by longest-suffix stripping.

While the remaining string is not itself a table entry, the longest suffix
that is an entry is matched, its attributes are added, and the suffix is
removed. The final remainder is looked up directly. Suffixes of one string
at one length are unique, so "longest" never ties.
"""

from collections import namedtuple

from core.errors import DuplicatePhoneme, InvalidPhoneme, UnknownPhoneme

AttributeAssignment = namedtuple("AttributeAssignment", "phoneme attributes matched_parts")


def check_phoneme(p):
    if not isinstance(p, str) or not p:
        raise InvalidPhoneme("phoneme must be a non-empty string")
    if any(ch.isspace() for ch in p):
        raise InvalidPhoneme(f"phoneme {p!r} contains whitespace")
    return p


def _longest_suffix(remaining, table):
    longest = min(len(remaining), table.longest_entry())
    for size in range(longest, 0, -1):
        suffix = remaining[-size:]
        if suffix in table:
            return suffix
    return None


def assign_attributes(p, table):
    check_phoneme(p)
    attributes = set()
    suffixes = []
    remaining = p

    while remaining not in table:
        suffix = _longest_suffix(remaining, table)
        if suffix is None:
            raise UnknownPhoneme(p, remaining)
        attributes |= table.lookup(suffix)
        suffixes.append((suffix, table.kind[suffix]))
        remaining = remaining[: -len(suffix)]

    attributes |= table.lookup(remaining)
    # Base first, then suffixes left to right, so the parts concatenate back to p.
    parts = [(remaining, table.kind[remaining])] + suffixes[::-1]
    return AttributeAssignment(p, frozenset(attributes), tuple(parts))


def assign_inventory(phonemes, table):
    seen = set()
    assignments = []
    for i, p in enumerate(phonemes):
        if p in seen:
            raise DuplicatePhoneme(p, i)
        seen.add(p)
        try:
            assignments.append(assign_attributes(p, table))
        except UnknownPhoneme as e:
            raise UnknownPhoneme(e.phoneme, e.remainder, index=i) from e
    return assignments