"""Articulatory attribute catalog and the curated base-phoneme table.

Both files are UTF-8 TSV (see assets/). Objects are immutable after load.
"""

import sys
from collections import namedtuple

from core.errors import ParseError, UnknownAttribute

CATEGORIES = ("consonant", "vowel", "diacritic", "blank")
BLANK_NAME = "blank"

BASE = "base"
DIACRITIC = "diacritic"
ENTRY_KINDS = (BASE, DIACRITIC)


AttributeId = namedtuple("AttributeId", "index name")


class AttributeCatalog:
    """The ordered universe of attributes, including exactly one blank."""

    def __init__(self, rows):
        names = [name for name, _ in rows]
        if len(set(names)) != len(names):
            raise ParseError("duplicate attribute name in catalog")
        blanks = [i for i, (_, cat) in enumerate(rows) if cat == "blank"]
        if len(blanks) != 1 or rows[blanks[0]][0] != BLANK_NAME:
            raise ParseError("catalog needs exactly one 'blank' row with category blank")
        if len(rows) < 2:
            raise ParseError("catalog needs at least one attribute besides blank")

        self.attributes = tuple(AttributeId(i, name) for i, name in enumerate(names))
        self.category = {self.attributes[i]: cat for i, (_, cat) in enumerate(rows)}
        self.blank_index = blanks[0]
        self._by_name = {a.name: a for a in self.attributes}

    def __len__(self):
        return len(self.attributes)

    def __eq__(self, other):
        return isinstance(other, AttributeCatalog) and self.rows() == other.rows()

    def __hash__(self):
        return hash(self.rows())

    @property
    def blank(self):
        return self.attributes[self.blank_index]

    def get(self, name):
        return self._by_name.get(name)

    def rows(self):
        return tuple((a.name, self.category[a]) for a in self.attributes)

    def names_of(self, attributes):
        """Attribute names in catalog order."""
        return [a.name for a in sorted(attributes)]


class BasePhonemeTable:
    """Restricted assignment function: X-SAMPA string -> attribute set."""

    def __init__(self, catalog, entries):
        self.catalog = catalog
        self.entries = {}
        self.kind = {}
        for xsampa, kind, attrs in entries:
            if xsampa in self.entries:
                raise ParseError(f"duplicate table entry '{xsampa}'")
            self.entries[xsampa] = frozenset(attrs)
            self.kind[xsampa] = kind

    def __contains__(self, xsampa):
        return xsampa in self.entries

    def __len__(self):
        return len(self.entries)

    def __eq__(self, other):
        return (
            isinstance(other, BasePhonemeTable)
            and self.catalog == other.catalog
            and self.entries == other.entries
            and self.kind == other.kind
        )

    def __hash__(self):
        return hash(tuple(sorted(self.entries)))

    def lookup(self, xsampa):
        return self.entries[xsampa]

    def base_phonemes(self):
        return [p for p in self.entries if self.kind[p] == BASE]

    def longest_entry(self):
        return max((len(p) for p in self.entries), default=0)


def _data_lines(path):
    try:
        with open(path, encoding="utf-8") as f:
            lines = f.read().splitlines()
    except OSError as e:
        raise ParseError(f"cannot read file: {e}", path) from e
    for line_no, line in enumerate(lines, start=1):
        if not line.strip() or line.startswith("#"):
            continue
        yield line_no, line


def load_catalog(path):
    rows = []
    seen = set()
    for line_no, line in _data_lines(path):
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0] or parts[1] not in CATEGORIES:
            raise ParseError(f"expected 'name<TAB>category', got {line!r}", path, line_no)
        name, category = parts
        if any(ch.isspace() for ch in name):
            raise ParseError(f"attribute name {name!r} contains whitespace", path, line_no)
        if name in seen:
            raise ParseError(f"duplicate attribute '{name}'", path, line_no)
        seen.add(name)
        rows.append((name, category))
    try:
        catalog = AttributeCatalog(rows)
    except ParseError as e:
        raise ParseError(str(e), path) from e
    print(f"[Catalog] Loaded {len(catalog)} attributes from {path}", file=sys.stderr)
    return catalog


def load_base_table(path, catalog):
    entries = []
    seen = set()
    for line_no, line in _data_lines(path):
        parts = line.split("\t")
        if len(parts) != 3 or parts[1] not in ENTRY_KINDS:
            raise ParseError(f"expected 'xsampa<TAB>kind<TAB>attributes', got {line!r}", path, line_no)
        xsampa, kind, names = parts
        if not xsampa or any(ch.isspace() for ch in xsampa):
            raise ParseError(f"bad X-SAMPA entry {xsampa!r}", path, line_no)
        if xsampa in seen:
            raise ParseError(f"duplicate entry '{xsampa}'", path, line_no)
        seen.add(xsampa)

        attrs = set()
        for name in (n.strip() for n in names.split(",")):
            if not name:
                continue
            attr = catalog.get(name)
            if attr is None:
                raise UnknownAttribute(name, path, line_no)
            if attr.index == catalog.blank_index:
                raise ParseError(f"entry '{xsampa}' may not use the blank attribute", path, line_no)
            attrs.add(attr)
        if not attrs:
            raise ParseError(f"entry '{xsampa}' has no attributes", path, line_no)
        entries.append((xsampa, kind, attrs))

    table = BasePhonemeTable(catalog, entries)
    print(f"[Catalog] Loaded {len(table)} table entries from {path}", file=sys.stderr)
    return table


def write_catalog(catalog, path):
    with open(path, "w", encoding="utf-8") as f:
        f.write(catalog_to_text(catalog))


def write_base_table(table, path):
    with open(path, "w", encoding="utf-8") as f:
        f.write(table_to_text(table))


def catalog_to_text(catalog):
    return "".join(f"{name}\t{category}\n" for name, category in catalog.rows())


def table_to_text(table):
    return "".join(
        f"{x}\t{table.kind[x]}\t{','.join(table.catalog.names_of(a))}\n" for x, a in table.entries.items()
    )


def catalog_from_text(text):
    rows = []
    for line in text.splitlines():
        if line:
            name, category = line.split("\t")
            rows.append((name, category))
    return AttributeCatalog(rows)


def table_from_text(text, catalog):
    entries = []
    for line in text.splitlines():
        if not line:
            continue
        xsampa, kind, names = line.split("\t")
        attrs = set()
        for name in names.split(","):
            attr = catalog.get(name)
            if attr is None:
                raise UnknownAttribute(name)
            attrs.add(attr)
        entries.append((xsampa, kind, attrs))
    return BasePhonemeTable(catalog, entries)


def load_default(catalog_path=None, table_path=None):
    """Load the configured catalog and base table in one go."""
    from config import Config

    catalog_path = catalog_path or Config.CATALOG_PATH
    table_path = table_path or Config.BASE_TABLE_PATH
    catalog = load_catalog(catalog_path)
    return catalog, load_base_table(table_path, catalog)
