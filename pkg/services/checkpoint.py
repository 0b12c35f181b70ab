"""Versioned binary model checkpoints.

Layout: b"ZPHM", uint32 version, then tagged sections in a fixed order,
each a 4-byte tag, a uint64 payload length and the payload:

  CATL  catalog TSV text
  TABL  base table TSV text
  CONF  `key=value` lines (mode, input_dim, layers, cells)
  ENCP  encoder parameters (named float64 arrays)
  HEAD  V (attribute model) or the baseline output layer
  SIGS  signature texts per language, or the baseline's shared inventory

Integers and floats are little-endian; floats are IEEE-754 float64.
"""

import struct
import sys
from collections import OrderedDict

import numpy as np

from core.catalog import catalog_from_text, catalog_to_text, table_from_text, table_to_text
from core.encoder import EncoderConfig, EncoderParams
from core.errors import DataIOError, FormatVersionMismatch, ParseError
from core.model import BASELINE, UPM, BaselineModel, UpmModel
from core.signature import signature_from_text, signature_to_text

MAGIC = b"ZPHM"
VERSION = 1
SECTION_ORDER = (b"CATL", b"TABL", b"CONF", b"ENCP", b"HEAD", b"SIGS")

_U32 = struct.Struct("<I")
_U64 = struct.Struct("<Q")
_F64 = np.dtype("<f8")


# --- Encoding ---

def _text(s):
    raw = s.encode("utf-8")
    return _U32.pack(len(raw)) + raw


def _array(a):
    a = np.ascontiguousarray(a, dtype=_F64)
    out = _U32.pack(a.ndim) + b"".join(_U32.pack(n) for n in a.shape)
    return out + a.tobytes()


def _section(tag, payload):
    return tag + _U64.pack(len(payload)) + payload


def _config_text(model):
    cfg = model.config
    return f"mode={model.mode}\ninput_dim={cfg.input_dim}\nlayers={cfg.layers}\ncells={cfg.cells}\n"


def checkpoint_bytes(model):
    weights = model.encoder_params.weights
    encp = _U32.pack(len(weights)) + b"".join(_text(k) + _array(v) for k, v in weights.items())

    if model.mode == UPM:
        languages = sorted(model.signatures)
        sigs = _U32.pack(len(languages)) + b"".join(
            _text(lang) + _text(signature_to_text(model.signatures[lang])) for lang in languages
        )
    else:
        sigs = _text("\n".join(model.shared_inventory))

    payloads = (
        catalog_to_text(model.catalog).encode("utf-8"),
        table_to_text(model.table).encode("utf-8"),
        _config_text(model).encode("utf-8"),
        encp,
        _array(model.head),
        sigs,
    )
    body = b"".join(_section(tag, p) for tag, p in zip(SECTION_ORDER, payloads))
    return MAGIC + _U32.pack(VERSION) + body


def save_checkpoint(model, path):
    data = checkpoint_bytes(model)
    try:
        with open(path, "wb") as f:
            f.write(data)
    except OSError as e:
        raise DataIOError(f"cannot write checkpoint {path}: {e}") from e
    print(f"[Checkpoint] Saved {model.mode} model to {path} ({len(data)} bytes)", file=sys.stderr)


# --- Decoding ---

class _Reader:
    def __init__(self, data, path):
        self.data = data
        self.pos = 0
        self.path = path

    def take(self, n):
        if self.pos + n > len(self.data):
            raise DataIOError(f"checkpoint {self.path} is truncated")
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def u32(self):
        return _U32.unpack(self.take(4))[0]

    def text(self):
        return self.take(self.u32()).decode("utf-8")

    def array(self):
        shape = tuple(self.u32() for _ in range(self.u32()))
        count = int(np.prod(shape, dtype=np.int64))
        return np.frombuffer(self.take(count * _F64.itemsize), dtype=_F64).reshape(shape).copy()

    def section(self, tag):
        got = self.take(4)
        if got != tag:
            raise FormatVersionMismatch(f"{self.path}: expected section {tag!r}, found {got!r}")
        return _Reader(self.take(_U64.unpack(self.take(8))[0]), self.path)

    def done(self):
        if self.pos != len(self.data):
            raise FormatVersionMismatch(f"{self.path}: {len(self.data) - self.pos} unexpected trailing bytes")


def _parse_config(text):
    settings = dict(line.split("=", 1) for line in text.splitlines() if line)
    return settings["mode"], EncoderConfig(
        int(settings["input_dim"]), int(settings["layers"]), int(settings["cells"])
    )


def model_from_bytes(data, path="<bytes>"):
    reader = _Reader(data, path)
    if reader.take(4) != MAGIC:
        raise FormatVersionMismatch(f"{path} is not a model checkpoint")
    version = reader.u32()
    if version != VERSION:
        raise FormatVersionMismatch(f"{path}: checkpoint version {version}, expected {VERSION}")

    try:
        catalog = catalog_from_text(reader.section(b"CATL").data.decode("utf-8"))
        table = table_from_text(reader.section(b"TABL").data.decode("utf-8"), catalog)
        mode, config = _parse_config(reader.section(b"CONF").data.decode("utf-8"))

        encp = reader.section(b"ENCP")
        weights = OrderedDict()
        for _ in range(encp.u32()):
            name = encp.text()
            weights[name] = encp.array()
        encp.done()
        encoder_params = EncoderParams(config, weights)

        head_section = reader.section(b"HEAD")
        head = head_section.array()
        head_section.done()

        sigs = reader.section(b"SIGS")
        if mode == UPM:
            signatures = {}
            for _ in range(sigs.u32()):
                language = sigs.text()
                signatures[language] = signature_from_text(sigs.text(), catalog, path)
            sigs.done()
            model = UpmModel(encoder_params, head, catalog, table, signatures)
        elif mode == BASELINE:
            shared = [p for p in sigs.text().split("\n") if p]
            sigs.done()
            model = BaselineModel(encoder_params, head, catalog, table, shared)
        else:
            raise FormatVersionMismatch(f"{path}: unknown model mode '{mode}'")
        reader.done()
    except FormatVersionMismatch:
        raise
    except (KeyError, ValueError, UnicodeDecodeError, ParseError) as e:
        raise FormatVersionMismatch(f"{path}: corrupt checkpoint ({e})") from e
    return model


def load_checkpoint(path):
    try:
        with open(path, "rb") as f:
            data = f.read()
    except OSError as e:
        raise DataIOError(f"cannot read checkpoint {path}: {e}") from e
    model = model_from_bytes(data, path)
    print(f"[Checkpoint] Loaded {model.mode} model from {path}", file=sys.stderr)
    return model
