import os
import struct
import tempfile
import unittest

import numpy as np
import numpy.testing as npt

from core.errors import (
    BadFeatureHeader,
    DataIOError,
    FormatVersionMismatch,
    ParseError,
    TranscriptPhonemeOutsideInventory,
)
from services.dataset import (
    FEATURE_HEADER,
    Corpus,
    format_transcript,
    load_dataset,
    read_features,
    read_manifest,
    read_phoneme_set,
    read_transcripts,
    write_dataset,
    write_features,
    write_inventory,
    write_phoneme_set,
)
from tests.helpers import random_corpus, tiny_tables


class _TempDir(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.dir = self.tmp.name

    def path(self, name):
        return os.path.join(self.dir, name)

    def write(self, name, data):
        mode = "wb" if isinstance(data, bytes) else "w"
        with open(self.path(name), mode) as f:
            f.write(data)
        return self.path(name)


class TestFeatureFiles(_TempDir):
    def test_float32_values_survive(self):
        x = np.random.default_rng(0).normal(size=(7, 5)).astype(np.float32).astype(np.float64)
        write_features(self.path("x.zphf"), x)
        y = read_features(self.path("x.zphf"))
        self.assertEqual(y.dtype, np.float64)
        npt.assert_array_equal(y, x)
        self.assertEqual(os.path.getsize(self.path("x.zphf")), FEATURE_HEADER.size + 7 * 5 * 4)

    def test_header_layout(self):
        write_features(self.path("x.zphf"), np.ones((2, 3)))
        with open(self.path("x.zphf"), "rb") as f:
            self.assertEqual(f.read(16), b"ZPHF" + struct.pack("<III", 1, 2, 3))

    def test_zero_frames(self):
        path = self.write("empty.zphf", FEATURE_HEADER.pack(b"ZPHF", 1, 0, 4))
        with self.assertRaises(BadFeatureHeader):
            read_features(path)
        with self.assertRaises(BadFeatureHeader):
            write_features(self.path("e.zphf"), np.zeros((0, 4)))

    def test_corrupt_files(self):
        body = np.zeros(6, dtype="<f4").tobytes()
        with self.assertRaises(BadFeatureHeader):
            read_features(self.write("magic.zphf", FEATURE_HEADER.pack(b"NOPE", 1, 2, 3) + body))
        with self.assertRaises(FormatVersionMismatch):
            read_features(self.write("version.zphf", FEATURE_HEADER.pack(b"ZPHF", 9, 2, 3) + body))
        with self.assertRaises(BadFeatureHeader):
            read_features(self.write("short.zphf", FEATURE_HEADER.pack(b"ZPHF", 1, 2, 3) + body[:-4]))
        with self.assertRaises(BadFeatureHeader):
            read_features(self.write("tiny.zphf", b"ZPH"))
        with self.assertRaises(DataIOError):
            read_features(self.path("missing.zphf"))


class TestManifest(_TempDir):
    def _two_utterances(self):
        write_features(self.path("u1.zphf"), np.zeros((3, 2)))
        write_features(self.path("u2.zphf"), np.ones((4, 2)))
        write_inventory(self.path("xx.inv"), ["a", "m"])
        return self.write("m.tsv", "# comment\nu1\txx\tu1.zphf\ta m\n\nu2\txx\tu2.zphf\tm a m\n")

    def test_two_utterances(self):
        _, table = tiny_tables()
        corpora = load_dataset(self._two_utterances(), table)
        self.assertEqual(len(corpora), 1)
        corpus = corpora[0]
        self.assertEqual(corpus.language, "xx")
        self.assertEqual(corpus.inventory.phonemes, ("a", "m"))
        self.assertEqual([u.id for u in corpus.utterances], ["u1", "u2"])
        self.assertEqual(corpus.utterances[1].transcript, ("m", "a", "m"))
        self.assertEqual(corpus.utterances[1].features.shape, (4, 2))

    def test_phoneme_outside_inventory(self):
        _, table = tiny_tables()
        write_features(self.path("u1.zphf"), np.zeros((3, 2)))
        write_inventory(self.path("xx.inv"), ["a"])
        path = self.write("m.tsv", "u1\txx\tu1.zphf\ta m\n")
        with self.assertRaises(TranscriptPhonemeOutsideInventory) as ctx:
            load_dataset(path, table)
        self.assertEqual(ctx.exception.utterance_id, "u1")

    def test_missing_inventory(self):
        _, table = tiny_tables()
        write_features(self.path("u1.zphf"), np.zeros((3, 2)))
        with self.assertRaises(DataIOError):
            load_dataset(self.write("m.tsv", "u1\tzz\tu1.zphf\ta\n"), table)

    def test_malformed_rows(self):
        for text in ("u1\txx\tu1.zphf\n", "u1\txx\tu1.zphf\ta\nu1\txx\tu1.zphf\tm\n", "\txx\tu1.zphf\ta\n"):
            with self.assertRaises(ParseError):
                read_manifest(self.write("bad.tsv", text))

    def test_write_then_load(self):
        _, table = tiny_tables()
        rng = np.random.default_rng(3)
        corpora = [
            random_corpus("xx", ["a", "m"], table, 3, rng),
            random_corpus("yy", ["a~", "m"], table, 2, rng),
        ]
        corpora = [
            Corpus(c.language, [u._replace(features=u.features.astype(np.float32).astype(np.float64))
                                for u in c.utterances], c.inventory)
            for c in corpora
        ]
        manifest = write_dataset(self.dir, "train.tsv", corpora)
        loaded = load_dataset(manifest, table)
        self.assertEqual([c.language for c in loaded], ["xx", "yy"])
        for before, after in zip(corpora, loaded):
            self.assertEqual(before.inventory.phonemes, after.inventory.phonemes)
            for u, v in zip(before.utterances, after.utterances):
                self.assertEqual((u.id, u.transcript), (v.id, v.transcript))
                npt.assert_array_equal(u.features, v.features)


class TestTranscripts(_TempDir):
    def test_read(self):
        lines = [format_transcript("u1", ["a", "m"]), format_transcript("u2", [])]
        path = self.write("hyp.tsv", "\n".join(lines) + "\n")
        self.assertEqual(dict(read_transcripts(path)), {"u1": ["a", "m"], "u2": []})

    def test_bad_lines(self):
        with self.assertRaises(ParseError):
            read_transcripts(self.write("a.tsv", "no tab here\n"))
        with self.assertRaises(ParseError):
            read_transcripts(self.write("b.tsv", "u1\ta\nu1\tm\n"))

    def test_phoneme_set(self):
        write_phoneme_set(self.path("union.txt"), {"m", "a"})
        with open(self.path("union.txt")) as f:
            self.assertEqual(f.read(), "a\nm\n")
        self.assertEqual(read_phoneme_set(self.path("union.txt")), {"a", "m"})


if __name__ == "__main__":
    unittest.main()
