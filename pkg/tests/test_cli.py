import contextlib
import hashlib
import io
import os
import shutil
import tempfile
import unittest
from unittest import mock

import numpy as np

from main import run
from services.dataset import format_transcript, read_manifest
from tests.helpers import shipped_tables

SMALL_SPEC = """\
num_languages = 2
phonemes_per_language = 4
num_unseen_test_phonemes = 1
feature_dim = 3
utterances_per_language = 4
test_utterances = 3
transcript_length_range = 1-2
frames_per_phoneme_range = 2-3
seed = 5
"""

TINY = ["--max-steps", "3", "--batch-size", "2", "--layers", "1", "--cells", "2", "--log-every", "1",
        "--validation-fraction", "0.25", "--learning-rate", "0.01"]


def _run(*argv):
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = run([str(a) for a in argv])
    return code, out.getvalue(), err.getvalue()


def _sha1(path):
    with open(path, "rb") as f:
        return hashlib.sha1(f.read()).hexdigest()


class TestCli(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.dir = tempfile.mkdtemp()
        cls.spec = os.path.join(cls.dir, "synth.env")
        with open(cls.spec, "w") as f:
            f.write(SMALL_SPEC)
        cls.data = os.path.join(cls.dir, "data")
        code, _, err = _run("synth", "--spec", cls.spec, "--out", cls.data)
        assert code == 0, err
        cls.train_manifest = os.path.join(cls.data, "train.tsv")
        cls.test_manifest = os.path.join(cls.data, "test.tsv")

    @classmethod
    def tearDownClass(cls):
        shutil.rmtree(cls.dir)

    def path(self, name):
        return os.path.join(self.dir, name)

    def _train(self, mode, out):
        code, stdout, err = _run("train", "--data", self.train_manifest, "--mode", mode, "--out", out, *TINY)
        self.assertEqual(code, 0, err)
        return stdout

    def test_attrs(self):
        code, out, _ = _run("attrs", "a")
        self.assertEqual(code, 0)
        self.assertEqual(out, "a\tvowel,open,front,unrounded\n")

    def test_user_errors(self):
        self.assertEqual(_run("attrs", "qq__zz")[0], 1)
        self.assertEqual(_run("attrs", "a", "--no-such-flag")[0], 1)
        self.assertEqual(_run("frobnicate")[0], 1)
        self.assertEqual(_run("train", "--data", self.path("missing.tsv"), "--mode", "upm",
                              "--out", self.path("x.ckpt"), *TINY)[0], 1)
        self.assertEqual(_run("sweep", "--spec", self.spec, "--language-counts", "0", "--seeds", "1")[0], 1)

    def test_internal_error(self):
        with mock.patch("features.commands.cmd_attrs", side_effect=RuntimeError("boom")):
            code, _, err = _run("attrs", "a")
        self.assertEqual(code, 2)
        self.assertIn("RuntimeError", err)

    def test_synth_layout(self):
        for name in ("train.tsv", "test.tsv", "train_union.txt", "L01.inv", "L02.inv", "TEST.inv"):
            self.assertTrue(os.path.isfile(os.path.join(self.data, name)), name)
        self.assertEqual({r.language for r in read_manifest(self.test_manifest)}, {"TEST"})

    def test_signature(self):
        catalog, _ = shipped_tables()
        out_path = self.path("test.sig")
        code, _, err = _run("signature", "--inventory", os.path.join(self.data, "TEST.inv"), "--out", out_path)
        self.assertEqual(code, 0, err)
        with open(out_path) as f:
            header = f.readline().split()
        self.assertEqual(header, ["4", str(len(catalog))])

    def test_train_is_deterministic(self):
        a, b = self.path("a.ckpt"), self.path("b.ckpt")
        stdout = self._train("upm", a)
        self._train("upm", b)
        self.assertEqual(_sha1(a), _sha1(b))
        lines = stdout.splitlines()
        self.assertEqual(len(lines), 3)
        self.assertTrue(lines[0].startswith("step=1 train_loss="))

    def test_transcribe_and_eval(self):
        for mode in ("upm", "baseline"):
            ckpt = self.path(f"{mode}.ckpt")
            self._train(mode, ckpt)
            digest = _sha1(ckpt)
            hyp = self.path(f"{mode}.hyp")
            code, _, err = _run("transcribe", "--ckpt", ckpt, "--data", self.test_manifest, "--lang", "TEST",
                                "--inventory", os.path.join(self.data, "TEST.inv"), "--out", hyp)
            self.assertEqual(code, 0, err)
            self.assertEqual(_sha1(ckpt), digest)
            with open(hyp) as f:
                ids = [line.split("\t")[0] for line in f.read().splitlines()]
            self.assertEqual(ids, [r.id for r in read_manifest(self.test_manifest)])

            code, out, err = _run("eval", "--ref", self.test_manifest, "--hyp", hyp,
                                  "--train-union", os.path.join(self.data, "train_union.txt"))
            self.assertEqual(code, 0, err)
            keys = [line.split("\t")[0] for line in out.splitlines()]
            self.assertIn("per", keys)
            self.assertIn("unseen_per", keys)
            if mode == "baseline":
                unseen = dict(line.split("\t") for line in out.splitlines())["unseen_per"]
                self.assertIn(unseen, ("100.00", "N/A"))

    def test_transcribe_unknown_language(self):
        ckpt = self.path("lang.ckpt")
        self._train("upm", ckpt)
        self.assertEqual(_run("transcribe", "--ckpt", ckpt, "--data", self.test_manifest, "--lang", "ZZ")[0], 1)

    def test_eval_perfect(self):
        hyp = self.path("perfect.hyp")
        with open(hyp, "w") as f:
            for row in read_manifest(self.test_manifest):
                f.write(format_transcript(row.id, row.transcript) + "\n")
        code, out, _ = _run("eval", "--ref", self.test_manifest, "--hyp", hyp)
        self.assertEqual(code, 0)
        self.assertEqual(out.splitlines()[0], "per\t0.00")

    def test_eval_against_baseline(self):
        rows = read_manifest(self.test_manifest)
        hyp, baseline = self.path("cmp.hyp"), self.path("cmp_baseline.hyp")
        with open(hyp, "w") as f, open(baseline, "w") as g:
            for row in rows:
                f.write(format_transcript(row.id, row.transcript) + "\n")
                g.write(format_transcript(row.id, []) + "\n")
        code, out, err = _run("eval", "--ref", self.test_manifest, "--hyp", hyp, "--baseline-hyp", baseline)
        self.assertEqual(code, 0, err)
        lines = out.splitlines()
        self.assertEqual(lines[-2], "language\tbaseline_per\tupm_per\tbaseline_sub\tupm_sub")
        self.assertEqual(lines[-1], "TEST\t100.00\t0.00\t0.00\t0.00")

    def test_eval_missing_hypothesis(self):
        hyp = self.path("partial.hyp")
        with open(hyp, "w") as f:
            f.write(format_transcript(read_manifest(self.test_manifest)[0].id, []) + "\n")
        self.assertEqual(_run("eval", "--ref", self.test_manifest, "--hyp", hyp)[0], 1)

    def test_sweep(self):
        runs = self.path("runs.tsv")
        code, out, err = _run("sweep", "--spec", self.spec, "--language-counts", "2,1", "--seeds", "1,2",
                              "--runs", runs, *TINY)
        self.assertEqual(code, 0, err)
        rows = [line.split("\t") for line in out.splitlines()]
        self.assertEqual(rows[0], ["mode", "languages", "mean_per"])
        self.assertEqual([(r[0], r[1]) for r in rows[1:]],
                         [("baseline", "1"), ("baseline", "2"), ("upm", "1"), ("upm", "2")])

        with open(runs) as f:
            per_seed = [line.split("\t") for line in f.read().splitlines()[1:]]
        self.assertEqual(len(per_seed), 8)
        for mode, count, mean in rows[1:]:
            values = [float(r[3]) for r in per_seed if r[0] == mode and r[1] == count]
            self.assertEqual(len(values), 2)
            self.assertEqual(f"{np.mean(values):.4f}", mean)


if __name__ == "__main__":
    unittest.main()
