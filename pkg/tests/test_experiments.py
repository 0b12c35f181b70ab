"""Desk-scale zero-shot experiments. Slow: set ZPH_SLOW_TESTS=1 to run them."""

import os
import unittest

import numpy as np

from core.encoder import EncoderConfig
from core.evaluation import error_report, seen_unseen_split
from core.model import BASELINE, UPM, init_model, retarget
from core.training import TrainConfig, mean_loss, train, train_baseline
from features.commands import decode_utterances
from features.sweep import run_sweep, summarize
from services.synth import SynthSpec, generate_synthetic
from tests.helpers import shipped_tables

ASSETS = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "assets")

slow = unittest.skipUnless(os.getenv("ZPH_SLOW_TESTS") == "1", "set ZPH_SLOW_TESTS=1 to run")


def _train_cfg(**changes):
    return TrainConfig.from_file(os.path.join(ASSETS, "train.env")).replace(**changes)


def _spec(**changes):
    return SynthSpec.from_file(os.path.join(ASSETS, "synth.env")).replace(**changes)


def _fit(mode, spec, cfg, corpora):
    catalog, table = shipped_tables()
    encoder_config = EncoderConfig(spec.feature_dim, cfg.layers, cfg.cells)
    model = init_model(mode, encoder_config, catalog, table, [c.inventory for c in corpora], cfg.seed)
    fit = train if mode == UPM else train_baseline
    return model, fit(model, corpora, cfg)[0]


@slow
class TestTrainingRegressions(unittest.TestCase):
    def _loss_ratio(self, mode):
        catalog, table = shipped_tables()
        spec = _spec(num_languages=2, seed=0)
        corpora, _, _ = generate_synthetic(spec, catalog, table)
        initial, trained = _fit(mode, spec, _train_cfg(seed=0), corpora)
        utterances = [u for c in corpora for u in c.utterances]
        return mean_loss(trained, utterances) / mean_loss(initial, utterances)

    def test_attribute_model_loss(self):
        self.assertLess(self._loss_ratio(UPM), 0.25)

    def test_baseline_loss(self):
        self.assertLess(self._loss_ratio(BASELINE), 0.5)


@slow
class TestZeroShot(unittest.TestCase):
    def test_attribute_model_beats_baseline(self):
        catalog, table = shipped_tables()
        per = {UPM: [], BASELINE: []}
        unseen = {UPM: [], BASELINE: []}
        for seed in range(1, 6):
            spec = _spec(num_languages=3, phonemes_per_language=8, num_unseen_test_phonemes=3, seed=seed)
            corpora, test, union = generate_synthetic(spec, catalog, table)
            for mode in (UPM, BASELINE):
                _, model = _fit(mode, spec, _train_cfg(seed=seed), corpora)
                if mode == UPM:
                    model = retarget(model, test.inventory)
                hyps = dict(decode_utterances(model, test.utterances, test.language))
                pairs = [(u.transcript, hyps[u.id]) for u in test.utterances]
                per[mode].append(error_report(pairs).per)
                unseen[mode].append(seen_unseen_split(pairs, test.inventory, union).unseen_per)

        self.assertLess(np.mean(per[UPM]), np.mean(per[BASELINE]))
        self.assertLess(np.mean(unseen[UPM]), 100.0)
        self.assertEqual(unseen[BASELINE], [100.0] * 5)

    def test_more_languages_help(self):
        catalog, table = shipped_tables()
        runs = run_sweep(_spec(), [2, 4, 6], [1, 2, 3], _train_cfg(), catalog, table)
        summary = {(mode, count): per for mode, count, per in summarize(runs)}
        for mode in (UPM, BASELINE):
            pers = [summary[(mode, count)] for count in (2, 4, 6)]
            self.assertEqual(pers, sorted(pers, reverse=True), mode)
        for count in (2, 4, 6):
            self.assertLessEqual(summary[(UPM, count)], summary[(BASELINE, count)])


if __name__ == "__main__":
    unittest.main()
