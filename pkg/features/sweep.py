"""Language-count sweep: train both model kinds on growing sets of synthetic languages.

For each seed one dataset is generated with the largest count; each smaller
count trains on a prefix of its training languages and is scored on the
same test language. max_steps is the budget of the largest count; smaller
counts get the same number of updates per language.
"""

import math
import sys
from collections import namedtuple

import numpy as np

from core.catalog import load_default
from core.encoder import EncoderConfig
from core.errors import UsageError
from core.evaluation import error_report
from core.model import BASELINE, UPM, init_model, retarget
from core.training import TrainConfig, train, train_baseline
from features.commands import decode_utterances, train_overrides
from services.synth import SynthSpec, generate_synthetic

MODES = (BASELINE, UPM)

SweepRun = namedtuple("SweepRun", "mode languages seed per")


def parse_int_list(text, flag):
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise UsageError(f"{flag}: expected comma-separated integers, got {text!r}") from e
    if not values or min(values) <= 0:
        raise UsageError(f"{flag}: expected positive integers, got {text!r}")
    return values


def steps_for(cfg, count, largest):
    return math.ceil(cfg.max_steps * count / largest)


def score_model(model, test):
    """Overall PER of greedy transcripts of the test corpus."""
    if model.mode == UPM:
        model = retarget(model, test.inventory)
    hyps = dict(decode_utterances(model, test.utterances, test.language))
    return error_report([(utt.transcript, hyps[utt.id]) for utt in test.utterances]).per


def run_sweep(spec, counts, seeds, cfg, catalog, table, progress=None):
    counts = sorted(set(counts))
    runs = []
    for seed in seeds:
        train_set, test, _ = generate_synthetic(spec.replace(num_languages=max(counts), seed=seed), catalog, table)
        encoder_config = EncoderConfig(spec.feature_dim, cfg.layers, cfg.cells)
        for count in counts:
            corpora = train_set[:count]
            run_cfg = cfg.replace(seed=seed, max_steps=steps_for(cfg, count, counts[-1]))
            inventories = [c.inventory for c in corpora]
            for mode in MODES:
                model = init_model(mode, encoder_config, catalog, table, inventories, seed)
                fit = train if mode == UPM else train_baseline
                model, _ = fit(model, corpora, run_cfg)
                run = SweepRun(mode, count, seed, score_model(model, test))
                runs.append(run)
                if progress is not None:
                    progress(run)
    return runs


def summarize(runs):
    """Mean PER per (mode, languages), ordered by mode then count."""
    grouped = {}
    for run in runs:
        grouped.setdefault((run.mode, run.languages), []).append(run.per)
    return [(mode, count, float(np.mean(pers))) for (mode, count), pers in sorted(grouped.items())]


def runs_to_tsv(runs):
    lines = ["mode\tlanguages\tseed\tper"]
    lines += [f"{r.mode}\t{r.languages}\t{r.seed}\t{r.per!r}" for r in runs]
    return "\n".join(lines) + "\n"


def summary_to_tsv(summary):
    lines = ["mode\tlanguages\tmean_per"]
    lines += [f"{mode}\t{count}\t{per:.4f}" for mode, count, per in summary]
    return "\n".join(lines) + "\n"


def cmd_sweep(args):
    counts = parse_int_list(args.language_counts, "--language-counts")
    seeds = parse_int_list(args.seeds, "--seeds")
    spec = SynthSpec.from_file(args.spec)
    cfg = TrainConfig.from_file(args.config, **train_overrides(args))
    catalog, table = load_default(args.catalog, args.table)

    def log_run(run):
        print(f"[Sweep] {run.mode} languages={run.languages} seed={run.seed} per={run.per:.2f}", file=sys.stderr)

    runs = run_sweep(spec, counts, seeds, cfg, catalog, table, progress=log_run)
    if args.runs:
        with open(args.runs, "w", encoding="utf-8") as f:
            f.write(runs_to_tsv(runs))
    else:
        sys.stderr.write(runs_to_tsv(runs))
    sys.stdout.write(summary_to_tsv(summarize(runs)))
    return 0
