"""Subcommand handlers. Each takes the parsed argparse namespace and returns an exit code."""

import os
import sys

from core.catalog import load_default
from core.encoder import EncoderConfig
from core.errors import ShapeMismatch, UsageError
from core.evaluation import (
    compare_models,
    comparison_to_tsv,
    error_report,
    pair_transcripts,
    report_to_tsv,
    seen_unseen_split,
    seen_unseen_to_tsv,
)
from core.model import UPM, init_model, retarget
from core.signature import build_signature, load_inventory, read_inventory_file, signature_to_text, warn_collisions
from core.training import TrainConfig, print_progress, train, train_baseline
from core.xsampa import assign_attributes
from services.checkpoint import load_checkpoint, save_checkpoint
from services.dataset import (
    format_transcript,
    inventory_path,
    load_dataset,
    read_features,
    read_manifest,
    read_phoneme_set,
    read_transcripts,
)
from services.synth import SynthSpec, generate_synthetic, write_synthetic

TRAIN_FLAGS = (
    "learning_rate",
    "reg_lambda",
    "batch_size",
    "max_steps",
    "grad_clip_norm",
    "seed",
    "validation_fraction",
    "log_every",
    "layers",
    "cells",
)


def _emit(text, out=None):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as f:
            f.write(text)


def train_overrides(args):
    return {key: getattr(args, key, None) for key in TRAIN_FLAGS}


def cmd_attrs(args):
    catalog, table = load_default(args.catalog, args.table)
    for p in args.phonemes:
        assignment = assign_attributes(p, table)
        print(f"{p}\t{','.join(catalog.names_of(assignment.attributes))}")
    return 0


def cmd_signature(args):
    catalog, table = load_default(args.catalog, args.table)
    inv = load_inventory(args.inventory, table, language=args.language)
    sig = build_signature(inv, catalog)
    warn_collisions(sig)
    _emit(signature_to_text(sig), args.out)
    return 0


def cmd_synth(args):
    spec = SynthSpec.from_file(args.spec, seed=args.seed)
    catalog, table = load_default(args.catalog, args.table)
    train_set, test, union = generate_synthetic(spec, catalog, table)
    os.makedirs(args.out, exist_ok=True)
    train_manifest, test_manifest = write_synthetic(args.out, train_set, test, union)
    print(f"[Synth] Wrote {train_manifest} and {test_manifest}", file=sys.stderr)
    return 0


def feature_dim(corpora):
    dims = {u.features.shape[1] for c in corpora for u in c.utterances}
    if len(dims) != 1:
        raise ShapeMismatch(f"utterances disagree on the feature dimension: {sorted(dims)}")
    return dims.pop()


def cmd_train(args):
    cfg = TrainConfig.from_file(args.config, **train_overrides(args))
    catalog, table = load_default(args.catalog, args.table)
    corpora = load_dataset(args.data, table)
    encoder_config = EncoderConfig(feature_dim(corpora), cfg.layers, cfg.cells)
    model = init_model(args.mode, encoder_config, catalog, table, [c.inventory for c in corpora], cfg.seed)

    run = train if args.mode == UPM else train_baseline
    model, _ = run(model, corpora, cfg, progress=print_progress)
    save_checkpoint(model, args.out)
    return 0


def decode_utterances(model, utterances, language):
    return [(utt.id, model.decode(utt.features, language)) for utt in utterances]


def cmd_transcribe(args):
    model = load_checkpoint(args.ckpt)
    if args.inventory:
        if model.mode == UPM:
            model = retarget(model, load_inventory(args.inventory, model.table, language=args.lang))
        else:
            print("[Transcribe] Warning: the baseline cannot be retargeted; --inventory ignored", file=sys.stderr)

    rows = [r for r in read_manifest(args.data) if r.language == args.lang]
    if not rows:
        raise UsageError(f"--lang {args.lang}: no utterances of that language in {args.data}")
    base = os.path.dirname(os.path.abspath(args.data))
    lines = []
    for row in rows:
        hyp = model.decode(read_features(os.path.join(base, row.feature_path)), args.lang)
        lines.append(format_transcript(row.id, hyp) + "\n")
    _emit("".join(lines), args.out)
    return 0


def _test_inventory(manifest_path, rows):
    base = os.path.dirname(os.path.abspath(manifest_path))
    phonemes = []
    for language in dict.fromkeys(r.language for r in rows):
        path = inventory_path(base, language)
        if os.path.isfile(path):
            phonemes += [p for p in read_inventory_file(path) if p not in phonemes]
    return phonemes


def cmd_eval(args):
    rows = read_manifest(args.ref)
    references = {r.id: r.transcript for r in rows}
    pairs = pair_transcripts(references, read_transcripts(args.hyp))
    report = error_report(pairs)
    text = report_to_tsv(report)
    if args.train_union:
        inventory = _test_inventory(args.ref, rows)
        text += seen_unseen_to_tsv(seen_unseen_split(pairs, inventory, read_phoneme_set(args.train_union)))
    if args.baseline_hyp:
        baseline_pairs = pair_transcripts(references, read_transcripts(args.baseline_hyp))
        language = ",".join(dict.fromkeys(r.language for r in rows))
        comparison = compare_models(report, error_report(baseline_pairs), language=language)
        text += comparison_to_tsv([comparison])
    _emit(text, args.out)
    return 0
