import argparse
import sys
import traceback

from config import Config
from core.errors import UsageError, ZeroPhoneError
from core.model import BASELINE, UPM


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad flags; report them as user errors instead."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _add_data_flags(p):
    p.add_argument("--catalog", help="attribute catalog TSV (default: ZPH_CATALOG_PATH)")
    p.add_argument("--table", help="base phoneme table TSV (default: ZPH_BASE_TABLE_PATH)")


def _add_train_flags(p):
    p.add_argument("--config", help="key = value file with training settings")
    p.add_argument("--learning-rate", dest="learning_rate", type=float)
    p.add_argument("--reg-lambda", dest="reg_lambda", type=float, help="weight of the squared norm of V")
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--max-steps", dest="max_steps", type=int)
    p.add_argument("--grad-clip-norm", dest="grad_clip_norm", help="global norm limit, or 'none'")
    p.add_argument("--seed", type=int)
    p.add_argument("--validation-fraction", dest="validation_fraction", type=float)
    p.add_argument("--log-every", dest="log_every", type=int)
    p.add_argument("--layers", type=int, help="BiLSTM layers")
    p.add_argument("--cells", type=int, help="LSTM cells per direction")


def build_parser():
    from features.commands import cmd_attrs, cmd_eval, cmd_signature, cmd_synth, cmd_train, cmd_transcribe
    from features.sweep import cmd_sweep

    parser = _Parser(prog="zerophone", description="Zero-shot phoneme recognition through articulatory attributes")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    p = sub.add_parser("attrs", help="print the attributes assigned to X-SAMPA phonemes")
    p.add_argument("phonemes", nargs="+", help="X-SAMPA phonemes")
    _add_data_flags(p)
    p.set_defaults(handler=cmd_attrs)

    p = sub.add_parser("signature", help="emit the signature matrix of an inventory")
    p.add_argument("--inventory", required=True, help="inventory file, one phoneme per line")
    p.add_argument("--language", help="language id (default: inventory file name)")
    p.add_argument("--out", help="write here instead of standard output")
    _add_data_flags(p)
    p.set_defaults(handler=cmd_signature)

    p = sub.add_parser("synth", help="generate a synthetic multilingual dataset")
    p.add_argument("--spec", required=True, help="key = value synth spec file")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, help="override the seed in the synth file")
    _add_data_flags(p)
    p.set_defaults(handler=cmd_synth)

    p = sub.add_parser("train", help="train a model and write a checkpoint")
    p.add_argument("--data", required=True, help="training manifest")
    p.add_argument("--mode", required=True, choices=(UPM, BASELINE))
    p.add_argument("--out", required=True, help="checkpoint path")
    _add_train_flags(p)
    _add_data_flags(p)
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("transcribe", help="greedy-decode the utterances of one language")
    p.add_argument("--ckpt", required=True, help="model checkpoint")
    p.add_argument("--data", required=True, help="manifest with the utterances")
    p.add_argument("--lang", required=True, help="language id to decode")
    p.add_argument("--inventory", help="retarget to this inventory before decoding")
    p.add_argument("--out", help="write here instead of standard output")
    p.set_defaults(handler=cmd_transcribe)

    p = sub.add_parser("eval", help="score hypotheses against a reference manifest")
    p.add_argument("--ref", required=True, help="reference manifest")
    p.add_argument("--hyp", required=True, help="transcripts as written by transcribe")
    p.add_argument("--train-union", dest="train_union", help="phonemes seen in training, one per line")
    p.add_argument("--baseline-hyp", dest="baseline_hyp", help="baseline transcripts to compare against")
    p.add_argument("--out", help="write here instead of standard output")
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("sweep", help="compare both model kinds over growing language counts")
    p.add_argument("--spec", required=True, help="key = value synth spec file")
    p.add_argument("--language-counts", dest="language_counts", required=True, help="e.g. 2,4,6")
    p.add_argument("--seeds", required=True, help="e.g. 1,2,3")
    p.add_argument("--runs", help="write per-seed results here (default: standard error)")
    _add_train_flags(p)
    _add_data_flags(p)
    p.set_defaults(handler=cmd_sweep)

    return parser


def run(argv=None):
    """Exit status: 0 success, 1 user error, 2 internal error."""
    try:
        if not Config.validate():
            return 1
        args = build_parser().parse_args(argv)
        return args.handler(args) or 0
    except (ZeroPhoneError, OSError) as e:
        print(f"[Error] {e}", file=sys.stderr)
        return 1
    except Exception:
        traceback.print_exc()
        return 2


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
