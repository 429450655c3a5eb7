"""Command-line entry point.

Exit codes: 0 success, 2 config error, 3 training divergence, 4 I/O error.
"""

import argparse
import sys
from pathlib import Path

from . import harness
from .config import load_config_file, resolve_config
from .digits import write_digit_corpus
from .errors import ConfigError, TrainingDivergedError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGED = 3
EXIT_IO = 4


def _add_common(sub):
    sub.add_argument("--config", required=True, help="config file (key=value or JSON echo)")
    sub.add_argument("--out", help="output directory (overrides the config's 'out')")
    sub.add_argument("--seed", type=int, help="override the config seed")
    sub.add_argument("--force", action="store_true",
                     help="overwrite existing outputs")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="dlrslab",
        description="Learning-rate scheduling lab: train, compare, and audit "
                    "per-epoch schedulers on PINN and digit-classification workloads.")
    subs = parser.add_subparsers(dest="command", required=True)

    _add_common(subs.add_parser("run", help="train one configured run"))

    cmp_p = subs.add_parser("compare", help="run several schedulers on identical data order")
    _add_common(cmp_p)
    cmp_p.add_argument("--schedulers", required=True,
                       help="comma-separated scheduler names, e.g. dlrs,constant")

    _add_common(subs.add_parser("lr-trace", help="log per-epoch scheduler decisions"))

    val_p = subs.add_parser("validate", help="check a config without training")
    val_p.add_argument("--config", required=True)
    val_p.add_argument("--seed", type=int)

    gen_p = subs.add_parser("gen-digits", help="write a synthetic digit corpus as IDX files")
    gen_p.add_argument("--out", required=True)
    gen_p.add_argument("--train", type=int, default=6000)
    gen_p.add_argument("--test", type=int, default=1000)
    gen_p.add_argument("--seed", type=int, default=42)

    return parser


def _load(args):
    raw = load_config_file(args.config)
    overrides = {"seed": getattr(args, "seed", None)}
    return resolve_config(raw, overrides=overrides)


def _out_dir(args, cfg):
    if args.out:
        return Path(args.out)
    if "out" in cfg:
        return Path(cfg["out"])
    return Path("runs") / f"{cfg['workload']}-{cfg['scheduler']}"


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "gen-digits":
            outdir = Path(args.out)
            outdir.mkdir(parents=True, exist_ok=True)
            paths = write_digit_corpus(outdir, args.train, args.test, seed=args.seed)
            for name, path in paths.items():
                print(f"{name}: {path}")
            return EXIT_OK

        cfg = _load(args)

        if args.command == "validate":
            harness.validate(cfg)
            print("config ok")
            return EXIT_OK

        harness.validate(cfg)
        out = _out_dir(args, cfg)

        if args.command == "run":
            result = harness.run(cfg, out, force=args.force)
            last = result.records[-1] if result.records else None
            if last is not None:
                print(f"done: {len(result.records)} epochs, final loss "
                      f"{last.train_loss:.6g}, metric {last.metric:.6g} -> {out}")
            return EXIT_OK

        if args.command == "compare":
            names = [tok.strip() for tok in args.schedulers.split(",") if tok.strip()]
            results, failures = harness.compare(cfg, names, out, force=args.force)
            for name, result in results.items():
                last = result.records[-1]
                print(f"{name}: final loss {last.train_loss:.6g}, "
                      f"metric {last.metric:.6g}")
            for name, message in failures.items():
                print(f"{name}: diverged ({message})", file=sys.stderr)
            return EXIT_DIVERGED if failures else EXIT_OK

        if args.command == "lr-trace":
            harness.lr_trace(cfg, out, force=args.force)
            print(f"trace written -> {out}/trace.csv")
            return EXIT_OK

        raise AssertionError(f"unhandled command {args.command}")

    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TrainingDivergedError as exc:
        print(f"training diverged: {exc} (partial records preserved)", file=sys.stderr)
        return EXIT_DIVERGED
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
