"""Command-line interface.

Subcommands follow the testing workflow: ``gen`` samples, ``featurize``
them, ``train`` a network, ``calibrate`` statistics under independence,
``test`` a sample, and estimate ``power``.

Exit codes: 0 success, 1 usage error, 2 data error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .bench import DESK_SIZES, FULL_SIZES, run_experiment
from .calibrate import TEST_INDICATORS, CalibrationTable, calibrate, deep_test, indicator_test
from .dgp import GenSpec, ModelId, build_corpus, gen_model, write_manifest
from .dgp.corpus import read_manifest
from .errors import DeptestError, SchemaError
from .features import DEFAULT_FEATURES, featurize, read_feature_set, write_feature_set
from .nn import Architecture, TrainConfig, build_architecture, load_model, save_model, train
from .nn.model import model_hash
from .sample import format_sample_csv, read_sample_csv

SEED_ENV = "DEPTEST_SEED"


class UsageError(Exception):
    """Bad command-line usage (exit code 1)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _int_list(text: str) -> list[int]:
    try:
        vals = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("expected at least one integer")
    return vals


def _float_list(text: str) -> list[float]:
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals or not all(0.0 < a < 1.0 for a in vals):
        raise argparse.ArgumentTypeError("alpha values must lie in (0, 1)")
    return vals


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _alpha(text: str) -> float:
    vals = _float_list(text)
    if len(vals) != 1:
        raise argparse.ArgumentTypeError("expected a single alpha")
    return vals[0]


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None


def _write_manifest(path: Path, command: str, argv, config: dict, seed: int, inputs, outputs, started: float):
    doc = {
        "command": command,
        "argv": list(argv),
        "config": config,
        "seed": seed,
        "tool_version": __version__,
        "inputs": [str(p) for p in inputs],
        "outputs": [str(p) for p in outputs],
        "wall_clock_seconds": round(time.time() - started, 3),
    }
    path.write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


def _manifest_path(out: Path) -> Path:
    return out / "manifest.json" if out.is_dir() else out.with_name(out.name + ".manifest.json")


# --- subcommands ------------------------------------------------------------------


def cmd_gen(args, argv) -> int:
    started = time.time()
    seed = _seed(args)
    if args.corpus:
        if args.out is None:
            raise UsageError("gen --corpus needs --out DIR")
        out = Path(args.out)
        (out / "samples").mkdir(parents=True, exist_ok=True)
        corpus = build_corpus(args.sizes, args.per_model, args.role, seed, args.threads)
        for i, item in enumerate(corpus):
            (out / "samples" / f"{i:06d}.csv").write_text(format_sample_csv(item.sample), encoding="utf-8")
        write_manifest(corpus, out / "corpus.json")
        config = {"sizes": args.sizes, "per_model": args.per_model, "role": args.role}
        _write_manifest(out / "manifest.json", "gen", argv, config, seed, [], [out / "corpus.json"], started)
        print(f"wrote {len(corpus)} samples to {out}")
        return 0
    if args.model is None or args.n is None:
        raise UsageError("gen needs --model and --n (or --corpus)")
    model = ModelId.parse(args.model)
    spec = GenSpec(model, args.n, args.role, args.noise_class, args.variant, seed)
    text = format_sample_csv(gen_model(spec))
    if args.out is None:
        sys.stdout.write(text)
        return 0
    out = Path(args.out)
    out.write_text(text, encoding="utf-8")
    _write_manifest(_manifest_path(out), "gen", argv, spec.to_dict(), seed, [], [out], started)
    return 0


def _corpus_samples(corpus_dir: Path):
    entries = read_manifest(corpus_dir / "corpus.json")
    samples = [read_sample_csv(corpus_dir / "samples" / f"{i:06d}.csv") for i in range(len(entries))]
    return samples, [lab for _, lab in entries]


def cmd_featurize(args, argv) -> int:
    started = time.time()
    if args.corpus:
        samples, labels = _corpus_samples(Path(args.corpus))
        inputs = [Path(args.corpus)]
    elif args.inputs:
        samples = [read_sample_csv(p) for p in args.inputs]
        labels = None
        inputs = [Path(p) for p in args.inputs]
    else:
        raise UsageError("featurize needs --corpus DIR or CSV files")
    fs = featurize(samples, labels, DEFAULT_FEATURES, args.threads)
    out = Path(args.out)
    write_feature_set(fs, out)
    _write_manifest(_manifest_path(out), "featurize", argv, DEFAULT_FEATURES.to_dict(), None, inputs, [out], started)
    print(f"wrote {len(fs)} feature records to {out}")
    return 0


def cmd_train(args, argv) -> int:
    started = time.time()
    seed = _seed(args)
    fs = read_feature_set(args.features)
    cfg = TrainConfig(seed=seed, max_epochs=args.max_epochs)
    model = build_architecture(args.arch, seed=seed)
    model, hist = train(model, fs, cfg)
    out = Path(args.out)
    save_model(model, out)
    hist_path = out.with_name(out.name + ".history.json")
    hist_path.write_text(json.dumps(hist.to_dict(), indent=1) + "\n", encoding="utf-8")
    _write_manifest(
        _manifest_path(out), "train", argv, cfg.to_dict(), seed, [args.features], [out, hist_path], started
    )
    print(json.dumps(hist.final.to_dict()))
    return 0


def _stat_list(text: str) -> list[str]:
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if tok == "indicators":
            out.extend(TEST_INDICATORS)
        elif tok:
            out.append(tok)
    return out


def _load_models(paths) -> dict:
    models = {}
    for p in paths or []:
        m = load_model(p)
        models[m.tag] = m
    return models


def cmd_calibrate(args, argv) -> int:
    started = time.time()
    seed = _seed(args)
    models = _load_models(args.model_file)
    stats = _stat_list(args.stat) if args.stat else []
    stats += [t for t in models if t not in stats]
    if not stats:
        raise UsageError("calibrate needs --stat and/or --model-file")
    for s in stats:
        if s not in TEST_INDICATORS and s not in models:
            raise UsageError(f"unknown statistic {s!r} (indicators: {', '.join(TEST_INDICATORS)})")
    table = calibrate(stats, args.n, args.alpha, args.nprime, seed, models, DEFAULT_FEATURES, args.threads)
    out = Path(args.out)
    if args.merge and out.exists():
        old = CalibrationTable.load(out)
        old.merge(table)
        table = old
    table.save(out)
    config = {"statistics": stats, "n": args.n, "alpha": args.alpha, "n_prime": args.nprime}
    _write_manifest(_manifest_path(out), "calibrate", argv, config, seed, args.model_file or [], [out], started)
    print(json.dumps(table.to_dict()["entries"]))
    return 0


def cmd_test(args, argv) -> int:
    sample = read_sample_csv(args.input)
    table = CalibrationTable.load(args.calibration)
    if (args.model_file is None) == (args.stat is None):
        raise UsageError("test needs exactly one of --model-file or --stat")
    if args.model_file is not None:
        model = load_model(args.model_file)
        res = deep_test(sample, model, table, args.alpha)
    else:
        if args.stat not in TEST_INDICATORS:
            raise UsageError(f"unknown indicator {args.stat!r}")
        res = indicator_test(sample, args.stat, table, args.alpha)
    print(json.dumps(res.to_dict()))
    return 0


def cmd_power(args, argv) -> int:
    started = time.time()
    seed = _seed(args)
    if args.full:
        print("warning: --full runs 1,000 reps with N'=50,000 at six sizes; expect days of CPU time", file=sys.stderr)
    sizes = args.sizes or (list(FULL_SIZES) if args.full else list(DESK_SIZES))
    reps = args.reps or (1000 if args.full else 200)
    nprime = args.nprime or (50000 if args.full else 5000)
    models = _load_models(args.model_file)
    table = CalibrationTable.load(args.calibration) if args.calibration else None
    methods = _stat_list(args.methods) if args.methods else None
    result = run_experiment(
        args.exp, sizes, reps, args.alpha, seed, models, table, nprime, methods, DEFAULT_FEATURES, args.threads
    )
    out = Path(args.out)
    paths = result.write(out)
    config = {
        "experiment": args.exp,
        "sizes": sizes,
        "reps": reps,
        "alpha": args.alpha,
        "n_prime": nprime,
        "methods": result.methods,
        "model_hashes": {k: model_hash(m) for k, m in models.items()},
    }
    _write_manifest(out / "manifest.json", "power", argv, config, seed, args.model_file or [], paths, started)
    print(f"wrote {', '.join(str(p) for p in paths)}")
    return 0


# --- parser -----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="deptest", description="Deep-testing for bivariate independence.")
    p.add_argument("--version", action="version", version=f"deptest {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def common(sp, seed=True):
        if seed:
            sp.add_argument("--seed", type=int, default=None, help=f"base seed (default: ${SEED_ENV}, else 0)")
        sp.add_argument("--threads", type=_positive, default=1)

    g = sub.add_parser("gen", help="generate samples")
    common(g)
    g.add_argument("--model", help="model id, e.g. linear, tree-ring, independent")
    g.add_argument("--n", type=_positive)
    g.add_argument("--role", choices=("train", "test"), default="train")
    g.add_argument("--noise-class", choices=("L1", "L2", "L3"))
    g.add_argument("--variant", choices=("A", "B"))
    g.add_argument("--corpus", action="store_true", help="generate a balanced labeled corpus")
    g.add_argument("--sizes", type=_int_list, default=[50, 100])
    g.add_argument("--per-model", type=_positive, default=10)
    g.add_argument("--out")

    f = sub.add_parser("featurize", help="compute feature records")
    common(f, seed=False)
    f.add_argument("--corpus", help="corpus directory written by gen --corpus")
    f.add_argument("inputs", nargs="*", help="sample CSV files")
    f.add_argument("--out", required=True)

    t = sub.add_parser("train", help="train a network on feature records")
    common(t)
    t.add_argument("--features", required=True)
    t.add_argument("--arch", choices=[a.value for a in Architecture], required=True)
    t.add_argument("--max-epochs", type=_positive, default=50)
    t.add_argument("--out", required=True)

    c = sub.add_parser("calibrate", help="Monte-Carlo critical values under independence")
    common(c)
    c.add_argument("--stat", help="comma-separated indicator names, or 'indicators' for all 19")
    c.add_argument("--model-file", action="append", help="trained model file (repeatable)")
    c.add_argument("--n", type=_int_list, required=True)
    c.add_argument("--alpha", type=_float_list, required=True)
    c.add_argument("--nprime", type=_positive, default=5000)
    c.add_argument("--merge", action="store_true", help="add entries to an existing table")
    c.add_argument("--out", required=True)

    s = sub.add_parser("test", help="test one sample for independence")
    s.add_argument("--input", required=True, help="sample CSV")
    s.add_argument("--calibration", required=True)
    s.add_argument("--model-file")
    s.add_argument("--stat")
    s.add_argument("--alpha", type=_alpha, required=True)

    w = sub.add_parser("power", help="Monte-Carlo power experiments")
    common(w)
    w.add_argument("--exp", choices=("exp1", "exp2"), required=True)
    w.add_argument("--sizes", type=_int_list)
    w.add_argument("--reps", type=_positive)
    w.add_argument("--alpha", type=_alpha, required=True)
    w.add_argument("--nprime", type=_positive)
    w.add_argument("--model-file", action="append")
    w.add_argument("--calibration")
    w.add_argument("--methods", help="comma-separated subset of methods")
    w.add_argument("--full", action="store_true", help="full-scale settings (slow)")
    w.add_argument("--out", required=True)
    return p


COMMANDS = {
    "gen": cmd_gen,
    "featurize": cmd_featurize,
    "train": cmd_train,
    "calibrate": cmd_calibrate,
    "test": cmd_test,
    "power": cmd_power,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args, argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (DeptestError, SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc.filename or ''}: {exc.strerror}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
