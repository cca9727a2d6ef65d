"""Command-line interface: ``chowliu <command> ...``.

Exit codes: 0 success, 2 usage error, 3 data error (unreadable or invalid
input files, dimension mismatches, bad configuration).
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import os
import sys

import numpy as np

from . import __version__
from .evaluate import hellinger_exact, tv_exact, tv_mc
from .experiment import ConfigError, parse_config, run_experiment, write_outputs
from .fileformats import ParseError, read_model, read_samples, write_model, write_samples
from .hierarchy import (
    GeneralThresholds,
    SymmetricThresholds,
    classify_general,
    classify_symmetric,
    report_csv,
    report_text,
)
from .instances import HardInstanceConfig, generate_hard_detailed, random_general, random_symmetric
from .learner import LearnedModel, chow_liu, chow_liu_symmetric
from .model import ModelError, SymmetricTreeModel, TreeModel

log = logging.getLogger("chowliu")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3

SYMMETRIC_BAND = (0.45, 0.55)


class UsageError(Exception):
    pass


def _as_tree_model(model) -> TreeModel:
    return model.to_tree_model() if isinstance(model, SymmetricTreeModel) else model


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# -- commands ---------------------------------------------------------------------


def cmd_generate(args) -> int:
    if args.kind == "hard":
        if args.m is None:
            raise UsageError("--m is required for hard instances")
        inst = generate_hard_detailed(HardInstanceConfig(args.n, args.m, args.seed))
        write_model(args.out, inst.model, tuple(inst.describe()))
    elif args.kind == "symmetric":
        write_model(args.out, random_symmetric(args.n, args.seed, args.alpha_law), (f"symmetric n={args.n} seed={args.seed}",))
    else:
        write_model(args.out, random_general(args.n, args.seed, args.low, args.high), (f"general n={args.n} seed={args.seed}",))
    return EXIT_OK


def cmd_sample(args) -> int:
    if args.count < 0:
        raise UsageError("--count must be nonnegative")
    model = _as_tree_model(read_model(args.model))
    write_samples(args.out, model.sample(args.seed, args.count))
    return EXIT_OK


def _weights_csv(learned: LearnedModel) -> str:
    in_tree = set(learned.tree)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    name = "mutual_information" if learned.mode == "general" else "abs_alpha_hat"
    w.writerow(["i", "j", name, "in_tree"])
    for i in range(learned.n):
        for j in range(i + 1, learned.n):
            w.writerow([i, j, repr(float(learned.weights[i, j])), int((i, j) in in_tree)])
    return buf.getvalue()


def cmd_learn(args) -> int:
    x = read_samples(args.samples)
    if x.shape[0] == 0:
        raise ParseError(f"{args.samples}: no samples")
    if args.mode == "symmetric":
        freq = (x == 1).mean(axis=0)
        lo, hi = SYMMETRIC_BAND
        odd = np.flatnonzero((freq < lo) | (freq > hi))
        if len(odd):
            listed = ", ".join(f"{i}:{freq[i]:.3f}" for i in odd[:10])
            log.warning(
                "symmetric mode assumes uniform node marginals; %d node(s) have P(+1) outside [%.2f, %.2f] (%s)",
                len(odd), lo, hi, listed,
            )
        learned = chow_liu_symmetric(x)
        write_model(args.out, learned.to_symmetric())
    else:
        learned = chow_liu(x)
        write_model(args.out, learned.to_tree_model())
    weights = args.weights or os.path.splitext(args.out)[0] + ".weights.csv"
    _write_text(weights, _weights_csv(learned))
    return EXIT_OK


def cmd_eval(args) -> int:
    p = _as_tree_model(read_model(args.true_model))
    q = _as_tree_model(read_model(args.learned_model))
    if p.n != q.n:
        raise ModelError(f"models have n={p.n} and n={q.n}")
    lines = [f"n={p.n}", f"method={args.method}"]
    if args.method == "exact":
        hv = hellinger_exact(p, q)
        lines += [f"tv={tv_exact(p, q)!r}", f"hellinger={hv.h!r}", f"hellinger_sq={hv.h2!r}"]
    else:
        est = tv_mc(p, q, args.mc_samples, args.seed)
        lines += [f"tv={est.value!r}", f"stderr={est.stderr!r}", f"samples={est.samples_used}", f"seed={args.seed}"]
    _write_text(args.out, "\n".join(lines) + "\n")
    return EXIT_OK


def _thresholds(mode: str, overrides: list[str]):
    cls = SymmetricThresholds if mode == "symmetric" else GeneralThresholds
    kwargs = {}
    for item in overrides or []:
        key, sep, val = item.partition("=")
        if not sep or key not in cls.__dataclass_fields__:
            raise UsageError(f"bad --threshold {item!r}; keys: {', '.join(cls.__dataclass_fields__)}")
        try:
            kwargs[key] = float(val)
        except ValueError:
            raise UsageError(f"bad --threshold value {val!r}") from None
    return cls(**kwargs)


def cmd_layering(args) -> int:
    model = read_model(args.learned_model)
    mode = args.mode or ("symmetric" if isinstance(model, SymmetricTreeModel) else "general")
    true_model = read_model(args.true_model) if args.true_model else None
    if true_model is not None and true_model.n != model.n:
        raise ModelError(f"true model has n={true_model.n}, learned model has n={model.n}")
    if mode == "symmetric":
        if not isinstance(model, SymmetricTreeModel):
            raise ModelError("symmetric layering needs a tree-ising-sym model file")
        report = classify_symmetric(LearnedModel.from_model(model), args.eps, _thresholds(mode, args.threshold), true_model)
    else:
        learned = LearnedModel.from_model(_as_tree_model(model))
        truth = _as_tree_model(true_model) if true_model is not None else None
        report = classify_general(learned, args.eps, _thresholds(mode, args.threshold), truth)
    _write_text(args.out + ".txt", report_text(report))
    _write_text(args.out + ".csv", report_csv(report))
    return EXIT_OK


def cmd_experiment(args) -> int:
    with open(args.config, encoding="utf-8") as fh:
        cfg = parse_config(fh.read())
    if args.jobs is not None:
        cfg = type(cfg)(**{**cfg.__dict__, "jobs": args.jobs})
    if args.mc_samples is not None:
        cfg = type(cfg)(**{**cfg.__dict__, "mc_samples": args.mc_samples})
    if args.seed is not None:
        cfg = type(cfg)(**{**cfg.__dict__, "master_seed": args.seed})
    result = run_experiment(cfg)
    paths = write_outputs(result, args.out)
    sys.stdout.write(f"c={result.c!r}\n")
    for key in ("results", "instances", "aggregate", "fit", "figure"):
        if key in paths:
            sys.stdout.write(f"{key}={paths[key]}\n")
    return EXIT_OK


# -- parser ---------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="chowliu", description="Learn and evaluate tree-structured binary Bayesnets.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-q", "--quiet", action="store_true", help="only warnings and errors on stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write a random model file")
    g.add_argument("--kind", choices=("hard", "symmetric", "general"), default="hard")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--m", type=int, help="target sample size (hard instances)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--alpha-law", default="uniform", choices=("uniform", "banded"))
    g.add_argument("--low", type=float, default=0.0, help="lower end of conditionals (general)")
    g.add_argument("--high", type=float, default=1.0, help="upper end of conditionals (general)")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("sample", help="draw samples from a model file")
    s.add_argument("model")
    s.add_argument("--count", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_sample)

    lrn = sub.add_parser("learn", help="learn a tree model from a sample file")
    lrn.add_argument("samples")
    lrn.add_argument("--mode", choices=("general", "symmetric"), default="general")
    lrn.add_argument("--out", required=True, help="learned model file")
    lrn.add_argument("--weights", help="all-pairs weight CSV (default: <out stem>.weights.csv)")
    lrn.set_defaults(func=cmd_learn)

    e = sub.add_parser("eval", help="distance between a true and a learned model")
    e.add_argument("true_model")
    e.add_argument("learned_model")
    e.add_argument("--method", choices=("exact", "mc"), default="exact")
    e.add_argument("--mc-samples", type=int, default=40000)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--out", help="also write the report here (default: stdout only)")
    e.set_defaults(func=cmd_eval)

    lay = sub.add_parser("layering", help="edge layering report of a learned model")
    lay.add_argument("learned_model")
    lay.add_argument("--eps", type=float, required=True)
    lay.add_argument("--mode", choices=("general", "symmetric"))
    lay.add_argument("--true-model", help="true model file; enables diagnostic output")
    lay.add_argument("--threshold", action="append", metavar="KEY=VALUE", help="override a threshold coefficient")
    lay.add_argument("--out", required=True, help="output prefix; writes <prefix>.txt and <prefix>.csv")
    lay.set_defaults(func=cmd_layering)

    x = sub.add_parser("experiment", help="run the hard-instance sample-size experiment")
    x.add_argument("config", help="key = value configuration file")
    x.add_argument("--out", required=True, help="output directory")
    x.add_argument("--jobs", type=int)
    x.add_argument("--mc-samples", type=int)
    x.add_argument("--seed", type=int, help="override master_seed")
    x.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"chowliu: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, ModelError, ConfigError, OSError, ValueError) as exc:
        print(f"chowliu: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
