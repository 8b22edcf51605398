"""Command-line front-end: simulate, fit, segment, select, classify, cv, bench.

Exit codes: 0 success, 1 data or runtime error, 2 usage error.  All
randomness flows from ``--seed`` (default 42), so every subcommand is
bit-reproducible on one platform.  ``REGIMECURVE_LOG`` sets the log level.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import data_io, plots
from .classify import predict_batch, train
from .core import CurveSet, TimeGrid
from .evaluate import kfold_cv, runtime_bench
from .model_selection import grid_select
from .piecewise import fisher_segment
from .rhlp import EmConfig, fit_em
from .simulate import (
    SimSpec,
    complex_classes,
    experiment23_spec,
    sample_rhlp,
    smoothness_spec,
    waveform,
)

log = logging.getLogger(__name__)


class UsageError(Exception):
    """Bad flag combination or value; maps to exit code 2."""


def _parse_range(text: str, name: str) -> range:
    try:
        if ":" in text:
            lo, hi = text.split(":")
            lo, hi = int(lo), int(hi)
        else:
            lo = hi = int(text)
    except ValueError:
        raise UsageError(f"{name} must be an integer or lo:hi range, got {text!r}") from None
    if hi < lo:
        raise UsageError(f"{name} range is empty: {text!r}")
    return range(lo, hi + 1)


def _parse_int_list(text: str, name: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"{name} must be a comma-separated integer list, got {text!r}") from None


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--seed", type=int, default=42, help="RNG seed (default 42)")
    sub.add_argument("--tol", type=float, default=1e-6, help="EM relative log-likelihood tolerance")
    sub.add_argument("--max-iter", type=int, default=1000, help="EM iteration cap")
    sub.add_argument("--restarts", type=int, default=5, help="EM restarts")
    sub.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                     help="parallelism bound where cells/folds are independent")


def _em_config(args) -> EmConfig:
    return EmConfig(
        max_iter=args.max_iter, tol=args.tol, restarts=args.restarts, seed=args.seed,
    )


def _figure_path(path) -> Path:
    path = Path(path)
    return path.with_suffix(".png") if path.suffix != ".png" else path


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="regimecurve",
        description="Curve modeling with regime changes: optimal piecewise "
                    "segmentation, logistic-gated regression, and MAP classification.",
    )
    cmds = parser.add_subparsers(dest="command", required=True)

    sim = cmds.add_parser("simulate", help="generate a seeded synthetic curve set")
    sim.add_argument("--scenario", required=True,
                     choices=["experiment23", "smoothness", "waveform", "complex", "model"])
    sim.add_argument("--n", type=int, default=50, help="number of curves")
    sim.add_argument("--m", type=int, default=100, help="samples per curve")
    sim.add_argument("--level", type=int, default=1, help="smoothness level 1..10")
    sim.add_argument("--n-per-class", type=int, default=500)
    sim.add_argument("--endpoint", default=True, action=argparse.BooleanOptionalAction,
                     help="include t=20 in the waveform grid (21 points)")
    sim.add_argument("--model-in", help="generator model JSON for --scenario model")
    sim.add_argument("--output", required=True, help="curves CSV path")
    sim.add_argument("--labels-out", help="labels CSV path")
    sim.add_argument("--mean-out", help="true mean curve path")
    sim.add_argument("--z-out", help="true hidden labels path")
    sim.add_argument("--seed", type=int, default=42)
    sim.set_defaults(run=cmd_simulate)

    for name, family in (("fit", None), ("segment", "piecewise")):
        sub = cmds.add_parser(
            name,
            help="fit one model (or a classifier when --labels is given)"
            if name == "fit" else "piecewise segmentation fit",
        )
        sub.add_argument("--input", required=True, help="curves CSV")
        sub.add_argument("--labels", help="labels CSV; trains a per-class classifier")
        sub.add_argument("--K", type=int, required=True, help="regime count")
        sub.add_argument("--p", type=int, required=True, help="polynomial degree")
        if name == "fit":
            sub.add_argument("--family", choices=["rhlp", "piecewise"], default="rhlp")
        sub.add_argument("--min-segment-len", type=int, default=1,
                         help="piecewise only: minimum samples per segment")
        sub.add_argument("--model-out", help="model JSON path")
        sub.add_argument("--emit-plot",
                         help="plot-data TSV path; a .png figure renders alongside")
        sub.add_argument("--standardize-time", action="store_true",
                         help="rescale the grid to [0,1] before fitting")
        _add_common(sub)
        sub.set_defaults(run=cmd_fit, forced_family=family)

    sel = cmds.add_parser("select", help="BIC grid search over (K, p)")
    sel.add_argument("--input", required=True)
    sel.add_argument("--K-range", default="1:5", help="inclusive lo:hi (default 1:5)")
    sel.add_argument("--p-range", default="0:3", help="inclusive lo:hi (default 0:3)")
    sel.add_argument("--output", help="report JSON path")
    sel.add_argument("--tsv", help="report TSV path")
    sel.add_argument("--emit-plot", help="figure PNG path")
    _add_common(sel)
    sel.set_defaults(run=cmd_select)

    cls = cmds.add_parser("classify", help="MAP-classify curves with a saved classifier")
    cls.add_argument("--model-in", required=True, help="classifier JSON")
    cls.add_argument("--input", required=True, help="curves CSV")
    cls.add_argument("--output", required=True, help="predictions CSV (label + posteriors)")
    cls.set_defaults(run=cmd_classify)

    cv = cmds.add_parser("cv", help="stratified k-fold cross-validated error")
    cv.add_argument("--input", required=True)
    cv.add_argument("--labels", required=True)
    cv.add_argument("--folds", type=int, default=5)
    cv.add_argument("--family", choices=["rhlp", "piecewise"], default="rhlp")
    cv.add_argument("--K", type=int, required=True)
    cv.add_argument("--p", type=int, required=True)
    cv.add_argument("--min-segment-len", type=int, default=1)
    cv.add_argument("--output", help="report JSON path")
    cv.add_argument("--tsv", help="report TSV path")
    cv.add_argument("--emit-plot", help="figure PNG path")
    _add_common(cv)
    cv.set_defaults(run=cmd_cv)

    bench = cmds.add_parser("bench", help="wall-time scaling benchmark")
    bench.add_argument("--n-list", default="50", help="comma-separated curve counts")
    bench.add_argument("--m-list", default="100,200,400", help="comma-separated curve sizes")
    bench.add_argument("--methods", default="piecewise,rhlp")
    bench.add_argument("--K", type=int, default=3)
    bench.add_argument("--p", type=int, default=2)
    bench.add_argument("--repetitions", type=int, default=3)
    bench.add_argument("--output", help="report JSON path")
    bench.add_argument("--tsv", help="report TSV path")
    bench.add_argument("--emit-plot", help="figure PNG path")
    _add_common(bench)
    bench.set_defaults(run=cmd_bench)

    return parser


def _validate(args) -> None:
    for name in ("K", "p", "folds", "max_iter", "restarts", "n", "m",
                 "n_per_class", "level", "repetitions", "min_segment_len", "threads"):
        if not hasattr(args, name):
            continue
        value = getattr(args, name)
        lower = {"p": 0}.get(name, 1)
        if value < lower:
            flag = name.replace("_", "-")
            raise UsageError(f"{flag} must be >= {lower}")
    if getattr(args, "folds", 2) < 2:
        raise UsageError("folds must be >= 2")
    if getattr(args, "tol", 1.0) <= 0:
        raise UsageError("tol must be > 0")
    if getattr(args, "command", "") == "simulate" and args.scenario == "model" and not args.model_in:
        raise UsageError("--scenario model requires --model-in")


def cmd_simulate(args) -> int:
    labels = mean = z = None
    if args.scenario == "experiment23":
        spec = experiment23_spec(args.n, args.m, seed=args.seed)
        curves, mean, z = sample_rhlp(spec)
    elif args.scenario == "smoothness":
        if not 1 <= args.level <= 10:
            raise UsageError("level must be in 1..10")
        spec = smoothness_spec(args.level, n=args.n, m=args.m, seed=args.seed)
        curves, mean, z = sample_rhlp(spec)
    elif args.scenario == "waveform":
        curves, labels = waveform(args.n_per_class, seed=args.seed,
                                  include_endpoint=args.endpoint)
    elif args.scenario == "complex":
        curves, labels = complex_classes(seed=args.seed)
    else:
        model = data_io.read_model(args.model_in)
        spec = SimSpec(
            K=model.K, p=model.p,
            betas=tuple(tuple(r.beta) for r in model.regimes),
            gate=tuple(map(tuple, model.gate)),
            sigmas=tuple(float(np.sqrt(r.sigma2)) for r in model.regimes),
            n=args.n, m=model.grid.m,
            t_start=float(model.grid.t[0]), t_end=float(model.grid.t[-1]),
            seed=args.seed,
        )
        curves, mean, z = sample_rhlp(spec)

    data_io.write_curves(args.output, curves)
    print(f"wrote {curves.n} curves x {curves.m} samples to {args.output}")
    if args.labels_out:
        if labels is None:
            raise UsageError(f"--labels-out does not apply to scenario {args.scenario}")
        data_io.write_labels(args.labels_out, labels)
    if args.mean_out:
        if mean is None:
            raise UsageError(f"--mean-out does not apply to scenario {args.scenario}")
        data_io.write_vector(args.mean_out, mean)
    if args.z_out:
        if z is None:
            raise UsageError(f"--z-out does not apply to scenario {args.scenario}")
        data_io.write_labels(args.z_out, z)
    return 0


def cmd_fit(args) -> int:
    family = args.forced_family or args.family
    curves = data_io.read_curves(args.input)
    if args.standardize_time:
        t = curves.grid.t
        curves = CurveSet(TimeGrid((t - t[0]) / (t[-1] - t[0])), curves.values)

    if args.labels:
        labels = data_io.read_labels(args.labels)
        if labels.size != curves.n:
            raise ValueError(f"{labels.size} labels for {curves.n} curves")
        clf = train(curves, labels, family=family, K=args.K, p=args.p,
                    cfg=_em_config(args), min_segment_len=args.min_segment_len)
        print(f"trained {family} classifier: "
              + ", ".join(f"class {c.label} (prior {c.prior:.3f})" for c in clf.classes))
        if args.model_out:
            data_io.write_model(args.model_out, clf)
        return 0

    if family == "piecewise":
        model = fisher_segment(curves, args.K, args.p, args.min_segment_len)
        bounds = ", ".join(str(int(g)) for g in model.gamma)
        print(f"piecewise fit: K={args.K} p={args.p} loglik={model.loglik:.6g} gamma=({bounds})")
    else:
        model, trace = fit_em(curves, args.K, args.p, _em_config(args))
        print(f"rhlp fit: K={args.K} p={args.p} loglik={model.loglik:.6g} "
              f"iterations={trace.iterations} converged={trace.converged}")
    if args.model_out:
        data_io.write_model(args.model_out, model)
    if args.emit_plot:
        data_io.emit_plot_data(model, curves, args.emit_plot)
        fig = _figure_path(args.emit_plot)
        plots.render_fit(model, curves, fig)
        print(f"wrote plot data to {args.emit_plot} and figure to {fig}")
    return 0


def cmd_select(args) -> int:
    curves = data_io.read_curves(args.input)
    report = grid_select(
        curves,
        _parse_range(args.K_range, "K-range"),
        _parse_range(args.p_range, "p-range"),
        _em_config(args),
        threads=args.threads,
    )
    data_io.write_bic_report(report, args.output, args.tsv)
    if args.emit_plot:
        plots.render_bic(report, _figure_path(args.emit_plot))
    K, p = report.best
    print(f"best (K, p) = ({K}, {p}) over {len(report.grid)} cells"
          + (f"; {len(report.failures)} failed" if report.failures else ""))
    return 0


def cmd_classify(args) -> int:
    clf = data_io.read_model(args.model_in)
    if not hasattr(clf, "classes"):
        raise ValueError(f"{args.model_in} holds a single model, not a classifier")
    curves = data_io.read_curves(args.input)
    if curves.m != clf.grid.m or not np.allclose(curves.grid.t, clf.grid.t, rtol=1e-12, atol=0):
        raise ValueError("curves do not share the classifier's training grid")
    labels, post = predict_batch(clf, curves)
    data_io.write_predictions(args.output, labels, post, clf.labels)
    print(f"classified {curves.n} curves into {len(clf.classes)} classes -> {args.output}")
    return 0


def cmd_cv(args) -> int:
    curves = data_io.read_curves(args.input)
    labels = data_io.read_labels(args.labels)
    if labels.size != curves.n:
        raise ValueError(f"{labels.size} labels for {curves.n} curves")
    report = kfold_cv(
        curves, labels, args.folds, args.family, args.K, args.p,
        cfg=_em_config(args), seed=args.seed, min_segment_len=args.min_segment_len,
    )
    data_io.write_cv_report(report, args.output, args.tsv)
    if args.emit_plot:
        plots.render_cv(report, _figure_path(args.emit_plot))
    print(f"{args.folds}-fold CV error: {100 * report.mean_error:.3f}% "
          f"(std {100 * report.std_error:.3f}%)")
    return 0


def cmd_bench(args) -> int:
    ns = _parse_int_list(args.n_list, "n-list")
    ms = _parse_int_list(args.m_list, "m-list")
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    if not ns or not ms or not methods:
        raise UsageError("n-list, m-list and methods must be non-empty")
    cells = [(n, m) for n in ns for m in ms]
    report = runtime_bench(cells, methods=methods, K=args.K, p=args.p,
                           repetitions=args.repetitions, seed=args.seed)
    data_io.write_bench_report(report, args.output, args.tsv)
    if args.emit_plot:
        plots.render_bench(report, _figure_path(args.emit_plot))
    for row in report.rows:
        print(f"{row.method:10s} n={row.n:<4d} m={row.m:<5d} {row.seconds:.4f}s")
    return 0


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("REGIMECURVE_LOG", "WARNING").upper())
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _validate(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else int(exc.code)
    try:
        return args.run(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
