"""File formats: curves CSV, labels CSV, model JSON, plot-data TSV, reports.

Curves CSV: line 1 holds the m comma-separated time stamps; each further
line is one curve of m values.  Labels CSV: one integer per line, aligned
with the curve rows.  All numbers are written with the shortest
round-tripping decimal form, so read(write(x)) is bit-exact and
locale-independent.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .classify import ClassModel, Classifier
from .core import CurveSet, PiecewiseModel, PolyRegime, RhlpModel, TimeGrid
from .piecewise import piecewise_approximation, segment_labels
from .rhlp import logistic_proportions, rhlp_approximation


class DataFormatError(ValueError):
    """Malformed input file; the message carries the offending location."""


def _fmt(v: float) -> str:
    return repr(float(v))


def _parse_number(cell: str, row: int, col: int) -> float:
    try:
        return float(cell)
    except ValueError:
        raise DataFormatError(
            f"row {row}, column {col}: could not parse {cell.strip()!r} as a number"
        ) from None


def read_curves(path) -> CurveSet:
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines:
        raise DataFormatError(f"{path}: empty file")
    header = lines[0].split(",")
    t = np.array([_parse_number(c, 1, j + 1) for j, c in enumerate(header)])
    if t.size > 1 and not np.all(np.diff(t) > 0):
        bad = int(np.flatnonzero(np.diff(t) <= 0)[0]) + 2
        raise DataFormatError(f"row 1, column {bad}: time stamps must be strictly increasing")
    if len(lines) == 1:
        raise DataFormatError(f"{path}: no curves (header only)")
    values = []
    for r, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != t.size:
            raise DataFormatError(f"row {r}: expected {t.size} values, got {len(cells)}")
        values.append([_parse_number(c, r, j + 1) for j, c in enumerate(cells)])
    try:
        return CurveSet(TimeGrid(t), np.array(values))
    except ValueError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc


def write_curves(path, curves: CurveSet) -> None:
    lines = [",".join(_fmt(v) for v in curves.grid.t)]
    for row in curves.values:
        lines.append(",".join(_fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_labels(path) -> np.ndarray:
    out = []
    for r, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            out.append(int(line.strip()))
        except ValueError:
            raise DataFormatError(f"row {r}: could not parse {line.strip()!r} as an integer label") from None
    if not out:
        raise DataFormatError(f"{path}: no labels")
    return np.array(out, dtype=int)


def write_labels(path, labels) -> None:
    Path(path).write_text("\n".join(str(int(v)) for v in np.asarray(labels)) + "\n")


def write_vector(path, values) -> None:
    Path(path).write_text("\n".join(_fmt(v) for v in np.asarray(values, float)) + "\n")


def model_to_dict(model) -> dict:
    if isinstance(model, Classifier):
        return {
            "family": "classifier",
            "classes": [
                {"label": c.label, "prior": c.prior, "model": model_to_dict(c.model)}
                for c in model.classes
            ],
        }
    common = {
        "K": model.K,
        "p": model.p,
        "t": [float(v) for v in model.grid.t],
        "beta": [[float(v) for v in r.beta] for r in model.regimes],
        "sigma2": [float(r.sigma2) for r in model.regimes],
        "loglik": None if model.loglik is None else float(model.loglik),
    }
    if isinstance(model, PiecewiseModel):
        return {"family": "piecewise", "gamma": [int(g) for g in model.gamma], **common}
    if isinstance(model, RhlpModel):
        return {"family": "rhlp", "w": [[float(v) for v in row] for row in model.gate], **common}
    raise TypeError(f"cannot serialize {type(model).__name__}")


def _need(obj: dict, key: str, where: str):
    if key not in obj:
        raise DataFormatError(f"{where}.{key}: missing")
    return obj[key]


def model_from_dict(obj: dict, where: str = "model"):
    family = _need(obj, "family", where)
    if family == "classifier":
        classes = []
        for i, entry in enumerate(_need(obj, "classes", where)):
            sub = f"{where}.classes[{i}]"
            inner = model_from_dict(_need(entry, "model", sub), sub + ".model")
            classes.append(ClassModel(
                label=int(_need(entry, "label", sub)),
                prior=float(_need(entry, "prior", sub)),
                model=inner,
            ))
        if not classes:
            raise DataFormatError(f"{where}.classes: empty")
        inner_family = "piecewise" if isinstance(classes[0].model, PiecewiseModel) else "rhlp"
        try:
            return Classifier(classes=tuple(classes), family=inner_family)
        except ValueError as exc:
            raise DataFormatError(f"{where}: {exc}") from exc
    if family not in ("piecewise", "rhlp"):
        raise DataFormatError(f"{where}.family: unknown value {family!r}")
    try:
        K = int(_need(obj, "K", where))
        p = int(_need(obj, "p", where))
        grid = TimeGrid(np.array(_need(obj, "t", where), dtype=float))
        betas = _need(obj, "beta", where)
        sigma2 = _need(obj, "sigma2", where)
        if len(betas) != K or len(sigma2) != K:
            raise DataFormatError(f"{where}: need K={K} beta rows and sigma2 entries")
        regimes = tuple(
            PolyRegime(beta=np.array(b, dtype=float), sigma2=float(s))
            for b, s in zip(betas, sigma2)
        )
        loglik = obj.get("loglik")
        loglik = None if loglik is None else float(loglik)
        if family == "piecewise":
            return PiecewiseModel(
                gamma=np.array(_need(obj, "gamma", where), dtype=int),
                regimes=regimes, p=p, K=K, grid=grid, loglik=loglik,
            )
        return RhlpModel(
            gate=np.array(_need(obj, "w", where), dtype=float),
            regimes=regimes, p=p, K=K, grid=grid, loglik=loglik,
        )
    except DataFormatError:
        raise
    except (TypeError, ValueError) as exc:
        raise DataFormatError(f"{where}: {exc}") from exc


def write_model(path, model) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=2) + "\n")


def read_model(path):
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(obj, dict):
        raise DataFormatError(f"{path}: model file must hold a JSON object")
    return model_from_dict(obj)


def emit_plot_data(model, curves: CurveSet, path) -> None:
    """Plot-ready TSV: time, curve mean, fitted curve, then the per-regime
    gate proportions (soft model) or the hard segment label."""
    if curves.m != model.grid.m:
        raise ValueError("model and curves have different grid lengths")
    t = curves.grid.t
    mean = curves.values.mean(axis=0)
    if isinstance(model, RhlpModel):
        fit = rhlp_approximation(model)
        pi = logistic_proportions(model.gate, model.grid)
        header = ["t", "mean", "fit"] + [f"pi_{k + 1}" for k in range(model.K)]
        cols = [t, mean, fit] + [pi[:, k] for k in range(model.K)]
    elif isinstance(model, PiecewiseModel):
        fit = piecewise_approximation(model)
        header = ["t", "mean", "fit", "segment"]
        cols = [t, mean, fit, segment_labels(model)]
    else:
        raise TypeError(f"cannot emit plot data for {type(model).__name__}")
    lines = ["\t".join(header)]
    for j in range(curves.m):
        cells = []
        for c in cols:
            v = c[j]
            cells.append(str(int(v)) if isinstance(v, (int, np.integer)) else _fmt(v))
        lines.append("\t".join(cells))
    Path(path).write_text("\n".join(lines) + "\n")


def _write_tsv(path, header, rows) -> None:
    lines = ["\t".join(header)]
    for row in rows:
        lines.append("\t".join(
            str(v) if isinstance(v, (int, np.integer, str)) else _fmt(v) for v in row
        ))
    Path(path).write_text("\n".join(lines) + "\n")


def write_bic_report(report, json_path=None, tsv_path=None) -> None:
    if json_path is not None:
        payload = {
            "grid": [
                {"K": c.K, "p": c.p, "loglik": c.loglik, "nu": c.nu, "bic": c.bic}
                for c in report.grid
            ],
            "best": {"K": report.best[0], "p": report.best[1]},
            "failures": [{"K": K, "p": p, "error": msg} for K, p, msg in report.failures],
        }
        Path(json_path).write_text(json.dumps(payload, indent=2) + "\n")
    if tsv_path is not None:
        _write_tsv(
            tsv_path, ["K", "p", "loglik", "nu", "bic"],
            [(c.K, c.p, c.loglik, c.nu, c.bic) for c in report.grid],
        )


def write_cv_report(report, json_path=None, tsv_path=None) -> None:
    if json_path is not None:
        payload = {
            "folds": list(report.folds),
            "mean_error": report.mean_error,
            "std_error": report.std_error,
            "k": report.k,
            "seed": report.seed,
        }
        Path(json_path).write_text(json.dumps(payload, indent=2) + "\n")
    if tsv_path is not None:
        _write_tsv(
            tsv_path, ["fold", "error"],
            [(i + 1, e) for i, e in enumerate(report.folds)],
        )


def write_bench_report(report, json_path=None, tsv_path=None) -> None:
    if json_path is not None:
        payload = {
            "rows": [
                {"method": r.method, "n": r.n, "m": r.m, "K": r.K, "p": r.p,
                 "seconds": r.seconds, "repetitions": r.repetitions}
                for r in report.rows
            ]
        }
        Path(json_path).write_text(json.dumps(payload, indent=2) + "\n")
    if tsv_path is not None:
        _write_tsv(
            tsv_path, ["method", "n", "m", "K", "p", "seconds", "repetitions"],
            [(r.method, r.n, r.m, r.K, r.p, r.seconds, r.repetitions) for r in report.rows],
        )


def write_predictions(path, labels, posteriors, class_labels) -> None:
    header = ["label"] + [f"p_{int(g)}" for g in class_labels]
    rows = [
        [str(int(lab))] + [_fmt(v) for v in post]
        for lab, post in zip(labels, posteriors)
    ]
    lines = [",".join(header)] + [",".join(r) for r in rows]
    Path(path).write_text("\n".join(lines) + "\n")
