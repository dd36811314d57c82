"""Command-line interface: experiment runner, figure recipes, fixtures.

Subcommands
-----------
fc              1D fidelity correlator (exact closed form)
fc2d            2D fidelity correlator (factorized reduction and brute route)
negativity      1D negativity: exact enumeration or Monte Carlo
spurious-ten    spurious topological contribution value(2N) - 2 value(N)
toric-boundary  boundary-decohered surface-code negativity (mixed rates)
mpdo            tensor-network reports: injectivity, symmetry, moments
reproduce       figure recipes (fig2, fig3) at desk or full scale
freeze-fixtures regenerate dense-oracle fixtures and diff against committed

Conventions shared by all subcommands: results go to stdout as CSV unless
--out is given; --format {csv,json} switches the record encoding; --svg
writes a deterministic line plot next to the data. Entropic values are
reported in nats with a companion column in units of log 2. Records are
sorted canonically before writing, so file content does not depend on
worker scheduling; the DECOCLUSTER_WORKERS environment variable overrides
the worker count. Exit codes: 0 success, 2 invalid configuration (the
message names the offending key), 3 numeric failure (the message names the
failing parameter point), 4 fixture mismatch (the report lists divergent
entries).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields, replace

try:
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - python < 3.11
    import tomli as tomllib

from . import __version__, dense, fidelity, mpdo, negativity, statmech

LOG2 = math.log(2.0)

CSV_COLUMNS = [
    "experiment", "noise", "n", "two_n", "p", "sep", "alpha",
    "p_x", "p_z", "w", "h", "width", "height", "mode",
    "value", "value_log2", "std_err", "std_err_log2",
    "n_samples", "seed", "version",
]

ENTROPIC = {"negativity", "spurious-ten", "toric-boundary", "mpdo-renyi",
            "mpdo-spurious", "fig3"}


class CliError(Exception):
    """Carries the exit code and a machine-readable error payload."""

    def __init__(self, code: int, kind: str, detail: str, **extra):
        super().__init__(detail)
        self.code = code
        self.payload = {"error": {"code": code, "kind": kind,
                                  "detail": detail, **extra}}


def _config_error(detail: str, **extra) -> CliError:
    return CliError(2, "invalid-config", detail, **extra)


def _numeric_error(detail: str, point: dict) -> CliError:
    return CliError(3, "numeric-failure", detail, point=point)


# ---------------------------------------------------------------------------
# Result records
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ResultRecord:
    """One parameter point of one experiment, with provenance."""

    experiment: str
    params: dict
    value: float
    std_err: float | None = None
    n_samples: int | None = None
    seed: int | None = None
    version: str = __version__

    @property
    def entropic(self) -> bool:
        return self.experiment in ENTROPIC

    def sort_key(self):
        keys = ("noise", "n", "two_n", "p", "sep", "alpha", "p_x", "p_z",
                "w", "h", "width", "height", "mode")
        vals = []
        for k in keys:
            v = self.params.get(k)
            if v is None:
                vals.append((1, "", 0.0))
            elif isinstance(v, str):
                vals.append((0, v, 0.0))
            else:
                vals.append((0, "", float(v)))
        return (self.experiment, *vals)

    def to_row(self) -> dict:
        row = {c: "" for c in CSV_COLUMNS}
        row["experiment"] = self.experiment
        for k, v in self.params.items():
            if k in row and v is not None:
                row[k] = v
        row["value"] = _fmt_float(self.value)
        if self.entropic and math.isfinite(self.value):
            row["value_log2"] = _fmt_float(self.value / LOG2)
        if self.std_err is not None:
            row["std_err"] = _fmt_float(self.std_err)
            if self.entropic:
                row["std_err_log2"] = _fmt_float(self.std_err / LOG2)
        if self.n_samples is not None:
            row["n_samples"] = self.n_samples
        if self.seed is not None:
            row["seed"] = self.seed
        row["version"] = self.version
        return row

    def to_json_obj(self) -> dict:
        obj = {"experiment": self.experiment,
               **{k: v for k, v in self.params.items() if v is not None},
               "value": self.value}
        if self.entropic and math.isfinite(self.value):
            obj["value_log2"] = self.value / LOG2
        if self.std_err is not None:
            obj["std_err"] = self.std_err
        if self.n_samples is not None:
            obj["n_samples"] = self.n_samples
        if self.seed is not None:
            obj["seed"] = self.seed
        obj["version"] = self.version
        return obj


def _fmt_float(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_records(records: list[ResultRecord], out, fmt: str) -> str:
    records = sorted(records, key=lambda r: r.sort_key())
    if fmt == "json":
        text = json.dumps([r.to_json_obj() for r in records], indent=2) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for r in records:
            writer.writerow(r.to_row())
        text = buf.getvalue()
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return text


# ---------------------------------------------------------------------------
# Deterministic SVG line plots
# ---------------------------------------------------------------------------

_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
            "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f"]


def svg_line_plot(series, path, xlabel="", ylabel="", title=""):
    """Write a minimal, fully deterministic SVG line plot.

    series: list of (label, xs, ys). The output is a pure function of the
    inputs - no timestamps, ids, or library-version artifacts - so repeated
    runs are bit-identical.
    """
    width, height = 720, 480
    ml, mr, mt, mb = 70, 160, 40, 55
    xs_all = [x for _, xs, _ in series for x in xs]
    ys_all = [y for _, _, ys in series for y in ys if math.isfinite(y)]
    if not xs_all or not ys_all:
        raise ValueError("nothing to plot")
    x0, x1 = min(xs_all), max(xs_all)
    y0, y1 = min(ys_all), max(ys_all)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad

    def sx(x):
        return ml + (x - x0) / (x1 - x0) * (width - ml - mr)

    def sy(y):
        return height - mb - (y - y0) / (y1 - y0) * (height - mt - mb)

    def f(v):
        return f"{v:.6g}"

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{ml}" y="{mt}" width="{width-ml-mr}" '
        f'height="{height-mt-mb}" fill="none" stroke="black"/>',
    ]
    for i in range(5):
        xv = x0 + i * (x1 - x0) / 4
        yv = y0 + i * (y1 - y0) / 4
        parts.append(f'<text x="{f(sx(xv))}" y="{height-mb+18}" '
                     f'font-size="12" text-anchor="middle">{f(xv)}</text>')
        parts.append(f'<text x="{ml-8}" y="{f(sy(yv)+4)}" font-size="12" '
                     f'text-anchor="end">{f(yv)}</text>')
        parts.append(f'<line x1="{ml}" y1="{f(sy(yv))}" x2="{width-mr}" '
                     f'y2="{f(sy(yv))}" stroke="#dddddd"/>')
    for idx, (label, xs, ys) in enumerate(series):
        color = _PALETTE[idx % len(_PALETTE)]
        pts = " ".join(f"{f(sx(x))},{f(sy(y))}" for x, y in zip(xs, ys)
                       if math.isfinite(y))
        parts.append(f'<polyline points="{pts}" fill="none" '
                     f'stroke="{color}" stroke-width="1.5"/>')
        ly = mt + 16 + 16 * idx
        parts.append(f'<line x1="{width-mr+10}" y1="{ly-4}" '
                     f'x2="{width-mr+30}" y2="{ly-4}" stroke="{color}" '
                     f'stroke-width="1.5"/>')
        parts.append(f'<text x="{width-mr+35}" y="{ly}" '
                     f'font-size="12">{label}</text>')
    if title:
        parts.append(f'<text x="{width//2}" y="{mt-14}" font-size="14" '
                     f'text-anchor="middle">{title}</text>')
    if xlabel:
        parts.append(f'<text x="{(ml+width-mr)//2}" y="{height-12}" '
                     f'font-size="13" text-anchor="middle">{xlabel}</text>')
    if ylabel:
        parts.append(f'<text x="16" y="{(mt+height-mb)//2}" font-size="13" '
                     f'text-anchor="middle" transform="rotate(-90 16 '
                     f'{(mt+height-mb)//2})">{ylabel}</text>')
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")


# ---------------------------------------------------------------------------
# Experiment configuration (strict TOML)
# ---------------------------------------------------------------------------

_CONFIG_FIELDS = {
    "fc": {"noise", "n", "p", "sep"},
    "fc2d": {"w", "h", "p", "beta", "width", "height", "mode"},
    "negativity": {"noise", "two_n", "p", "exact", "samples", "seed",
                   "batches"},
    "spurious-ten": {"noise", "n", "p", "samples", "seed", "batches"},
    "toric-boundary": {"two_n", "p_x", "p_z", "exact", "samples", "seed",
                       "batches"},
    "mpdo": {"noise", "p", "alpha", "two_n", "report"},
}
_COMMON_FIELDS = {"kind", "out", "svg", "format"}


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment description; round-trips losslessly via TOML."""

    kind: str
    noise: str = "X"
    n: tuple = ()
    two_n: tuple = ()
    p: tuple = ()
    sep: tuple = ()
    alpha: tuple = ()
    w: tuple = ()
    h: tuple = ()
    beta: tuple = ()
    width: int | None = None
    height: int | None = None
    mode: str = "factorized"
    report: str = "all"
    p_x: float | None = None
    p_z: float | None = None
    exact: bool = False
    samples: int = 1_000_000
    seed: int = 0
    batches: int = 64
    out: str | None = None
    svg: str | None = None
    format: str = "csv"


_LIST_FIELDS = {"n", "two_n", "p", "sep", "alpha", "w", "h", "beta"}


def config_from_dict(data: dict, source: str = "config") -> ExperimentConfig:
    if "kind" not in data:
        raise _config_error(f"{source}: missing required key 'kind'",
                            key="kind")
    kind = data["kind"]
    if kind not in _CONFIG_FIELDS:
        raise _config_error(
            f"{source}: unknown experiment kind {kind!r}", key="kind")
    allowed = _CONFIG_FIELDS[kind] | _COMMON_FIELDS
    known = {f.name for f in fields(ExperimentConfig)}
    for key in data:
        if key not in allowed:
            hint = " (unknown key)" if key not in known else \
                f" (not valid for kind {kind!r})"
            raise _config_error(f"{source}: key {key!r}{hint}", key=key)
    kwargs = {}
    for key, value in data.items():
        if key in _LIST_FIELDS:
            if not isinstance(value, list):
                value = [value]
            kwargs[key] = tuple(value)
        else:
            kwargs[key] = value
    try:
        cfg = ExperimentConfig(**kwargs)
    except TypeError as exc:
        raise _config_error(f"{source}: {exc}") from exc
    _validate_config(cfg, source)
    return cfg


def _validate_config(cfg: ExperimentConfig, source: str) -> None:
    def need(name):
        if not getattr(cfg, name):
            raise _config_error(f"{source}: missing required key {name!r} "
                                f"for kind {cfg.kind!r}", key=name)

    if cfg.noise not in ("X", "Z"):
        raise _config_error(f"{source}: noise must be 'X' or 'Z', got "
                            f"{cfg.noise!r}", key="noise")
    if cfg.format not in ("csv", "json"):
        raise _config_error(f"{source}: format must be 'csv' or 'json'",
                            key="format")
    for rate in cfg.p:
        if not 0.0 <= rate <= 0.5:
            raise _config_error(f"{source}: p={rate} outside [0, 1/2]",
                                key="p")
    if cfg.kind == "fc":
        need("n"), need("p"), need("sep")
    elif cfg.kind == "fc2d":
        need("w"), need("h")
        if not cfg.p and not cfg.beta:
            raise _config_error(f"{source}: fc2d needs 'p' or 'beta'",
                                key="p")
        if cfg.width is None:
            raise _config_error(f"{source}: missing required key 'width'",
                                key="width")
        if cfg.mode not in ("factorized", "brute", "both"):
            raise _config_error(f"{source}: mode must be factorized, brute "
                                f"or both", key="mode")
    elif cfg.kind == "negativity":
        need("two_n"), need("p")
    elif cfg.kind == "spurious-ten":
        need("n"), need("p")
    elif cfg.kind == "toric-boundary":
        need("two_n")
        if cfg.p_x is None or cfg.p_z is None:
            raise _config_error(f"{source}: toric-boundary needs 'p_x' and "
                                f"'p_z'", key="p_x")
    elif cfg.kind == "mpdo":
        need("p"), need("alpha")
        if cfg.report not in ("injectivity", "symmetry", "spurious",
                              "renyi", "all"):
            raise _config_error(f"{source}: unknown report {cfg.report!r}",
                                key="report")


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise _config_error(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as exc:
        raise _config_error(f"{path}: TOML parse error: {exc}")
    return config_from_dict(data, source=path)


def _toml_scalar(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, float)):
        return repr(v)
    return json.dumps(v)


def dumps_config(cfg: ExperimentConfig) -> str:
    """Emit the config as TOML; parsing the output reproduces the config."""
    lines = []
    defaults = ExperimentConfig(kind=cfg.kind)
    for f in fields(ExperimentConfig):
        v = getattr(cfg, f.name)
        if f.name != "kind" and v == getattr(defaults, f.name):
            continue
        if v is None:
            continue
        if f.name in _LIST_FIELDS:
            lines.append(f"{f.name} = [{', '.join(_toml_scalar(x) for x in v)}]")
        else:
            lines.append(f"{f.name} = {_toml_scalar(v)}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Experiment execution
# ---------------------------------------------------------------------------


def _pool_map(fn, points):
    workers = int(os.environ.get("DECOCLUSTER_WORKERS", "1"))
    if workers > 1 and len(points) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, points))
    return [fn(pt) for pt in points]


def _mc_config(cfg: ExperimentConfig, inner_workers=None) -> negativity.McConfig:
    return negativity.McConfig(n_samples=cfg.samples, seed=cfg.seed,
                               n_batches=cfg.batches, workers=inner_workers)


def _wrap_numeric(point: dict, fn):
    try:
        return fn()
    except CliError:
        raise
    except (ValueError, FloatingPointError, OverflowError) as exc:
        raise _numeric_error(str(exc), point)


def run_experiment(cfg: ExperimentConfig) -> list[ResultRecord]:
    if cfg.kind == "fc":
        points = [(n, p, sep) for n in cfg.n for p in cfg.p
                  for sep in cfg.sep if sep <= n]

        def do_fc(pt):
            n, p, sep = pt
            point = {"experiment": "fc", "n": n, "p": p, "sep": sep}
            res = _wrap_numeric(point, lambda: fidelity.fc_1d_exact(n, p, sep))
            return ResultRecord("fc", {"noise": cfg.noise, "n": n,
                                       "two_n": 2 * n, "p": p, "sep": sep},
                                res.value)
        return _pool_map(do_fc, points)

    if cfg.kind == "fc2d":
        rates = list(cfg.p) + [statmech.p_from_beta(b) for b in cfg.beta]
        modes = ["factorized", "brute"] if cfg.mode == "both" else [cfg.mode]
        points = [(w, h, p, mode) for w in cfg.w for h in cfg.h
                  for p in rates for mode in modes]

        def do_fc2d(pt):
            w, h, p, mode = pt
            point = {"experiment": "fc2d", "w": w, "h": h, "p": p,
                     "mode": mode}
            res = _wrap_numeric(point, lambda: fidelity.fc_2d(
                w, h, p, mode=mode, width=cfg.width, height=cfg.height))
            return ResultRecord("fc2d", {"w": w, "h": h, "p": p,
                                         "width": cfg.width,
                                         "height": cfg.height, "mode": mode},
                                res.value)
        return _pool_map(do_fc2d, points)

    if cfg.kind == "negativity":
        points = [(two_n, p) for two_n in cfg.two_n for p in cfg.p]

        def do_neg(pt):
            two_n, p = pt
            point = {"experiment": "negativity", "two_n": two_n, "p": p,
                     "noise": cfg.noise}
            if cfg.exact:
                val = _wrap_numeric(point, lambda: negativity.
                                    trace_norm_exact_enum(two_n, p, cfg.noise))
                return ResultRecord("negativity",
                                    {"noise": cfg.noise, "two_n": two_n,
                                     "p": p, "mode": "exact"}, val)
            est = _wrap_numeric(point, lambda: negativity.trace_norm_mc(
                two_n, p, cfg.noise, _mc_config(cfg, inner_workers=1)))
            return ResultRecord("negativity",
                                {"noise": cfg.noise, "two_n": two_n, "p": p,
                                 "mode": "mc"},
                                est.log_value, est.std_err, est.n_samples,
                                est.seed)
        return _pool_map(do_neg, points)

    if cfg.kind == "spurious-ten":
        points = [(n, p) for n in cfg.n for p in cfg.p]

        def do_sp(pt):
            n, p = pt
            point = {"experiment": "spurious-ten", "n": n, "p": p,
                     "noise": cfg.noise}
            est = _wrap_numeric(point, lambda: negativity.spurious_ten(
                n, p, cfg.noise, _mc_config(cfg, inner_workers=1)))
            return ResultRecord("spurious-ten",
                                {"noise": cfg.noise, "n": n, "p": p},
                                est.log_value, est.std_err or None,
                                est.n_samples or None, est.seed)
        return _pool_map(do_sp, points)

    if cfg.kind == "toric-boundary":
        rates = negativity.BoundaryRates(cfg.p_x, cfg.p_z)
        points = list(cfg.two_n)

        def do_toric(two_n):
            point = {"experiment": "toric-boundary", "two_n": two_n,
                     "p_x": cfg.p_x, "p_z": cfg.p_z}
            if cfg.exact:
                val = _wrap_numeric(point, lambda: negativity.
                                    toric_boundary_negativity(two_n, rates,
                                                              exact=True))
                return ResultRecord("toric-boundary",
                                    {"two_n": two_n, "p_x": cfg.p_x,
                                     "p_z": cfg.p_z, "mode": "exact"}, val)
            est = _wrap_numeric(point, lambda: negativity.
                                toric_boundary_negativity(
                                    two_n, rates,
                                    _mc_config(cfg, inner_workers=1)))
            return ResultRecord("toric-boundary",
                                {"two_n": two_n, "p_x": cfg.p_x,
                                 "p_z": cfg.p_z, "mode": "mc"},
                                est.log_value, est.std_err, est.n_samples,
                                est.seed)
        return _pool_map(do_toric, points)

    if cfg.kind == "mpdo":
        records = []
        for p in cfg.p:
            point = {"experiment": "mpdo", "p": p, "noise": cfg.noise}
            m = _wrap_numeric(point,
                              lambda: mpdo.cluster_mpdo(p, cfg.noise))
            for alpha in cfg.alpha:
                pt = dict(point, alpha=alpha)
                if cfg.report in ("spurious", "all"):
                    res = _wrap_numeric(pt, lambda: mpdo.spurious_ten_renyi(
                        m, alpha))
                    records.append(ResultRecord(
                        "mpdo-spurious",
                        {"noise": cfg.noise, "p": p, "alpha": alpha},
                        res.value))
                if cfg.report in ("renyi", "all"):
                    for two_n in cfg.two_n:
                        val = _wrap_numeric(
                            dict(pt, two_n=two_n),
                            lambda: mpdo.renyi_negativity_tm(m, alpha, two_n))
                        records.append(ResultRecord(
                            "mpdo-renyi",
                            {"noise": cfg.noise, "p": p, "alpha": alpha,
                             "two_n": two_n}, val))
        return records

    raise _config_error(f"unhandled experiment kind {cfg.kind!r}",
                        key="kind")


def mpdo_json_report(cfg: ExperimentConfig) -> dict:
    """Full JSON report of the tensor-network checks for one rate."""
    if len(cfg.p) != 1:
        raise _config_error("mpdo json report takes exactly one p", key="p")
    p = cfg.p[0]
    alpha_max = max(cfg.alpha)
    m = mpdo.cluster_mpdo(p, cfg.noise)
    out = {"experiment": "mpdo", "noise": cfg.noise, "p": p,
           "alpha_max": alpha_max, "version": __version__}
    if cfg.report in ("injectivity", "all"):
        rep = mpdo.injectivity_report(m, alpha_max=alpha_max)
        out["injectivity"] = {
            "c1": rep.c1, "c1_prime": rep.c1_prime, "c2": rep.c2,
            "strongly_injective": rep.strongly_injective,
            "transfer_gap": rep.transfer_gap,
            "levels": [
                {"alpha": lv.alpha, "virtual_dim": lv.virtual_dim,
                 "map_rank": lv.map_rank, "blocked_cells": lv.blocked_cells,
                 "top_eigenvalue": [lv.top_eigenvalue.real,
                                    lv.top_eigenvalue.imag],
                 "spectral_gap": lv.spectral_gap, "pass": lv.injective}
                for lv in rep.levels],
        }
    if cfg.report in ("symmetry", "all"):
        rep = mpdo.symmetry_algebra_check(m)
        out["symmetry"] = {
            "symmetric": rep.symmetric,
            "omega": [rep.omega.real, rep.omega.imag],
            "omega_residual": rep.omega_residual,
            "cross_layer_commutator": rep.cross_layer_commutator,
            "replica_invariance": rep.replica_invariance,
            "tolerance": rep.tolerance,
            "actions": [
                {"generator": label, "layer": layer,
                 "theta": act.phase.real if isinstance(act.phase, complex)
                 else act.phase, "residual": act.residual}
                for (label, layer), act in sorted(rep.actions.items())],
        }
    if cfg.report in ("spurious", "all"):
        out["spurious"] = []
        for alpha in cfg.alpha:
            if alpha < 2:
                continue
            r = mpdo.spurious_ten_renyi(m, alpha)
            out["spurious"].append(
                {"alpha": alpha, "value": r.value,
                 "value_log2": r.value / LOG2 if math.isfinite(r.value)
                 else None,
                 "degeneracy": r.degeneracy, "spectral_gap": r.spectral_gap,
                 "conditions_ok": r.conditions_ok})
    if cfg.report in ("renyi", "all") and cfg.two_n:
        out["renyi"] = []
        for alpha in cfg.alpha:
            if alpha < 2:
                continue
            for two_n in cfg.two_n:
                val = mpdo.renyi_negativity_tm(m, alpha, two_n)
                out["renyi"].append({"alpha": alpha, "two_n": two_n,
                                     "value": val,
                                     "value_log2": val / LOG2})
    return out


# ---------------------------------------------------------------------------
# Figure recipes
# ---------------------------------------------------------------------------

FIG2_SIZES = tuple(2 ** k for k in range(1, 11))
FIG2_RATES = tuple(round(0.025 * k, 3) for k in range(0, 21))
FIG3_RATES = tuple(round(0.05 * k, 2) for k in range(1, 10))
FIG3_N_DESK = 16
FIG3_SAMPLES_DESK = 10_000_000
FIG3_SAMPLES_FULL = 800_000_000


def reproduce_fig2(out_dir: str, svg: bool) -> list[str]:
    records = []
    for n in FIG2_SIZES:
        sep = n if n % 2 == 0 else n - 1
        for p in FIG2_RATES:
            res = fidelity.fc_1d_exact(n, p, max(sep, 2))
            records.append(ResultRecord(
                "fig2", {"noise": "X", "n": n, "two_n": 2 * n, "p": p,
                         "sep": max(sep, 2)}, res.value))
    paths = []
    csv_path = os.path.join(out_dir, "fig2.csv")
    write_records(records, csv_path, "csv")
    paths.append(csv_path)
    if svg:
        series = []
        for n in FIG2_SIZES:
            pts = sorted((r.params["p"], r.value) for r in records
                         if r.params["n"] == n)
            series.append((f"N={n}", [x for x, _ in pts],
                           [y for _, y in pts]))
        svg_path = os.path.join(out_dir, "fig2.svg")
        svg_line_plot(series, svg_path, xlabel="p",
                      ylabel="fidelity correlator",
                      title="charged-pair fidelity vs rate")
        paths.append(svg_path)
    return paths


def reproduce_fig3(out_dir: str, svg: bool, scale: str, seed: int,
                   samples: int | None, n_half: int | None) -> list[str]:
    n = n_half or FIG3_N_DESK
    if scale == "desk":
        n_samp = samples or FIG3_SAMPLES_DESK
        if n > 32:
            raise _config_error("desk scale caps n at 32", key="n")
        if n_samp > FIG3_SAMPLES_DESK:
            raise _config_error("desk scale caps samples at 1e7",
                                key="samples")
    else:
        n_samp = samples or FIG3_SAMPLES_FULL
    records = []
    points = [(kind, p) for kind in ("X", "Z") for p in FIG3_RATES]

    def do_point(pt):
        kind, p = pt
        cfg = negativity.McConfig(n_samples=n_samp, seed=seed, workers=1)
        est = negativity.spurious_ten(n, p, kind, cfg)
        return ResultRecord("fig3", {"noise": kind, "n": n, "p": p},
                            est.log_value, est.std_err, est.n_samples,
                            est.seed)
    records = _pool_map(do_point, points)
    paths = []
    csv_path = os.path.join(out_dir, "fig3.csv")
    write_records(records, csv_path, "csv")
    paths.append(csv_path)
    if svg:
        series = []
        for kind in ("X", "Z"):
            pts = sorted((r.params["p"], r.value / LOG2) for r in records
                         if r.params["noise"] == kind)
            series.append((f"{kind} noise", [x for x, _ in pts],
                           [y for _, y in pts]))
        svg_path = os.path.join(out_dir, "fig3.svg")
        svg_line_plot(series, svg_path, xlabel="p",
                      ylabel="spurious contribution / log 2",
                      title=f"spurious topological negativity, N={n}")
        paths.append(svg_path)
    return paths


# ---------------------------------------------------------------------------
# Fixture corpus
# ---------------------------------------------------------------------------

FIXTURE_DIGITS = 12
FIXTURE_TOL = 1e-10


def _round_sig(v: float) -> float:
    return float(f"{v:.{FIXTURE_DIGITS}g}")


def compute_fixture_entries() -> dict:
    """Recompute every dense-oracle fixture value (unrounded), keyed
    canonically. Rounding to FIXTURE_DIGITS happens only when writing, so a
    check against a stored file can surface storage-precision limits."""
    entries = {}
    rates = (0.0, 0.1, 0.25, 0.4, 0.5)
    for two_n in (4, 6, 8):
        n = two_n // 2
        rho = {p: dense.decohered_cluster_1d(two_n, p, "X") for p in rates}
        for p in rates:
            for sep in (2, 4):
                if sep > n:
                    continue
                val = dense.fidelity_correlator_dense(rho[p], 0, sep)
                entries[f"fc/noise=X/two_n={two_n}/p={p}/sep={sep}"] = val
    for two_n in (4, 6, 8, 10):
        region = list(range(0, two_n, 2))
        for kind in ("X", "Z"):
            for p in rates:
                rho = dense.decohered_cluster_1d(two_n, p, kind)
                val = dense.negativity_dense(rho, region)
                entries[f"negativity/noise={kind}/two_n={two_n}/p={p}"] = val
    for alpha in (2, 3):
        for kind in ("X", "Z"):
            for p in (0.1, 0.2, 0.4):
                rho = dense.decohered_cluster_1d(8, p, kind)
                val = dense.renyi_negativity_dense(rho, [0, 2, 4, 6], alpha)
                entries[f"renyi/noise={kind}/two_n=8/alpha={alpha}/p={p}"] = val
    for p_x, p_z in ((0.1, 0.3), (0.25, 0.25), (0.05, 0.45)):
        rho = dense.decohered_cluster_1d(8, (p_x, p_z), "mixed")
        val = dense.negativity_dense(rho, [0, 2, 4, 6])
        entries[f"toric/two_n=8/p_x={p_x}/p_z={p_z}"] = val
    return entries


def freeze_fixtures(path: str, write: bool, tol: float) -> tuple[int, dict]:
    """Recompute fixtures; compare against the file (or write it).

    Returns (exit_code, report)."""
    fresh = compute_fixture_entries()
    if write:
        payload = {"_meta": {"generator": "decocluster freeze-fixtures",
                             "version": __version__,
                             "digits": FIXTURE_DIGITS,
                             "tolerance": FIXTURE_TOL},
                   "entries": {k: _round_sig(v) for k, v in fresh.items()}}
        os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=1, sort_keys=True)
            fh.write("\n")
        return 0, {"written": path, "count": len(fresh)}
    try:
        with open(path) as fh:
            stored = json.load(fh)
    except FileNotFoundError:
        raise CliError(4, "fixture-mismatch",
                       f"fixture file not found: {path}",
                       entries=[{"key": path, "reason": "missing file"}])
    except json.JSONDecodeError as exc:
        raise CliError(4, "fixture-mismatch",
                       f"fixture file unreadable: {path}: {exc}",
                       entries=[{"key": path, "reason": "corrupt file"}])
    old = stored.get("entries")
    if not isinstance(old, dict):
        raise CliError(4, "fixture-mismatch",
                       f"fixture file has no 'entries' table: {path}",
                       entries=[{"key": "entries", "reason": "missing"}])
    divergent = []
    for key in sorted(set(fresh) | set(old)):
        if key not in old:
            divergent.append({"key": key, "reason": "missing from file"})
            continue
        if key not in fresh:
            divergent.append({"key": key, "reason": "unknown entry"})
            continue
        a, b = float(old[key]), fresh[key]
        scale = max(abs(a), abs(b), 1.0)
        if not math.isfinite(a) or abs(a - b) > tol * scale:
            divergent.append({"key": key, "stored": a, "recomputed": b,
                              "abs_diff": abs(a - b)})
    report = {"checked": len(fresh), "divergent": divergent, "tol": tol}
    if divergent:
        raise CliError(4, "fixture-mismatch",
                       f"{len(divergent)} fixture entries diverge beyond "
                       f"{tol:g}", entries=divergent)
    return 0, report


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def _add_common(sp, mc=False):
    sp.add_argument("--config", help="TOML experiment config (overrides "
                                     "point flags)")
    sp.add_argument("--out", help="output file (default: stdout)")
    sp.add_argument("--format", choices=["csv", "json"], default=None)
    sp.add_argument("--svg", help="write a deterministic SVG plot here")
    if mc:
        sp.add_argument("--samples", type=int, default=None)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--batches", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="decocluster",
        description="diagnostics for decohered cluster states")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("fc", help="1D fidelity correlator (exact)")
    sp.add_argument("--n", type=int, nargs="+", default=None,
                    help="sites per sublattice (ring has 2n qubits)")
    sp.add_argument("--p", type=float, nargs="+", default=None)
    sp.add_argument("--sep", type=int, nargs="+", default=None)
    sp.add_argument("--noise", choices=["X", "Z"], default=None)
    _add_common(sp)

    sp = sub.add_parser("fc2d", help="2D fidelity correlator")
    sp.add_argument("--w", type=int, nargs="+", default=None)
    sp.add_argument("--h", type=int, nargs="+", default=None)
    sp.add_argument("--p", type=float, nargs="+", default=None)
    sp.add_argument("--beta", type=float, nargs="+", default=None)
    sp.add_argument("--width", type=int, default=None)
    sp.add_argument("--height", type=int, default=None)
    sp.add_argument("--mode", choices=["factorized", "brute", "both"],
                    default=None)
    _add_common(sp)

    sp = sub.add_parser("negativity", help="1D negativity (exact or MC)")
    sp.add_argument("--two-n", type=int, nargs="+", default=None,
                    dest="two_n")
    sp.add_argument("--p", type=float, nargs="+", default=None)
    sp.add_argument("--noise", choices=["X", "Z"], default=None)
    sp.add_argument("--exact", action="store_true", default=None)
    _add_common(sp, mc=True)

    sp = sub.add_parser("spurious-ten",
                        help="spurious contribution value(2N)-2*value(N)")
    sp.add_argument("--n", type=int, nargs="+", default=None,
                    help="half-chain N (compares rings of 2N and 4N qubits)")
    sp.add_argument("--p", type=float, nargs="+", default=None)
    sp.add_argument("--noise", choices=["X", "Z"], default=None)
    _add_common(sp, mc=True)

    sp = sub.add_parser("toric-boundary",
                        help="boundary-decohered surface-code negativity")
    sp.add_argument("--two-n", type=int, nargs="+", default=None,
                    dest="two_n")
    sp.add_argument("--px", type=float, default=None, dest="p_x")
    sp.add_argument("--pz", type=float, default=None, dest="p_z")
    sp.add_argument("--exact", action="store_true", default=None)
    _add_common(sp, mc=True)

    sp = sub.add_parser("mpdo", help="tensor-network reports")
    sp.add_argument("--p", type=float, nargs="+", default=None)
    sp.add_argument("--noise", choices=["X", "Z"], default=None)
    sp.add_argument("--alpha", type=int, nargs="+", default=None)
    sp.add_argument("--two-n", type=int, nargs="+", default=None,
                    dest="two_n")
    sp.add_argument("--report", choices=["injectivity", "symmetry",
                                         "spurious", "renyi", "all"],
                    default=None)
    _add_common(sp)

    sp = sub.add_parser("reproduce", help="figure recipes")
    sp.add_argument("figure", choices=["fig2", "fig3"])
    sp.add_argument("--scale", choices=["desk", "full"], default="desk")
    sp.add_argument("--yes-long", action="store_true",
                    help="acknowledge the full-scale runtime")
    sp.add_argument("--out-dir", default="out")
    sp.add_argument("--svg", action="store_true")
    sp.add_argument("--seed", type=int, default=2024)
    sp.add_argument("--samples", type=int, default=None)
    sp.add_argument("--n", type=int, default=None,
                    help="fig3 half-chain size override")

    sp = sub.add_parser("freeze-fixtures",
                        help="regenerate dense-oracle fixtures")
    sp.add_argument("--path", default="tests/fixtures/dense_oracle.json")
    sp.add_argument("--write", action="store_true",
                    help="write the fixture file instead of checking")
    sp.add_argument("--tol", type=float, default=FIXTURE_TOL)
    return ap


_FLAG_KEYS = ("noise", "n", "two_n", "p", "sep", "alpha", "w", "h", "beta",
              "width", "height", "mode", "report", "p_x", "p_z", "exact",
              "samples", "seed", "batches", "out", "svg", "format")


def _config_from_args(args) -> ExperimentConfig:
    if getattr(args, "config", None):
        cfg = load_config(args.config)
        if cfg.kind != args.command:
            raise _config_error(
                f"{args.config}: kind {cfg.kind!r} does not match "
                f"subcommand {args.command!r}", key="kind")
        overrides = {}
        for key in ("out", "svg", "format", "samples", "seed", "batches"):
            v = getattr(args, key, None)
            if v is not None:
                overrides[key] = v
        return replace(cfg, **overrides) if overrides else cfg
    data = {"kind": args.command}
    for key in _FLAG_KEYS:
        v = getattr(args, key, None)
        if v is None:
            continue
        if key in _LIST_FIELDS and not isinstance(v, list):
            v = [v]
        data[key] = v
    return config_from_dict(data, source="command line")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except CliError as exc:
        sys.stderr.write(json.dumps(exc.payload) + "\n")
        return exc.code


def _dispatch(args) -> int:
    if args.command == "reproduce":
        if args.scale == "full" and not args.yes_long:
            raise _config_error(
                "full scale runs 8e8 samples per point; pass --yes-long to "
                "acknowledge", key="scale")
        os.makedirs(args.out_dir, exist_ok=True)
        if args.figure == "fig2":
            paths = reproduce_fig2(args.out_dir, args.svg)
        else:
            paths = reproduce_fig3(args.out_dir, args.svg, args.scale,
                                   args.seed, args.samples, args.n)
        sys.stderr.write("wrote " + " ".join(paths) + "\n")
        return 0

    if args.command == "freeze-fixtures":
        code, report = freeze_fixtures(args.path, args.write, args.tol)
        sys.stderr.write(json.dumps(report) + "\n")
        return code

    cfg = _config_from_args(args)
    if cfg.kind == "mpdo" and cfg.format == "json" and len(cfg.p) == 1:
        report = mpdo_json_report(cfg)
        text = json.dumps(report, indent=2) + "\n"
        if cfg.out:
            with open(cfg.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return 0
    records = run_experiment(cfg)
    write_records(records, cfg.out, cfg.format)
    if cfg.svg:
        _svg_for_records(records, cfg)
    return 0


def _svg_for_records(records: list[ResultRecord], cfg: ExperimentConfig):
    """Group records into p-indexed series and plot them."""
    entropic = records and records[0].entropic
    scale = LOG2 if entropic else 1.0
    groups = {}
    for r in records:
        label_bits = []
        for k in ("noise", "n", "two_n", "sep", "alpha", "mode", "w", "h"):
            if r.params.get(k) is not None:
                label_bits.append(f"{k}={r.params[k]}")
        label = " ".join(label_bits) or r.experiment
        x = r.params.get("p")
        if x is None:
            x = r.params.get("two_n") or r.params.get("n") or 0
        groups.setdefault(label, []).append((x, r.value / scale))
    series = [(label, [x for x, _ in sorted(pts)],
               [y for _, y in sorted(pts)])
              for label, pts in sorted(groups.items())]
    ylabel = "value / log 2" if entropic else "value"
    svg_line_plot(series, cfg.svg, xlabel="p", ylabel=ylabel,
                  title=cfg.kind)


if __name__ == "__main__":
    sys.exit(main())
