"""Command-line front end.

Subcommands: ``fit`` (CSV in, per-knot table out, optional intervals and
band), ``band-constant`` (bridge supremum quantile), ``coverage`` (Monte
Carlo coverage study).  Output is CSV (full header, absent fields empty,
metadata as ``#`` footer lines) or a single JSON object with a metadata
block and a ``rows`` array; ``--plot`` additionally renders a figure.

Exit codes: 0 success, 1 usage or parse error, 2 numerical failure
(undefined band, divergence), 3 estimator equivalence failure under
``--method both``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, fields, replace

import numpy as np

from .core import Observation
from .em import em_fit
from .inference import (
    band_constant_se,
    ci_pointwise_log,
    confidence_band,
    default_band_interval,
)
from .product_limit import fit
from .simulation import DistSpec, SimConfig, coverage_experiment, example_config

__all__ = ["OutputRow", "main", "entry"]

COLUMNS = ("x", "estimate", "ci_lo", "ci_hi", "band_lo", "band_hi", "log_variance", "h_hat")

EQUIVALENCE_TOL = 1e-8

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_MISMATCH = 3


class CliError(Exception):
    """Usage or input-parsing problem; maps to exit code 1."""


@dataclass
class OutputRow:
    """One emitted knot; optional columns stay ``None`` unless requested."""

    x: float
    estimate: float
    ci_lo: float | None = None
    ci_hi: float | None = None
    band_lo: float | None = None
    band_hi: float | None = None
    log_variance: float | None = None
    h_hat: float | None = None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kmband", description="Survival curves, intervals and bands.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("fit", help="fit survival curve(s) from a time,event CSV")
    p.add_argument("input", help="CSV file with a 'time,event' header; event is 0 or 1")
    p.add_argument(
        "--method",
        choices=["product-limit", "em", "both"],
        default="product-limit",
        help="estimator; 'both' cross-checks them and fails on disagreement",
    )
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--ci", action="store_true", help="emit pointwise interval columns")
    p.add_argument(
        "--band",
        action="store_true",
        help="emit simultaneous band columns over the default interval",
    )
    p.add_argument("--band-from", type=float, default=None, help="band interval start")
    p.add_argument("--band-to", type=float, default=None, help="band interval end")
    p.add_argument(
        "--diagnostics",
        action="store_true",
        help="emit log-variance and H columns",
    )
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=10000)
    p.add_argument("--paths", type=int, default=200000)
    p.add_argument("--grid", type=int, default=2048)
    p.add_argument("--seed", type=int, default=0)
    _output_args(p)
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("band-constant", help="bridge supremum quantile over [a, b]")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--paths", type=int, default=200000)
    p.add_argument("--grid", type=int, default=2048)
    p.add_argument("--seed", type=int, default=0)
    _output_args(p, plot=False)
    p.set_defaults(func=_cmd_band_constant)

    p = sub.add_parser("coverage", help="Monte Carlo coverage study")
    p.add_argument("--example", type=int, choices=[1, 2], help="built-in configuration")
    p.add_argument("--config", help="JSON file with keys mirroring the study config")
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--alpha", type=float, default=None)
    _output_args(p)
    p.set_defaults(func=_cmd_coverage)
    return parser


def _output_args(p, plot=True):
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--output", default=None, help="write to this file instead of stdout")
    if plot:
        p.add_argument("--plot", default=None, help="also render a figure to this file")


def _read_observations(path: str) -> list[Observation]:
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from exc
    out = []
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise CliError("empty input: expected a 'time,event' header")
        names = [c.strip().lower() for c in header]
        if "time" not in names or "event" not in names:
            raise CliError("input must have 'time' and 'event' columns")
        ti, ei = names.index("time"), names.index("event")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) <= max(ti, ei):
                raise CliError(f"line {lineno}: expected at least {max(ti, ei) + 1} fields")
            t_raw, e_raw = row[ti].strip(), row[ei].strip()
            try:
                t = float(t_raw)
            except ValueError:
                raise CliError(f"line {lineno}: invalid time {t_raw!r}") from None
            if not math.isfinite(t) or t <= 0:
                raise CliError(f"line {lineno}: invalid time {t_raw!r}")
            if e_raw not in ("0", "1"):
                raise CliError(f"line {lineno}: event must be 0 or 1, got {e_raw!r}")
            out.append(Observation(t, e_raw == "1"))
    if not out:
        raise CliError("no observations")
    return out


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _render(fmt: str, header, records, meta) -> str:
    if fmt == "json":
        payload = {"metadata": meta, "rows": records}
        return json.dumps(payload, indent=2, allow_nan=False) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for rec in records:
        writer.writerow([_cell(rec[name]) for name in header])
    for key, value in meta.items():
        buf.write(f"# {key}={_cell(value)}\n")
    return buf.getvalue()


def _write(args, text: str):
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_fit(args) -> int:
    data = _read_observations(args.input)
    result = fit(data)
    meta = {
        "input": args.input,
        "n": result.n,
        "distinct_times": len(result.curve),
        "method": args.method,
        "alpha": args.alpha,
        "seed": args.seed,
    }
    estimates = result.curve.values
    if args.method in ("em", "both"):
        em_curve, trace = em_fit(data, tol=args.tol, max_iter=args.max_iter)
        meta["iterations"] = trace.iterations
        meta["converged"] = trace.converged
        meta["final_sup_change"] = trace.final_sup_change
        if args.method == "both":
            disc = float(np.max(np.abs(em_curve.values - result.curve.values)))
            meta["discrepancy"] = disc
            if disc > EQUIVALENCE_TOL:
                print(
                    f"error: estimators disagree: sup discrepancy {disc:.3e} "
                    f"exceeds {EQUIVALENCE_TOL:g}",
                    file=sys.stderr,
                )
                return EXIT_MISMATCH
        else:
            estimates = em_curve.values

    want_band = args.band or args.band_from is not None or args.band_to is not None
    band_map = {}
    if want_band:
        if args.band_from is None or args.band_to is None:
            x1, x2 = default_band_interval(result)
            x1 = args.band_from if args.band_from is not None else x1
            x2 = args.band_to if args.band_to is not None else x2
        else:
            x1, x2 = args.band_from, args.band_to
        spec, band_rows = confidence_band(
            result, x1, x2, args.alpha,
            paths=args.paths, grid_points=args.grid, seed=args.seed,
        )
        band_map = {x: (lo, hi) for x, lo, hi in band_rows}
        meta["band_from"] = spec.x1
        meta["band_to"] = spec.x2
        meta["band_constant"] = spec.c_value
        meta["paths"] = args.paths
        meta["grid"] = args.grid

    rows = []
    for k, x in enumerate(result.knots):
        row = OutputRow(x=float(x), estimate=float(estimates[k]))
        if args.ci:
            try:
                row.ci_lo, row.ci_hi = ci_pointwise_log(result, float(x), args.alpha)
            except ValueError:
                pass  # undefined at this knot: column stays empty
        if float(x) in band_map:
            row.band_lo, row.band_hi = band_map[float(x)]
        if args.diagnostics:
            v = float(result.log_variance[k])
            row.log_variance = v if math.isfinite(v) else None
            row.h_hat = float(result.h_hat[k])
        rows.append(row)

    _write(args, _render(args.format, COLUMNS, [asdict(r) for r in rows], meta))
    if args.plot:
        from . import plotting

        plotting.save_fit_figure(args.plot, rows, alpha=args.alpha)
    return EXIT_OK


def _cmd_band_constant(args) -> int:
    if not (0.0 < args.a <= args.b < 1.0):
        raise CliError("interval must satisfy 0 < a <= b < 1")
    if not (0.0 < args.alpha < 1.0):
        raise CliError("alpha must lie in (0, 1)")
    c, se = band_constant_se(args.a, args.b, args.alpha, args.paths, args.grid, args.seed)
    meta = {
        "a": args.a,
        "b": args.b,
        "alpha": args.alpha,
        "paths": args.paths,
        "grid": args.grid,
        "seed": args.seed,
    }
    _write(args, _render(args.format, ("c", "se"), [{"c": c, "se": se}], meta))
    return EXIT_OK


_CONFIG_KEYS = tuple(f.name for f in fields(SimConfig))
_DIST_KEYS = ("family", "param1", "param2")


def _dist_from_obj(obj, where: str) -> DistSpec:
    if not isinstance(obj, dict):
        raise CliError(f"{where} must be an object with family/param1/param2")
    for key in obj:
        if key not in _DIST_KEYS:
            raise CliError(f"invalid config key: {where}.{key}")
    try:
        return DistSpec(obj.get("family"), obj.get("param1"), obj.get("param2"))
    except (TypeError, ValueError) as exc:
        raise CliError(f"invalid {where}: {exc}") from exc


def _load_config(path: str) -> SimConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise CliError(f"invalid config file: {exc}") from exc
    if not isinstance(raw, dict):
        raise CliError("config file must hold a JSON object")
    for key in raw:
        if key not in _CONFIG_KEYS:
            raise CliError(f"invalid config key: {key!r}")
    for key in ("n", "event_dist", "censor_dist", "reps", "eval_times"):
        if key not in raw:
            raise CliError(f"config is missing required key: {key!r}")
    kwargs = dict(raw)
    kwargs["event_dist"] = _dist_from_obj(raw["event_dist"], "event_dist")
    kwargs["censor_dist"] = _dist_from_obj(raw["censor_dist"], "censor_dist")
    kwargs["eval_times"] = tuple(raw["eval_times"])
    if isinstance(raw.get("band_interval"), list):
        kwargs["band_interval"] = tuple(raw["band_interval"])
    try:
        return SimConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise CliError(f"invalid config: {exc}") from exc


def _cmd_coverage(args) -> int:
    if (args.example is None) == (args.config is None):
        raise CliError("provide exactly one of --example 1|2 or --config FILE")
    if args.reps is not None and args.reps < 1:
        raise CliError("reps must be positive")
    if args.alpha is not None and not (0.0 < args.alpha < 1.0):
        raise CliError("alpha must lie in (0, 1)")
    if args.example is not None:
        cfg = example_config(args.example, seed=args.seed or 0, reps=args.reps or 100)
        if args.alpha is not None:
            cfg = replace(cfg, alpha=args.alpha)
    else:
        cfg = _load_config(args.config)
        overrides = {}
        if args.reps is not None:
            overrides["reps"] = args.reps
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.alpha is not None:
            overrides["alpha"] = args.alpha
        if overrides:
            cfg = replace(cfg, **overrides)

    report = coverage_experiment(cfg)
    records = []
    for row in report.per_time:
        mean_len = row.mean_ci_length if math.isfinite(row.mean_ci_length) else None
        records.append(
            {
                "time": row.time,
                "coverage": row.coverage,
                "mean_ci_length": mean_len,
                "undefined": row.undefined,
            }
        )
    meta = {
        "n": cfg.n,
        "reps": cfg.reps,
        "alpha": cfg.alpha,
        "seed": cfg.seed,
        "event_dist": _dist_label(cfg.event_dist),
        "censor_dist": _dist_label(cfg.censor_dist),
        "band_coverage": report.band_coverage,
        "band_failures": report.band_failures,
    }
    header = ("time", "coverage", "mean_ci_length", "undefined")
    _write(args, _render(args.format, header, records, meta))
    if args.plot:
        from . import plotting

        plotting.save_coverage_figure(args.plot, report, alpha=cfg.alpha)
    return EXIT_OK


def _dist_label(spec: DistSpec) -> str:
    if spec.family == "exponential":
        return f"exponential(rate={spec.param1:g})"
    return f"weibull(shape={spec.param1:g}, scale={spec.param2:g})"


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except CliError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except CliError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_NUMERICAL


def entry():
    raise SystemExit(main())
