"""certbound command-line front end.

Commands build distributions or channels from a YAML config (or a named
preset), sweep a grid, and write one curve file in CSV or JSON.  CSV files
carry the expanded config as `#` comment lines so every output is
reproducible from the artifact alone; numeric cells use 17 significant
digits and round-trip 64-bit floats exactly.

Exit codes: 0 success, 2 config error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor

import yaml

from .channels import (
    bi_awgn,
    bi_sas,
    bsc,
    build_density_dist,
    build_independent_density_dist,
)
from .errors import CertboundError, ConfigError, OutOfHull
from .fbl_bounds import dt_bounds, mc_optimize_gamma
from .oracle import exact_cdf, mc_fbl
from .presets import PRESETS, preset_config
from .saddlepoint import (
    berry_esseen_envelope,
    exponent_h,
    solve_theta_star,
    thm3_envelope,
)
from .tilt_core import bernoulli, chi_squared_quadrature, gaussian_quadrature

ARTIFACT = "certbound 0.1.0"

SUM_CDF_FIELDS = ["a", "exact", "normal_center", "normal_lo", "normal_hi",
                  "sp_center", "sp_lo", "sp_hi", "theta_star", "h", "flag"]
CURVE_FIELDS = ["n", "m_log2", "gamma", "theta", "d", "alpha", "n_upper",
                "g", "beta", "s", "exact", "flag"]
MC_VALIDATION_FIELDS = ["mc_value", "mc_ci_low", "mc_ci_high"]


# ---------------------------------------------------------------------------
# Config loading and validation
# ---------------------------------------------------------------------------

def _fail(path: str, message: str):
    raise ConfigError(f"{path}: {message}")


def _get_number(cfg: dict, path: str, key: str, lo=None, hi=None,
                integer=False, default=None, required=True):
    where = f"{path}.{key}" if path else key
    if key not in cfg:
        if required and default is None:
            _fail(where, "missing required field")
        return default
    value = cfg[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(where, f"expected a number, got {value!r}")
    if integer and int(value) != value:
        _fail(where, f"expected an integer, got {value!r}")
    value = int(value) if integer else float(value)
    if lo is not None and value < lo:
        _fail(where, f"must be >= {lo}, got {value}")
    if hi is not None and value > hi:
        _fail(where, f"must be <= {hi}, got {value}")
    return value


def _validate_grid(cfg: dict, integer: bool) -> None:
    grid = cfg.get("grid")
    if not isinstance(grid, dict):
        _fail("grid", "missing section")
    start = _get_number(grid, "grid", "start", integer=integer)
    stop = _get_number(grid, "grid", "stop", integer=integer)
    step = _get_number(grid, "grid", "step", integer=integer)
    if step <= 0:
        _fail("grid.step", "must be positive")
    if stop < start:
        _fail("grid.stop", "must be >= grid.start")
    if integer and start < 1:
        _fail("grid.start", "blocklengths must be >= 1")


def _validate_validation(cfg: dict) -> None:
    block = cfg.get("validation")
    if block is None:
        return
    if not isinstance(block, dict):
        _fail("validation", "must be a section")
    _get_number(block, "validation", "samples", lo=10_000, integer=True)
    _get_number(block, "validation", "seed", integer=True, default=0,
                required=False)


def _validate_channel(cfg: dict) -> None:
    ch = cfg.get("channel")
    if not isinstance(ch, dict):
        _fail("channel", "missing section")
    kind = ch.get("kind")
    if kind == "bsc":
        delta = _get_number(ch, "channel", "delta")
        if not 0.0 < delta < 0.5:
            _fail("channel.delta", f"must be in (0, 0.5), got {delta}")
    elif kind == "bi_awgn":
        snr = _get_number(ch, "channel", "snr")
        if snr <= 0:
            _fail("channel.snr", "must be positive")
    elif kind == "bi_sas":
        alpha = _get_number(ch, "channel", "alpha")
        sigma = _get_number(ch, "channel", "sigma")
        if not 0.0 < alpha <= 2.0:
            _fail("channel.alpha", f"must be in (0, 2], got {alpha}")
        if sigma <= 0:
            _fail("channel.sigma", "must be positive")
    else:
        _fail("channel.kind", f"unknown channel {kind!r}")
    rate = _get_number(cfg, "", "rate")
    if rate <= 0:
        _fail("rate", "must be positive")


def _validate_distribution(cfg: dict) -> None:
    dist = cfg.get("distribution")
    if not isinstance(dist, dict):
        _fail("distribution", "missing section")
    family = dist.get("family")
    if family == "bernoulli":
        p = _get_number(dist, "distribution", "p")
        if not 0.0 < p < 1.0:
            _fail("distribution.p", f"must be in (0, 1), got {p}")
    elif family == "gaussian":
        _get_number(dist, "distribution", "mean", default=0.0, required=False)
        var = _get_number(dist, "distribution", "var", default=1.0,
                          required=False)
        if var <= 0:
            _fail("distribution.var", "must be positive")
    elif family == "chi_squared":
        pass
    else:
        _fail("distribution.family", f"unknown family {family!r}")
    _get_number(dist, "distribution", "n", lo=1, integer=True)


def validate_config(cfg: dict) -> None:
    """Check every numeric field before any computation starts."""
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a mapping")
    command = cfg.get("command")
    if command not in ("sum-cdf", "dt-curve", "mc-curve"):
        _fail("command", f"unknown command {command!r}")
    if command == "sum-cdf":
        _validate_distribution(cfg)
        _validate_grid(cfg, integer=False)
    else:
        _validate_channel(cfg)
        _validate_grid(cfg, integer=True)
        _validate_validation(cfg)
    quad = cfg.get("quadrature")
    if quad is not None:
        if not isinstance(quad, dict):
            _fail("quadrature", "must be a section")
        _get_number(quad, "quadrature", "nodes", lo=3, integer=True)
    out = cfg.get("output", {})
    if out and not isinstance(out, dict):
        _fail("output", "must be a section")
    fmt = out.get("format", "csv") if isinstance(out, dict) else "csv"
    if fmt not in ("csv", "json"):
        _fail("output.format", f"must be csv or json, got {fmt!r}")


# ---------------------------------------------------------------------------
# Row evaluation
# ---------------------------------------------------------------------------

def _grid_values(cfg: dict, integer: bool):
    grid = cfg["grid"]
    start, stop, step = grid["start"], grid["stop"], grid["step"]
    if integer:
        return list(range(int(start), int(stop) + 1, int(step)))
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [start + i * step for i in range(count)]


def _sum_cdf_setup(cfg: dict):
    spec = cfg["distribution"]
    n = int(spec["n"])
    nodes = int(cfg.get("quadrature", {}).get("nodes", 2001))
    family = spec["family"]
    if family == "bernoulli":
        p = float(spec["p"])
        dist = bernoulli(p)
        oracle = lambda a: exact_cdf("binomial", a, n=n, p=p)
    elif family == "chi_squared":
        dist = chi_squared_quadrature(nodes)
        oracle = lambda a: exact_cdf("gamma", a, shape=n / 2.0, scale=2.0)
    else:
        mean = float(spec.get("mean", 0.0))
        var = float(spec.get("var", 1.0))
        dist = gaussian_quadrature(mean, var, nodes)
        oracle = lambda a: exact_cdf("gaussian", a, mean=n * mean, var=n * var)
    return dist, n, oracle


def _sum_cdf_row(dist, n, oracle, a):
    be = berry_esseen_envelope(dist, n, a)
    row = {
        "a": a,
        "exact": oracle(a),
        "normal_center": be.center,
        "normal_lo": be.lower,
        "normal_hi": be.upper,
        "sp_center": None,
        "sp_lo": None,
        "sp_hi": None,
        "theta_star": None,
        "h": None,
        "flag": "",
    }
    try:
        solve = solve_theta_star(dist, n, a)
        env = thm3_envelope(dist, n, a)
        row.update(sp_center=env.center, sp_lo=env.lower, sp_hi=env.upper,
                   theta_star=solve.theta_star, h=exponent_h(dist, n, a))
    except OutOfHull:
        row["flag"] = "out_of_hull"
    return row


def run_sum_cdf(cfg: dict, threads: int = 1):
    dist, n, oracle = _sum_cdf_setup(cfg)
    grid = _grid_values(cfg, integer=False)
    rows = _map_rows(lambda a: _sum_cdf_row(dist, n, oracle, a), grid, threads)
    return SUM_CDF_FIELDS, rows


def _make_channel(cfg: dict):
    ch = cfg["channel"]
    if ch["kind"] == "bsc":
        return bsc(float(ch["delta"]))
    if ch["kind"] == "bi_awgn":
        return bi_awgn(float(ch["snr"]))
    return bi_sas(float(ch["alpha"]), float(ch["sigma"]))


def _log_scaled(log_scale: float, value: float) -> float:
    if value <= 0.0:
        return 0.0
    return math.exp(log_scale + math.log(value))


def _mc_validation(density, ind_dist, point, samples, seed):
    """Plain-MC estimate of the bound value with a 95% interval.

    The scaled independent-measure term is exp(threshold)-weighted; with
    raw sampling its estimate is 0 whenever the tail is below the Monte
    Carlo floor, which this diagnostic column accepts by design.
    """
    joint = mc_fbl(density.joint_density_dist, point.n, point.threshold_log,
                   samples, seed)
    ind = mc_fbl(ind_dist, point.n, point.threshold_log, samples, seed + 1)
    tail = 1.0 - ind.value
    scale_log = point.threshold_log
    value = joint.value + _log_scaled(scale_log, tail)
    stderr = math.hypot(joint.stderr, _log_scaled(scale_log, ind.stderr))
    if point.flavor == "mc":
        value -= math.exp(point.threshold_log - point.log2_m * math.log(2.0))
    return value, value - 1.96 * stderr, value + 1.96 * stderr


def _curve_row(density, ind_dist, flavor, rate, validation, n, row_seed):
    base = {key: None for key in CURVE_FIELDS}
    base.update(n=n, m_log2=n * rate, flag="")
    if validation:
        base.update({key: None for key in MC_VALIDATION_FIELDS})
    try:
        if flavor == "dt":
            point = dt_bounds(density, n, rate)
        else:
            point = mc_optimize_gamma(density, n, rate).point
    except OutOfHull:
        base["flag"] = "out_of_hull"
        return base
    base.update(
        gamma=point.gamma, theta=point.theta,
        d=point.normal.d, alpha=point.normal.alpha, n_upper=point.normal.n_upper,
        g=point.sp.g, beta=point.sp.beta, s=point.sp.s,
        exact=point.exact, flag=";".join(point.flags),
    )
    if validation:
        value, lo, hi = _mc_validation(density, ind_dist, point,
                                       int(validation["samples"]), row_seed)
        base.update(mc_value=value, mc_ci_low=lo, mc_ci_high=hi)
    return base


def run_fbl_curve(cfg: dict, flavor: str, threads: int = 1):
    channel = _make_channel(cfg)
    nodes = int(cfg.get("quadrature", {}).get("nodes", 2001))
    density = build_density_dist(channel, nodes=nodes)
    rate = float(cfg["rate"])
    validation = cfg.get("validation")
    ind_dist = None
    if validation:
        ind_dist = build_independent_density_dist(channel, nodes=nodes)
    grid = _grid_values(cfg, integer=True)
    seed = int(validation.get("seed", 0)) if validation else 0
    fields = CURVE_FIELDS + (MC_VALIDATION_FIELDS if validation else [])
    rows = _map_rows(
        lambda item: _curve_row(density, ind_dist, flavor, rate, validation,
                                item[1], seed + 2 * item[0]),
        list(enumerate(grid)), threads)
    return fields, rows


def _map_rows(fn, items, threads):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


# ---------------------------------------------------------------------------
# Output writing
# ---------------------------------------------------------------------------

def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, int):
        return str(value)
    return format(float(value), ".17g")


def _flatten(cfg, prefix=""):
    items = []
    for key in sorted(cfg):
        path = f"{prefix}.{key}" if prefix else str(key)
        value = cfg[key]
        if isinstance(value, dict):
            items.extend(_flatten(value, path))
        else:
            items.append((path, value))
    return items


def write_csv(path: str, cfg: dict, fields: list[str], rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# artifact: {ARTIFACT}\n")
        for key, value in _flatten(cfg):
            fh.write(f"# config.{key}: {value}\n")
        writer = csv.writer(fh)
        writer.writerow(fields)
        for row in rows:
            writer.writerow([_fmt(row.get(field)) for field in fields])


def write_json(path: str, cfg: dict, fields: list[str], rows: list[dict]) -> None:
    def clean(value):
        if isinstance(value, float) and not math.isfinite(value):
            return None
        return value

    payload = {
        "artifact": ARTIFACT,
        "config": cfg,
        "fields": fields,
        "rows": [{field: clean(row.get(field)) for field in fields}
                 for row in rows],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def _render_plot(command: str, rows: list[dict], out_path: str, title: str) -> None:
    from . import report

    png = out_path.rsplit(".", 1)[0] + ".png"
    if command == "sum-cdf":
        report.render_sum_cdf(rows, png, title)
    else:
        report.render_fbl_curve(rows, png, title)


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="certbound",
        description="Certified CDF envelopes and finite-blocklength bound curves.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("sum-cdf", "dt-curve", "mc-curve", "figure"):
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", help="YAML run configuration")
        cmd.add_argument("--preset", choices=sorted(PRESETS),
                         help="named built-in configuration")
        cmd.add_argument("--out", help="output file path")
        cmd.add_argument("--format", choices=["csv", "json"], dest="fmt")
        cmd.add_argument("--threads", type=int, default=1)
        cmd.add_argument("--seed", type=int,
                         help="override the validation seed")
        cmd.add_argument("--plot", action="store_true",
                         help="render a PNG figure next to the output file")
    return parser


def _load_config(args) -> dict:
    if args.preset:
        cfg = preset_config(args.preset)
        if args.command != "figure" and cfg["command"] != args.command:
            raise ConfigError(
                f"preset {args.preset} is a {cfg['command']} run, "
                f"not {args.command}")
    elif args.config:
        try:
            with open(args.config) as fh:
                cfg = yaml.safe_load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        except yaml.YAMLError as exc:
            raise ConfigError(f"invalid YAML: {exc}") from exc
        if args.command != "figure":
            cfg = dict(cfg or {})
            cfg.setdefault("command", args.command)
            if cfg["command"] != args.command:
                raise ConfigError(
                    f"config command {cfg['command']!r} does not match "
                    f"subcommand {args.command!r}")
    else:
        raise ConfigError("one of --config or --preset is required")
    out = dict(cfg.get("output") or {})
    if args.out:
        out["path"] = args.out
    if args.fmt:
        out["format"] = args.fmt
    out.setdefault("format", "csv")
    out.setdefault("path", f"{args.preset or 'certbound_out'}.{out['format']}")
    cfg["output"] = out
    if args.seed is not None and cfg.get("validation"):
        cfg["validation"]["seed"] = args.seed
    return cfg


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _load_config(args)
        validate_config(cfg)
    except ConfigError as exc:
        print(f"certbound: config error: {exc}", file=sys.stderr)
        return 2
    command = cfg["command"]
    try:
        if command == "sum-cdf":
            fields, rows = run_sum_cdf(cfg, threads=args.threads)
        else:
            flavor = "dt" if command == "dt-curve" else "mc"
            fields, rows = run_fbl_curve(cfg, flavor, threads=args.threads)
    except CertboundError as exc:
        print(f"certbound: numeric failure: {exc}", file=sys.stderr)
        return 3
    out = cfg["output"]
    if out["format"] == "csv":
        write_csv(out["path"], cfg, fields, rows)
    else:
        write_json(out["path"], cfg, fields, rows)
    if args.plot:
        _render_plot(command, rows, out["path"],
                     args.preset or cfg.get("command", ""))
    return 0


if __name__ == "__main__":
    sys.exit(main())
