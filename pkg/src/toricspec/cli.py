"""Command-line front end.

Usage::

    toricspec SUBCOMMAND [--config FILE] [options]

Subcommands are ``spectrum``, ``measure``, ``invariants``, ``symbols``,
``reconstruct`` and ``roundtrip``.  Settings come from an INI file with one
section per subcommand plus ``[profile]`` and ``[run]``; command-line options
override the file.  Each run writes its CSV/JSON/text outputs and a
``manifest.json`` into the output directory, which the environment variable
``TORICSPEC_OUTPUT_DIR`` overrides.

Exit status is 0 on success, 2 for configuration errors and 3 for numerical
failures; in the latter case the failing stage is printed on stderr.
"""

import argparse
import configparser
import csv
import json
import os
import platform
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .errors import ConfigError, ToricSpecError
from .invariants import default_lambda_grid, invariant_curves, InvariantCurve
from .laplace import equivariant_spectrum, extrapolated_spectrum
from .measure import expansion_prediction, spectral_measure
from .profiles import certify_single_well, check_pole_regularity, profile_from_spec
from .semiclassics import assemble_term, b_recursion
from .symbolic import to_string
from .testfunctions import exponential, mollified_indicator, smooth_bump, zero_function

__all__ = ["main", "load_config", "RunConfig", "parse_rho", "parse_m_range", "parse_lambda_grid"]

ENV_OUTPUT_DIR = "TORICSPEC_OUTPUT_DIR"
SUBCOMMANDS = ("spectrum", "measure", "invariants", "symbols", "reconstruct", "roundtrip")

# section -> key -> (converter, default, check)
_POS = ("positive", lambda x: x > 0)
_NONNEG = ("non-negative", lambda x: x >= 0)
_NONZERO = ("nonzero", lambda x: x != 0)
_ANY = ("any", lambda x: True)

SCHEMA = {
    "profile": {
        "family": (str, "round_sphere", _ANY),
        "coefficients": ("floats", "", _ANY),
        "grid_size": (int, 10000, _POS),
    },
    "spectrum": {
        "m_range": (str, "0..5", _ANY),
        "lambda_max": (float, 100.0, _POS),
        "cells": (int, 4096, _POS),
        "extrapolate": (bool, False, _ANY),
    },
    "measure": {
        "alpha": (float, 1.0, _NONZERO),
        "modes": ("ints", "16,24,32", _ANY),
        "rho": (str, "mollified_indicator:4,0.1", _ANY),
        "cells": (int, 8192, _POS),
        "extrapolate": (bool, True, _ANY),
    },
    "invariants": {
        "alpha": (float, 1.0, _NONZERO),
        "lambda_grid": (str, "default:200", _ANY),
        "nodes": (int, 64, _POS),
        "endpoint_rule": (str, "substitution", _ANY),
    },
    "symbols": {
        "max_order": (int, 2, _NONNEG),
    },
    "reconstruct": {
        "input": (str, "", _ANY),
        "alpha": (float, 1.0, _NONZERO),
        "s_points": (int, 400, _POS),
        "refine": (int, 4, _POS),
        "tol": (float, 1e-5, _POS),
        "points": (int, 321, _POS),
    },
    "roundtrip": {
        "alpha": (float, 1.0, _NONZERO),
        "lambda_points": (int, 200, _POS),
        "s_points": (int, 400, _POS),
        "x_eval": (float, 0.8, _POS),
        "nodes": (int, 64, _POS),
        "refine": (int, 4, _POS),
        "tol": (float, 1e-5, _POS),
    },
    "run": {
        "output_dir": (str, "toricspec_out", _ANY),
        "parallelism": (int, 1, _POS),
        "seed": (int, 0, _NONNEG),
    },
}


@dataclass
class RunConfig:
    """Validated settings, one dict per section."""

    sections: dict = field(default_factory=dict)

    def __getitem__(self, section):
        return self.sections[section]

    def echo(self):
        return {s: {k: _jsonable(v) for k, v in d.items()} for s, d in self.sections.items()}


def _jsonable(v):
    if isinstance(v, tuple):
        return list(v)
    return v


def _convert(section, key, raw, kind):
    text = str(raw).strip()
    try:
        if kind == "floats":
            return tuple(float(t) for t in text.replace(";", ",").split(",") if t.strip())
        if kind == "ints":
            return tuple(int(t) for t in text.split(",") if t.strip())
        if kind is bool:
            low = text.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if kind is int:
            val = float(text)
            if not val.is_integer():
                raise ValueError(text)
            return int(val)
        if kind is float:
            val = float(text)
            if not np.isfinite(val):
                raise ValueError(text)
            return val
        return text
    except ValueError:
        raise ConfigError(f"[{section}] {key}: cannot parse {text!r}") from None


def _set(sections, section, key, raw):
    kind, _, (what, ok) = SCHEMA[section][key]
    val = _convert(section, key, raw, kind)
    if kind in (int, float) and not ok(val):
        raise ConfigError(f"[{section}] {key} must be {what}, got {val}")
    sections[section][key] = val


def load_config(path=None, overrides=None):
    """Parse an INI file and apply ``{(section, key): value}`` overrides.

    Raises
    ------
    ConfigError
        On unknown sections or keys, unparsable values, or values out of range.
    """
    sections = {s: {k: spec[1] for k, spec in keys.items()} for s, keys in SCHEMA.items()}
    for s, keys in SCHEMA.items():
        for k, (kind, default, _) in keys.items():
            if kind in ("floats", "ints"):
                sections[s][k] = _convert(s, k, default, kind)
    if path is not None:
        parser = configparser.ConfigParser(interpolation=None)
        try:
            with open(path, encoding="utf-8") as fh:
                parser.read_file(fh)
        except (OSError, configparser.Error) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        for s in parser.sections():
            if s not in SCHEMA:
                raise ConfigError(f"unknown section [{s}]")
            for k, raw in parser.items(s):
                if k not in SCHEMA[s]:
                    raise ConfigError(f"unknown key {k!r} in [{s}]")
                _set(sections, s, k, raw)
    for (s, k), raw in (overrides or {}).items():
        if raw is not None:
            _set(sections, s, k, raw)
    env = os.environ.get(ENV_OUTPUT_DIR)
    if env:
        sections["run"]["output_dir"] = env
    return RunConfig(sections)


# ---------------------------------------------------------------------------
# specification strings


def parse_m_range(text):
    """``"a..b"`` (inclusive) or a comma list to a tuple of weights."""
    text = str(text).strip()
    try:
        if ".." in text:
            a, b = text.split("..")
            a, b = int(a), int(b)
            if b < a:
                raise ValueError
            return tuple(range(a, b + 1))
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise ConfigError(f"bad m range {text!r}; expected a..b") from None


def parse_rho(text):
    """``family:p1,p2,...`` to a test function.

    Families: ``mollified_indicator:upper,eps[,lower]``,
    ``smooth_bump:center,width``, ``exponential:rate,radius``, ``zero``.
    """
    name, _, args = str(text).strip().partition(":")
    key = name.strip().lower().replace("-", "_")
    try:
        vals = [float(t) for t in args.split(",") if t.strip()]
        if key == "zero" and not vals:
            return zero_function()
        if key == "mollified_indicator" and len(vals) in (2, 3):
            return mollified_indicator(vals[0], vals[1], *vals[2:])
        if key == "smooth_bump" and len(vals) == 2:
            return smooth_bump(*vals)
        if key == "exponential" and len(vals) == 2:
            return exponential(*vals)
    except ValueError as exc:
        raise ConfigError(f"bad rho {text!r}: {exc}") from None
    raise ConfigError(f"bad rho {text!r}")


def parse_lambda_grid(text, p, alpha):
    """``default[:n]``, ``linspace:a,b,n`` or an explicit comma list."""
    text = str(text).strip()
    head, _, args = text.partition(":")
    try:
        if head == "default":
            lam = default_lambda_grid(p, alpha, int(args) if args else 200)
        elif head == "linspace":
            a, b, n = args.split(",")
            lam = np.linspace(float(a), float(b), int(n))
        else:
            lam = np.array([float(t) for t in text.split(",") if t.strip()])
    except ValueError:
        raise ConfigError(f"bad lambda grid {text!r}") from None
    if lam.size < 1 or not np.all(np.isfinite(lam)) or np.any(np.diff(lam) <= 0):
        raise ConfigError(f"lambda grid {text!r} must be finite and strictly increasing")
    return lam


def _profile(cfg):
    sec = cfg["profile"]
    try:
        p = profile_from_spec(sec["family"], sec["coefficients"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    check_pole_regularity(p)
    return p


# ---------------------------------------------------------------------------
# output helpers


def _fmt(x):
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    return str(o)


def _ordered_map(fn, items, workers):
    """Map preserving input order; a process pool when ``workers > 1``."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# work units (module level so that they pickle)


def _spectrum_job(args):
    p, m, cells, lam_max, extrapolate = args
    solve = extrapolated_spectrum if extrapolate else equivariant_spectrum
    return solve(p, m, cells, lam_max).eigenvalues


def _measure_job(args):
    p, rho, alpha, m, cells, extrapolate = args
    return spectral_measure(p, rho, alpha, m, cells, extrapolate=extrapolate).value


def _invariants_job(args):
    p, alpha, lam, nodes, rule = args
    c = invariant_curves(p, alpha, lam, nodes, rule)
    return c.W, c.Q


# ---------------------------------------------------------------------------
# subcommands


def run_spectrum(cfg, out):
    p = _profile(cfg)
    sec = cfg["spectrum"]
    ms = parse_m_range(sec["m_range"])
    jobs = [(p, m, sec["cells"], sec["lambda_max"], sec["extrapolate"]) for m in ms]
    results = _ordered_map(_spectrum_job, jobs, cfg["run"]["parallelism"])
    rows = [(m, k, lam) for m, vals in zip(ms, results) for k, lam in enumerate(vals)]
    path = os.path.join(out, "spectrum.csv")
    write_csv(path, ["m", "k", "lambda"], rows)
    return [path]


def run_measure(cfg, out):
    p = _profile(cfg)
    sec = cfg["measure"]
    rho = parse_rho(sec["rho"])
    alpha = sec["alpha"]
    ms = sorted(sec["modes"])
    if not ms or any(m == 0 for m in ms):
        raise ConfigError("[measure] modes must be a non-empty list of nonzero weights")
    jobs = [(p, rho, alpha, m, sec["cells"], sec["extrapolate"]) for m in ms]
    mus = _ordered_map(_measure_job, jobs, cfg["run"]["parallelism"])
    i1, i2 = expansion_prediction(p, rho, alpha)
    rows = []
    for m, mu in zip(ms, mus):
        h = alpha / m
        rows.append((m, h, mu, i1, i2, h * mu - i1, (mu - i1 / h) / h - i2))
    path = os.path.join(out, "measure.csv")
    write_csv(path, ["m", "hbar", "mu", "I1", "I2", "resid1", "resid2"], rows)
    return [path]


def run_invariants(cfg, out):
    p = _profile(cfg)
    sec = cfg["invariants"]
    if sec["endpoint_rule"] not in ("substitution", "gauss_jacobi"):
        raise ConfigError("[invariants] endpoint_rule must be substitution or gauss_jacobi")
    alpha = sec["alpha"]
    lam = parse_lambda_grid(sec["lambda_grid"], p, alpha)
    workers = cfg["run"]["parallelism"]
    chunks = [c for c in np.array_split(lam, max(1, min(workers, lam.size))) if c.size]
    res = _ordered_map(_invariants_job, [(p, alpha, c, sec["nodes"], sec["endpoint_rule"]) for c in chunks], workers)
    W = np.concatenate([r[0] for r in res])
    Q = np.concatenate([r[1] for r in res])
    path = os.path.join(out, "invariants.csv")
    write_csv(path, ["lambda", "W", "Q"], zip(lam, W, Q))
    return [path]


def run_symbols(cfg, out):
    K = cfg["symbols"]["max_order"]
    lines = []
    for k in range(K + 1):
        lines.append(f"b_{k}(t) = sum_l b_{{{k},l}} t^l")
        for l, e in b_recursion(k, max(K, 2)).items():
            lines.append(f"  b_{{{k},{l}}} = {to_string(e)}")
        if k >= 1:
            term = assemble_term(k, max(K, 2))
            note = "  (odd in xi: integrates to zero)" if term.zero_by_parity else ""
            lines.append(f"hbar^{k} integrands against rho^(l)(tau){note}")
            for l, e in term.integrands:
                lines.append(f"  l = {l}: {to_string(e)}")
        lines.append("")
    path = os.path.join(out, "symbols.txt")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines))
    return [path]


def read_curve_csv(path, alpha):
    """Read ``lambda,W,Q`` columns into an :class:`InvariantCurve`."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or not {"lambda", "W", "Q"} <= set(reader.fieldnames):
                raise ConfigError(f"{path}: need columns lambda, W, Q")
            rows = [(float(r["lambda"]), float(r["W"]), float(r["Q"])) for r in reader]
    except OSError as exc:
        raise ConfigError(f"cannot read curve file: {exc}") from None
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if len(rows) < 8:
        raise ConfigError(f"{path}: too few rows")
    a = np.array(rows)
    if np.any(np.diff(a[:, 0]) <= 0):
        raise ConfigError(f"{path}: lambda must be strictly increasing")
    return InvariantCurve(float(alpha), a[:, 0], a[:, 1], a[:, 2])


def _reconstruction_rows(res, points):
    x = np.linspace(-res.x_max, res.x_max, points)
    return x, res(x)


def run_reconstruct(cfg, out):
    from .inverse import reconstruct

    sec = cfg["reconstruct"]
    if not sec["input"]:
        raise ConfigError("[reconstruct] input (CSV with lambda,W,Q) is required")
    curve = read_curve_csv(sec["input"], sec["alpha"])
    res, diag = reconstruct(curve, sec["s_points"], sec["refine"], sec["tol"])
    x, v = _reconstruction_rows(res, sec["points"])
    csv_path = os.path.join(out, "reconstruct_v.csv")
    write_csv(csv_path, ["x", "v"], zip(x, v))
    json_path = os.path.join(out, "reconstruct.json")
    _write_json(json_path, {"c": res.c, "x_max": res.x_max, "reflection_determined": False, "diagnostics": diag})
    return [csv_path, json_path]


def run_roundtrip(cfg, out):
    from .inverse import roundtrip

    p = _profile(cfg)
    certify_single_well(p, cfg["profile"]["grid_size"])
    sec = cfg["roundtrip"]
    rep = roundtrip(
        p,
        sec["alpha"],
        sec["lambda_points"],
        sec["s_points"],
        sec["x_eval"],
        sec["nodes"],
        sec["refine"],
        sec["tol"],
    )
    vt = p.v(-rep.x) if rep.reflected else p.v(rep.x)
    csv_path = os.path.join(out, "roundtrip_v.csv")
    write_csv(csv_path, ["x", "v_reconstructed", "v_true"], zip(rep.x, rep.result(rep.x), vt))
    json_path = os.path.join(out, "roundtrip.json")
    report = {
        "c_true": rep.c_true,
        "c_est": rep.c_est,
        "c_error": abs(rep.c_est - rep.c_true),
        "l_inf_error": rep.l_inf_error,
        "l2_error": rep.l2_error,
        "l_inf_identity": rep.l_inf_identity,
        "l_inf_reflected": rep.l_inf_reflected,
        "reflected": rep.reflected,
        "x_eval": float(rep.x[-1]),
        "diagnostics": rep.diagnostics,
    }
    _write_json(json_path, report)
    return [csv_path, json_path]


RUNNERS = {
    "spectrum": run_spectrum,
    "measure": run_measure,
    "invariants": run_invariants,
    "symbols": run_symbols,
    "reconstruct": run_reconstruct,
    "roundtrip": run_roundtrip,
}


# ---------------------------------------------------------------------------
# entry point


def build_parser():
    parser = argparse.ArgumentParser(prog="toricspec", description="Equivariant spectra and inverse spectral round trips.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="INI configuration file")
        sp.add_argument("--output-dir", help="output directory")
        sp.add_argument("--parallelism", help="worker processes")
        sp.add_argument("--seed", help="random seed recorded in the manifest")

    sp = sub.add_parser("spectrum", help="eigenvalues per weight")
    common(sp)
    sp.add_argument("--m-range", help="weights a..b")
    sp.add_argument("--lambda-max", help="eigenvalue cutoff")
    sp.add_argument("--cells", help="finite-volume cells")

    sp = sub.add_parser("measure", help="spectral measure against its expansion")
    common(sp)
    sp.add_argument("--alpha")
    sp.add_argument("--modes", help="comma-separated weights")
    sp.add_argument("--rho", help="test function, e.g. mollified_indicator:4,0.1")
    sp.add_argument("--cells")

    sp = sub.add_parser("invariants", help="W and Q on a level grid")
    common(sp)
    sp.add_argument("--alpha")
    sp.add_argument("--lambda-grid", help="default[:n], linspace:a,b,n or a comma list")

    sp = sub.add_parser("symbols", help="symbolic expansion coefficients")
    common(sp)
    sp.add_argument("--max-order")

    sp = sub.add_parser("reconstruct", help="profile from a lambda,W,Q CSV")
    common(sp)
    sp.add_argument("--input")
    sp.add_argument("--alpha")
    sp.add_argument("--s-points")

    sp = sub.add_parser("roundtrip", help="forward invariants then reconstruction")
    common(sp)
    sp.add_argument("--alpha")
    sp.add_argument("--lambda-points")
    sp.add_argument("--s-points")
    return parser


_FLAG_TARGETS = {
    "output_dir": "run",
    "parallelism": "run",
    "seed": "run",
}


def _overrides(args):
    ov = {}
    for name, value in vars(args).items():
        if name in ("command", "config") or value is None:
            continue
        section = _FLAG_TARGETS.get(name, args.command)
        ov[(section, name)] = value
    return ov


def main(argv=None):
    """Run one subcommand; returns the exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    start = time.perf_counter()
    try:
        cfg = load_config(args.config, _overrides(args))
        out = cfg["run"]["output_dir"]
        os.makedirs(out, exist_ok=True)
        np.random.seed(cfg["run"]["seed"])
        files = RUNNERS[args.command](cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ToricSpecError as exc:
        print(f"numerical failure in stage {exc.stage}: {exc}", file=sys.stderr)
        return 3
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure in stage {args.command}: {exc}", file=sys.stderr)
        return 3
    manifest = {
        "subcommand": args.command,
        "config": cfg.echo(),
        "outputs": [os.path.basename(f) for f in files],
        "versions": {
            "toricspec": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": __import__("scipy").__version__,
        },
        "wall_time_s": time.perf_counter() - start,
    }
    _write_json(os.path.join(out, "manifest.json"), manifest)
    return 0


if __name__ == "__main__":
    sys.exit(main())
