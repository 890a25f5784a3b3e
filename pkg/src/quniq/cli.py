"""Command-line front end.

Each subcommand builds a report, validates it against a JSON schema and
writes it as JSON (``JSON_REPORT``) or as CSV. Settings come from flags,
then from a flat ``key=value`` config file, then from defaults.

Exit codes: 0 success, 2 invalid configuration, 3 divergent or undecidable
weight, 4 Bang range past ``n_max``, 5 singular experiment under
``--require-positive``.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import jsonschema
import numpy as np

from . import covers, quasianalytic, verify, weights
from .errors import (
    DegenerateScaleError,
    DivergentError,
    ExceedsNmaxError,
    HypothesisViolationError,
    InvalidWeightError,
    NotACoverError,
    NotLogConvexError,
    TailTooFatError,
    UndecidableError,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CLASSIFY = 3
EXIT_NMAX = 4
EXIT_SINGULAR = 5

FUP_COLUMNS = ["N", "Q", "E", "sigma_min", "recovery_constant", "method", "seed", "wall_time_ms"]

DEFAULTS = {
    "weight": None,
    "nmax": 200,
    "d": 1,
    "gamma": 0.5,
    "cw": 1.0,
    "A": None,
    "N": None,
    "seed": 0,
    "out": None,
    "format": None,
    "workers": 4,
    "intervals": None,
    "cantor": None,
    "shift": 0.0,
    "scales": None,
    "translates": "-8:8:65",
    "base": 3,
    "digits": "0,2",
    "kmin": 3,
    "kmax": 6,
    "cells": None,
    "rule": "LEFT",
    "method": "FULL_SVD",
    "smoke": False,
    "eps": 0.1,
    "n0": None,
    "xi_max": 2000.0,
    "require_positive": False,
    "no_timing": False,
}


class ConfigError(Exception):
    pass


# --------------------------------------------------------------------------
# report schemas

_num = {"type": ["number", "string"]}
_num_list = {"type": "array", "items": _num}

SCHEMAS = {
    "weight-report": {
        "type": "object",
        "required": ["command", "weight", "log_M", "mu", "log_integral", "sandwich",
                     "pls_classification"],
        "properties": {
            "weight": {"type": "object", "required": ["family", "params"]},
            "log_M": _num_list,
            "mu": _num_list,
            "log_integral": {"type": "object", "required": ["POWER", "CAUCHY"]},
            "sandwich": {"type": "object", "required": ["mu_sum", "lower_slack", "upper_slack"]},
            "pls_classification": {"enum": [s.value for s in weights.PLSStatus]},
        },
    },
    "pls-constant": {
        "type": "object",
        "required": ["command", "weight", "d", "gamma", "C_W", "A", "log_C", "bang_degrees", "levels"],
        "properties": {
            "log_C": {"type": "object", "required": ["log_value", "nesting_flag"]},
            "bang_degrees": {"type": "array", "items": {"type": "integer"}},
            "A": {"type": "number"},
        },
    },
    "cover": {
        "type": "object",
        "required": ["command", "weight", "input_card", "norm", "cover", "regularized",
                     "regularized_card", "card_ratio", "card_bound_ok", "sparsity"],
        "properties": {
            "norm": {"type": "number", "minimum": 0},
            "card_bound_ok": {"type": "boolean"},
            "sparsity": {"type": "object", "required": ["value", "status"]},
        },
    },
    "sparsity": {
        "type": "object",
        "required": ["command", "weight", "value", "status", "argmax", "samples"],
        "properties": {"status": {"const": "LOWER_BOUND"}},
    },
    "fup-experiment": {
        "type": "object",
        "required": ["command", "rows"],
        "properties": {
            "rows": {
                "type": "array",
                "items": {"type": "object", "required": FUP_COLUMNS[:-1]},
            }
        },
    },
    "paley-wiener": {
        "type": "object",
        "required": ["command", "weight", "epsilon", "n0", "tail_sum", "support_halfwidth",
                     "energy_outside_support", "energy_outside_3eps", "weighted_energy",
                     "recovery_ratio_outside_3eps"],
    },
}


# --------------------------------------------------------------------------
# formatting


def fmt_float(x) -> str:
    return "%.17g" % x


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isfinite(x):
            return float(fmt_float(x))
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return obj


def _csv_cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return fmt_float(v)
    if v is None:
        return ""
    return str(v)


def render(report: dict, fmt: str) -> str:
    if fmt == "JSON_REPORT":
        return json.dumps(report, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if "rows" in report:
        writer.writerow(FUP_COLUMNS)
        for row in report["rows"]:
            writer.writerow([_csv_cell(row.get(c)) for c in FUP_COLUMNS])
    else:
        writer.writerow(["key", "value"])
        for k, v in report.items():
            if isinstance(v, (dict, list)):
                v = json.dumps(v, separators=(",", ":"))
            writer.writerow([k, _csv_cell(v)])
    return buf.getvalue()


# --------------------------------------------------------------------------
# configuration


def read_config_file(path: str) -> dict:
    text = Path(path).read_text()
    parser = configparser.ConfigParser(interpolation=None, delimiters=("=",))
    parser.optionxform = str
    try:
        parser.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"config file {path}: {exc}") from None
    return {k.replace("-", "_"): v for k, v in parser["run"].items()}


_TYPES = {
    "nmax": int, "d": int, "gamma": float, "cw": float, "A": float, "N": int, "seed": int,
    "workers": int, "shift": float, "base": int, "kmin": int, "kmax": int, "cells": int,
    "eps": float, "n0": int, "xi_max": float,
}
_FLAGS = {"smoke", "require_positive", "no_timing"}


def resolve(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    if args.config:
        for k, v in read_config_file(args.config).items():
            if k not in DEFAULTS:
                raise ConfigError(f"unknown config key {k!r}")
            if k in _FLAGS:
                v = v.strip().lower() in ("1", "true", "yes", "on")
            elif k in _TYPES:
                try:
                    v = _TYPES[k](v)
                except ValueError:
                    raise ConfigError(f"config key {k}: bad value {v!r}") from None
            cfg[k] = v
    for k in DEFAULTS:
        v = getattr(args, k, None)
        if v is not None and v is not False:
            cfg[k] = v
    cfg["command"] = args.command
    if cfg["format"] is None:
        cfg["format"] = "CSV" if args.command == "fup-experiment" else "JSON_REPORT"
    _validate(cfg)
    return cfg


def _validate(cfg: dict) -> None:
    if cfg["format"] not in ("JSON_REPORT", "CSV"):
        raise ConfigError("format must be JSON_REPORT or CSV")
    if cfg["nmax"] < 1:
        raise ConfigError("nmax must be >= 1")
    if cfg["d"] < 1:
        raise ConfigError("d must be >= 1")
    if not 0 < cfg["gamma"] < 1:
        raise ConfigError("gamma must lie in (0, 1)")
    if cfg["cw"] < 1:
        raise ConfigError("cw must be >= 1")
    if cfg["A"] is not None and not cfg["A"] > 1:
        raise ConfigError("A must exceed 1")
    if cfg["workers"] < 1:
        raise ConfigError("workers must be >= 1")
    if cfg["method"] not in ("FULL_SVD", "ITERATIVE"):
        raise ConfigError("method must be FULL_SVD or ITERATIVE")
    if cfg["command"] in ("weight-report", "pls-constant", "cover", "sparsity", "paley-wiener"):
        if not cfg["weight"]:
            raise ConfigError("--weight is required")
        try:
            cfg["weight_obj"] = weights.parse_weight(cfg["weight"])
        except (InvalidWeightError, ValueError) as exc:
            raise ConfigError(f"invalid weight {cfg['weight']!r}: {exc}") from None


def _parse_range(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(v) for v in text.split(":"))
    except ValueError:
        raise ConfigError(f"bad range {text!r}, expected LO:HI") from None
    if hi < lo:
        raise ConfigError(f"empty range {text!r}")
    return lo, hi


def _load_set(cfg: dict) -> covers.IntervalSet:
    if cfg["cantor"]:
        try:
            parts = cfg["cantor"].split(":")
            base, digits, depth = int(parts[0]), [int(x) for x in parts[1].split(",")], int(parts[2])
            scale = float(parts[3]) if len(parts) > 3 else float(base**depth)
            return covers.cantor_set(base, digits, depth, scale)
        except (ValueError, IndexError) as exc:
            raise ConfigError(f"bad --cantor value {cfg['cantor']!r}: {exc}") from None
    if not cfg["intervals"]:
        raise ConfigError("--intervals FILE or --cantor BASE:DIGITS:DEPTH is required")
    try:
        return covers.IntervalSet.from_text(Path(cfg["intervals"]).read_text())
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read interval file: {exc}") from None


def _default_scales(q: covers.IntervalSet, shift: float, pad: float = 0.0) -> tuple[int, int]:
    if q.empty:
        return (0, 0)
    reach = max(abs(q.a[0]), abs(q.b[-1])) + abs(shift) + pad
    return (0, max(0, math.ceil(math.log(max(reach, 1.0)))))


# --------------------------------------------------------------------------
# subcommands


def cmd_weight_report(cfg: dict) -> dict:
    w = cfg["weight_obj"]
    cls = weights.pls_classify(w)  # raises UndecidableError for undeclared tails
    m = weights.moment_sequence(w, cfg["nmax"])
    power = weights.log_integral(w, weights.IntegralForm.POWER)
    cauchy = weights.log_integral(w, weights.IntegralForm.CAUCHY)
    s = m.mu_sum()
    return {
        "weight": weights.weight_to_record(w, cfg["nmax"]),
        "log_M": m.log_m,
        "mu": m.mu[1:],
        "log_integral": {"POWER": power, "CAUCHY": cauchy},
        # with a divergent integral only the lower inequality is informative at finite n_max
        "sandwich": {"mu_sum": s, "lower_slack": power - s,
                     "upper_slack": s + 1.0 - power if math.isfinite(power) else None},
        "pls_classification": cls.value,
    }


def cmd_pls_constant(cfg: dict) -> dict:
    w = cfg["weight_obj"]
    res = quasianalytic.pls_constant_detail(w, cfg["d"], cfg["cw"], cfg["gamma"], cfg["A"],
                                            n_max=cfg["nmax"])
    return {
        "weight": weights.weight_to_record(w, cfg["nmax"]),
        "d": cfg["d"],
        "gamma": cfg["gamma"],
        "C_W": cfg["cw"],
        "A": res.A,
        "neg_log_t": res.neg_log_t,
        "log_C": res.log_C.record(),
        "bang_degrees": res.bang_degrees,
        "levels": [
            {"level": lvl, "neg_log_t": lam, "s": s, "bang_degree": n, "log_theta_1": th}
            for lvl, lam, s, n, th in res.trace.levels
        ],
    }


def _translates(text: str) -> np.ndarray:
    try:
        lo, hi, count = text.split(":")
        return np.linspace(float(lo), float(hi), int(count))
    except ValueError:
        raise ConfigError(f"bad translate grid {text!r}, expected LO:HI:COUNT") from None


def cmd_cover(cfg: dict) -> dict:
    w = cfg["weight_obj"]
    q = _load_set(cfg)
    lo, hi = _parse_range(cfg["scales"]) if cfg["scales"] else _default_scales(q, cfg["shift"])
    c = covers.greedy_short_cover(q, w, cfg["shift"], range(lo, hi + 1))
    r = covers.regularize_cover(c, q)
    grid = _translates(cfg["translates"])
    slo, shi = _parse_range(cfg["scales"]) if cfg["scales"] else _default_scales(
        q, 0.0, float(np.max(np.abs(grid))))
    est = covers.sparsity_norm_estimate(q, w, grid, range(slo, shi + 1))
    n_in, n_reg = c.total_card(), r.total_card()
    ratio = n_reg / n_in if n_in else 0.0
    return {
        "weight": weights.weight_to_record(w),
        "shift": cfg["shift"],
        "scales": [lo, hi],
        "input_card": n_in,
        "norm": c.norm,
        "cover": c.record(),
        "regularized": r.record(),
        "regularized_card": n_reg,
        "card_ratio": ratio,
        "card_bound_ok": n_reg <= 7 * n_in,
        "sparsity": {"value": est.value, "status": est.status, "argmax": est.argmax,
                     "samples": est.samples},
    }


def cmd_sparsity(cfg: dict) -> dict:
    w = cfg["weight_obj"]
    q = _load_set(cfg)
    grid = _translates(cfg["translates"])
    lo, hi = _parse_range(cfg["scales"]) if cfg["scales"] else _default_scales(
        q, 0.0, float(np.max(np.abs(grid))))
    est = covers.sparsity_norm_estimate(q, w, grid, range(lo, hi + 1))
    return {
        "weight": weights.weight_to_record(w),
        "scales": [lo, hi],
        "value": est.value,
        "status": est.status,
        "argmax": est.argmax,
        "samples": est.samples,
    }


def _fup_job(N: int, fm: np.ndarray, sm: np.ndarray, method: str, seed: int, timing: bool) -> dict:
    exp = verify.observability_constant(N, fm, sm, method, seed)
    rec = exp.record(timing=timing)
    rec.pop("status")
    rec["singular"] = exp.result.singular
    return rec


def cmd_fup_experiment(cfg: dict) -> dict:
    base = cfg["base"]
    try:
        digits = [int(x) for x in str(cfg["digits"]).split(",")]
    except ValueError:
        raise ConfigError(f"bad digit list {cfg['digits']!r}") from None
    if cfg["kmin"] < 1 or cfg["kmax"] < cfg["kmin"]:
        raise ConfigError("need 1 <= kmin <= kmax")
    jobs = []
    for k in range(cfg["kmin"], cfg["kmax"] + 1):
        N = base**k
        try:
            fm = verify.cantor_freq_mask(N, base, digits)
            sm = verify.gamma_dense_space_mask(N, cfg["gamma"], cfg["cells"], cfg["rule"], cfg["seed"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        jobs.append((N, fm, sm))
    if cfg["smoke"]:
        N = base ** cfg["kmin"]
        fm = np.zeros(N, bool)
        fm[0] = True
        jobs.append((N, fm, jobs[0][2]))
    timing = not cfg["no_timing"]
    with ThreadPoolExecutor(max_workers=cfg["workers"]) as pool:
        futures = [pool.submit(_fup_job, N, fm, sm, cfg["method"], cfg["seed"], timing)
                   for N, fm, sm in jobs]
        rows = [f.result() for f in futures]
    return {"rows": rows}


def cmd_paley_wiener(cfg: dict) -> dict:
    w = cfg["weight_obj"]
    N = cfg["N"] or 2**16
    m = weights.moment_sequence(w, cfg["nmax"])
    xi = verify.symmetric_grid(N, cfg["xi_max"])
    prof = verify.paley_wiener_profile(m, cfg["eps"], cfg["n0"], xi)
    x, f = verify.inverse_transform(prof.values, xi)
    three = 3.0 * cfg["eps"]
    energy = verify.weighted_energy_detail(prof.values, w, xi, prof, m)
    coarse_xi = verify.symmetric_grid(N // 2, cfg["xi_max"])
    coarse = verify.paley_wiener_profile(m, cfg["eps"], prof.n0, coarse_xi)
    coarse_energy = verify.weighted_energy(coarse.values, w, coarse_xi)
    return {
        "weight": weights.weight_to_record(w, cfg["nmax"]),
        "epsilon": prof.epsilon,
        "n0": prof.n0,
        "tail_sum": prof.tail_sum,
        "support_halfwidth": prof.support_halfwidth,
        "log_scale": prof.log_scale,
        "grid": {"N": N, "xi_max": cfg["xi_max"]},
        "energy_outside_support": verify.energy_outside(x, f, prof.support_halfwidth),
        "energy_outside_3eps": verify.energy_outside(x, f, three),
        "weighted_energy": energy.value,
        "weighted_energy_coarse": coarse_energy,
        "weighted_energy_tail_bound": energy.tail_bound,
        "tail_bound_valid_to": energy.tail_valid_to,
        "recovery_ratio_outside_3eps": verify.recovery_ratio(f, np.abs(x) > three),
    }


COMMANDS = {
    "weight-report": cmd_weight_report,
    "pls-constant": cmd_pls_constant,
    "cover": cmd_cover,
    "sparsity": cmd_sparsity,
    "fup-experiment": cmd_fup_experiment,
    "paley-wiener": cmd_paley_wiener,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="quniq", description=__doc__.split("\n")[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value file; flags override it")
    common.add_argument("--weight", help="FAMILY:params, e.g. band:2 or powerexp:c=1,alpha=0.5")
    common.add_argument("--nmax", type=int)
    common.add_argument("--d", type=int)
    common.add_argument("--gamma", type=float)
    common.add_argument("--cw", type=float)
    common.add_argument("--A", type=float)
    common.add_argument("--N", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--out")
    common.add_argument("--format", choices=["JSON_REPORT", "CSV"])
    common.add_argument("--workers", type=int)
    common.add_argument("--no-timing", dest="no_timing", action="store_true",
                        help="omit wall-clock times so reruns are byte-identical")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("weight-report", parents=[common], help="moments, log integrals, PLS class")
    sub.add_parser("pls-constant", parents=[common], help="Remez-type recovery constant")

    for name, helptext in (("cover", "W-short cover of an interval set"),
                           ("sparsity", "sampled sparsity norm")):
        sp = sub.add_parser(name, parents=[common], help=helptext)
        sp.add_argument("--intervals", help="file with one 'a b' pair per line")
        sp.add_argument("--cantor", help="BASE:DIGITS:DEPTH[:SCALE], e.g. 3:0,2:5")
        sp.add_argument("--scales", help="LO:HI band indices")
        sp.add_argument("--translates", help="LO:HI:COUNT translate grid")
        if name == "cover":
            sp.add_argument("--shift", type=float)

    sp = sub.add_parser("fup-experiment", parents=[common], help="Cantor vs gamma-dense sweep")
    sp.add_argument("--base", type=int)
    sp.add_argument("--digits")
    sp.add_argument("--kmin", type=int)
    sp.add_argument("--kmax", type=int)
    sp.add_argument("--cells", type=int)
    sp.add_argument("--rule", choices=["LEFT", "RANDOM"])
    sp.add_argument("--method", choices=["FULL_SVD", "ITERATIVE"])
    sp.add_argument("--smoke", action="store_true", help="append a single-frequency row")
    sp.add_argument("--require-positive", dest="require_positive", action="store_true")

    sp = sub.add_parser("paley-wiener", parents=[common], help="sinc-product construction")
    sp.add_argument("--eps", type=float)
    sp.add_argument("--n0", type=int)
    sp.add_argument("--xi-max", dest="xi_max", type=float)
    return p


def _error(code: int, exc: BaseException, level=None) -> int:
    payload = {"error": getattr(exc, "code", type(exc).__name__), "message": str(exc)}
    if level is not None:
        payload["level"] = level
    print(json.dumps(payload), file=sys.stderr)
    return code


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve(args)
    except (ConfigError, OSError) as exc:
        return _error(EXIT_CONFIG, exc)
    t0 = time.perf_counter()
    try:
        body = COMMANDS[cfg["command"]](cfg)
    except ConfigError as exc:
        return _error(EXIT_CONFIG, exc)
    except (DivergentError, UndecidableError, NotLogConvexError, InvalidWeightError) as exc:
        return _error(EXIT_CLASSIFY, exc)
    except ExceedsNmaxError as exc:
        return _error(EXIT_NMAX, exc, exc.level)
    except (DegenerateScaleError, HypothesisViolationError, NotACoverError, TailTooFatError,
            ValueError) as exc:
        return _error(EXIT_CONFIG, exc)
    report = {"command": cfg["command"], **_jsonable(body)}
    if not cfg["no_timing"] and cfg["command"] != "fup-experiment":
        report["wall_time_ms"] = (time.perf_counter() - t0) * 1e3
    jsonschema.validate(report, SCHEMAS[cfg["command"]])
    text = render(report, cfg["format"])
    if cfg["out"]:
        Path(cfg["out"]).write_text(text)
    else:
        sys.stdout.write(text)
    if cfg["require_positive"] and any(r.get("singular") for r in body.get("rows", [])):
        print(json.dumps({"error": "SINGULAR", "message": "singular experiment present"}),
              file=sys.stderr)
        return EXIT_SINGULAR
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
