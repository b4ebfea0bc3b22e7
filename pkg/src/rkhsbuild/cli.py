"""Batch front-end: ``rkhsbuild <command> --config job.json [--output path] [--seed n]``.

A job is a JSON object validated against :data:`CONFIG_SCHEMA` (unknown keys
are rejected). Each run writes exactly one artifact, CSV or JSON, to the
output path or stdout, and a one-line summary to stderr.

Exit codes: 0 success, 1 usage/IO/domain error, 2 numerical verdict failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import jsonschema
import numpy as np

from . import verify
from .applications import DiscreteRandomVariable, isometry_check, rkhs_distance
from .errors import RkhsError
from .fbm import DensityOnGrid, fbm_energy_spatial, fbm_energy_spectral
from .gaussian import bessel_pairing_closed_form, moment_membership
from .gram import PointSet, build_gram, format_float
from .kernels import KINDS, KernelSpec, as_points, dk_metric
from .measures import SignedMeasure, embed, gaussian_measure, measure_pair, uniform_measure
from .projection import FunctionSource, RkhsFunction, dyadic_chain, norm_sup_estimate, qf_project

EXIT_OK, EXIT_ERROR, EXIT_VERDICT = 0, 1, 2
U64_MAX = 2 ** 64 - 1

COMMANDS = (
    "gram", "interp", "norm-trace", "membership", "metric", "pair", "embed",
    "distance", "verify-suite", "fbm-compare", "gaussian-check", "isometry-check",
)
# commands that never touch the configured kernel
KERNEL_FREE = ("membership", "verify-suite", "fbm-compare", "gaussian-check")

_number = {"type": "number"}
_point = {"oneOf": [_number, {"type": "array", "items": _number, "minItems": 1}]}
_points = {"type": "array", "items": _point, "minItems": 1}
_numbers = {"type": "array", "items": _number, "minItems": 1}


def _obj(props, required=()):
    return {"type": "object", "properties": props, "required": list(required), "additionalProperties": False}


FUNCTION_SCHEMA = {
    "oneOf": [
        _obj({"type": {"const": "constant"}, "value": _number}, ["type", "value"]),
        _obj({"type": {"const": "polynomial"}, "coefficients": _numbers}, ["type", "coefficients"]),
        _obj({"type": {"const": "kernel_expansion"}, "points": _points, "coeffs": _numbers},
             ["type", "points", "coeffs"]),
    ]
}

MEASURE_SCHEMA = {
    "oneOf": [
        _obj({"form": {"const": "atomic"}, "points": _points, "weights": _numbers}, ["form", "points", "weights"]),
        _obj({"form": {"const": "grid_density"}, "nodes": _points, "density": _numbers,
              "quad_weights": _numbers, "rule": {"type": "string"}},
             ["form", "nodes", "density", "quad_weights", "rule"]),
        _obj({"form": {"const": "gaussian"}, "sigma": _number, "order": {"type": "integer", "minimum": 1}},
             ["form", "sigma"]),
        _obj({"form": {"const": "uniform"}, "a": _number, "b": _number, "n": {"type": "integer", "minimum": 2}},
             ["form"]),
    ]
}

_dyadic = _obj({"a": _number, "b": _number, "levels": {"type": "integer", "minimum": 0, "maximum": 14},
                "start": {"type": "integer", "minimum": 0}}, ["a", "b", "levels"])

PAYLOAD_SCHEMAS = {
    "gram": _obj({"points": _points}, ["points"]),
    "interp": _obj({"points": _points, "function": FUNCTION_SCHEMA, "probes": _points}, ["points", "function"]),
    "norm-trace": _obj({
        "function": FUNCTION_SCHEMA,
        "chain": {"oneOf": [
            _obj({"dyadic": _dyadic}, ["dyadic"]),
            _obj({"sets": {"type": "array", "items": _points, "minItems": 1}}, ["sets"]),
        ]},
    }, ["function", "chain"]),
    "membership": _obj({"measure": MEASURE_SCHEMA, "N": {"type": "integer", "minimum": 4, "maximum": 150}},
                       ["measure"]),
    "metric": {"oneOf": [
        _obj({"points": _points}, ["points"]),
        _obj({"pairs": {"type": "array", "items": {"type": "array", "items": _point,
                                                   "minItems": 2, "maxItems": 2}, "minItems": 1}}, ["pairs"]),
    ]},
    "pair": _obj({"xi": MEASURE_SCHEMA, "eta": MEASURE_SCHEMA}, ["xi", "eta"]),
    "embed": _obj({"measure": MEASURE_SCHEMA, "probes": _points}, ["measure", "probes"]),
    "distance": _obj({"mu": MEASURE_SCHEMA, "nu": MEASURE_SCHEMA}, ["mu", "nu"]),
    "verify-suite": _obj({"checks": {"type": "array", "items": {"enum": list(verify.CHECKS)}, "minItems": 1}}),
    "fbm-compare": _obj({
        "hurst": {"type": "number", "exclusiveMinimum": 0.5, "exclusiveMaximum": 1.0},
        "density": {"oneOf": [
            _obj({"csv": {"type": "string"}}, ["csv"]),
            _obj({"function": FUNCTION_SCHEMA, "a": _number, "b": _number,
                  "n": {"type": "integer", "minimum": 2}}, ["function", "a", "b", "n"]),
        ]},
        "padding": {"type": "integer", "minimum": 1},
    }, ["hurst", "density"]),
    "gaussian-check": _obj({
        "norms": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 1},
        "gh_order": {"type": "integer", "minimum": 1},
        "truncation_order": {"type": "integer", "minimum": 1},
    }),
    "isometry-check": _obj({"probabilities": _numbers, "values": _points}, ["probabilities", "values"]),
}

TOLERANCE_KEYS = ("plateau_tol", "divergence_slope", "rank_tol", "cond_limit", "rel_tol", "gap_tol")

CONFIG_SCHEMA = _obj({
    "command": {"enum": list(COMMANDS)},
    "kernel": _obj({"kind": {"enum": list(KINDS)}, "params": {"type": "object"},
                    "domain_dim": {"type": "integer", "minimum": 1}}, ["kind"]),
    "payload": {"type": "object"},
    "output": _obj({"path": {"type": "string"}, "format": {"enum": ["csv", "json"]}}),
    "tolerances": _obj({k: {"type": "number", "exclusiveMinimum": 0} for k in TOLERANCE_KEYS}),
    "seed": {"type": "integer", "minimum": 0, "maximum": U64_MAX},
})

DEFAULT_TOLERANCES = {
    "fbm-compare": 1e-2,
    "gaussian-check": 1e-6,
    "isometry-check": 1e-12,
}


class UsageError(Exception):
    pass


class Result:
    """What a command hands back: rows for CSV, a dict for JSON, a summary, a verdict."""

    def __init__(self, header, rows, data, summary, ok=True):
        self.header = header
        self.rows = rows
        self.data = data
        self.summary = summary
        self.ok = ok

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return json.dumps(_jsonable(self.data), indent=2, sort_keys=True) + "\n"
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if self.header:
            w.writerow(self.header)
        for row in self.rows:
            w.writerow([_cell(v) for v in row])
        return buf.getvalue()


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format_float(v) if math.isfinite(v) else str(float(v))
    if v is None:
        return ""
    return v


def _jsonable(x):
    # non-finite floats become strings so the artifact stays strict JSON
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    return x


# payload decoding


def make_function(spec, data: dict, dim: int = 1):
    kind = data["type"]
    if kind == "constant":
        c = float(data["value"])
        return FunctionSource(lambda X: np.full(len(X), c), vectorized=True, dim=dim)
    if kind == "polynomial":
        if dim != 1:
            raise UsageError("polynomial functions are one-dimensional")
        coeffs = np.asarray(data["coefficients"], dtype=np.float64)[::-1]
        return FunctionSource(lambda X: np.polyval(coeffs, X[:, 0]), vectorized=True)
    if spec is None:
        raise UsageError("kernel_expansion functions need a kernel")
    return RkhsFunction(spec, PointSet(data["points"], dim=spec.domain_dim), data["coeffs"])


def make_measure(data: dict) -> SignedMeasure:
    form = data["form"]
    if form == "gaussian":
        return gaussian_measure(float(data["sigma"]), int(data.get("order", 40)))
    if form == "uniform":
        return uniform_measure(float(data.get("a", 0.0)), float(data.get("b", 1.0)), int(data.get("n", 201)))
    return SignedMeasure.from_dict(data)


def _coords(p) -> list:
    return [float(c) for c in np.atleast_1d(p)]


# commands


def cmd_gram(spec, payload, tol, seed):
    F = PointSet(payload["points"], dim=spec.domain_dim)
    G = build_gram(spec, F, tol.get("rank_tol", 1e-11), tol.get("cond_limit", 1e12))
    data = {
        "matrix": G.matrix, "pivot_order": G.pivot_order, "numerical_rank": G.numerical_rank,
        "factor_kind": G.factor_kind, "condition_estimate": G.condition_estimate,
    }
    rows = [list(r) for r in G.matrix]
    return Result(None, rows, data, f"gram {G.size}x{G.size} rank={G.numerical_rank} {G.factor_kind}")


def cmd_interp(spec, payload, tol, seed):
    F = PointSet(payload["points"], dim=spec.domain_dim)
    f = make_function(spec, payload["function"], spec.domain_dim)
    g = qf_project(spec, F, f)
    data = {"support": F.points, "coeffs": g.coeffs, "norm_sq": g.norm_sq()}
    if "probes" in payload:
        P = as_points(payload["probes"], spec.domain_dim)
        vals = g.values(P)
        data["probe_values"] = vals
        rows = [_coords(p) + [v] for p, v in zip(P, vals)]
        header = [f"x{i}" for i in range(spec.domain_dim)] + ["value"]
    else:
        rows = [_coords(p) + [c] for p, c in zip(F.points, g.coeffs)]
        header = [f"x{i}" for i in range(spec.domain_dim)] + ["coeff"]
    return Result(header, rows, data, f"interp |F|={len(F)} norm_sq={format_float(data['norm_sq'])}")


def cmd_norm_trace(spec, payload, tol, seed):
    f = make_function(spec, payload["function"], spec.domain_dim)
    chain = payload["chain"]
    if "dyadic" in chain:
        d = chain["dyadic"]
        nested = dyadic_chain(d["a"], d["b"], d["levels"], d.get("start", 0))
    else:
        nested = [PointSet(s, dim=spec.domain_dim) for s in chain["sets"]]
    kw = {k: tol[k] for k in ("plateau_tol", "divergence_slope", "rank_tol", "cond_limit") if k in tol}
    trace = norm_sup_estimate(spec, nested, f, **kw)
    rows = [[s.set_size, s.norm_sq, s.condition_estimate, ";".join(s.flags)] for s in trace.stages]
    return Result(
        ["set_size", "norm_sq", "condition_estimate", "flags"], rows, trace.to_dict(),
        f"norm-trace {len(rows)} stages verdict={trace.verdict} sup_estimate={format_float(trace.sup_estimate)}",
    )


def cmd_membership(spec, payload, tol, seed):
    mu = make_measure(payload["measure"])
    rep = moment_membership(mu, int(payload.get("N", 60)))
    rows = list(enumerate(rep.partial_sums))
    return Result(["n", "partial_sum"], rows, rep.to_dict(),
                  f"membership N={len(rows) - 1} verdict={rep.verdict} sum={format_float(rep.partial_sums[-1])}")


def cmd_metric(spec, payload, tol, seed):
    if "pairs" in payload:
        pairs = [(as_points(t, spec.domain_dim)[0], as_points(s, spec.domain_dim)[0]) for t, s in payload["pairs"]]
    else:
        P = as_points(payload["points"], spec.domain_dim)
        pairs = [(P[i], P[j]) for i in range(len(P)) for j in range(i + 1, len(P))]
    if not pairs:
        raise UsageError("metric needs at least two points")
    rows, data = [], []
    for t, s in pairs:
        d = dk_metric(spec, t, s)
        rows.append(_coords(t) + _coords(s) + [d])
        data.append({"t": _coords(t), "s": _coords(s), "d": d})
    return Result(None, rows, {"pairs": data}, f"metric {len(rows)} pairs")


def cmd_pair(spec, payload, tol, seed):
    res = measure_pair(spec, make_measure(payload["xi"]), make_measure(payload["eta"]))
    d = res.to_dict()
    return Result(list(d), [list(d.values())], d,
                  f"pair value={format_float(res.value)} finite={res.finiteness_flag}")


def cmd_embed(spec, payload, tol, seed):
    g = embed(spec, make_measure(payload["measure"]))
    P = as_points(payload["probes"], spec.domain_dim)
    vals = g.values(P)
    rows = [_coords(p) + [v] for p, v in zip(P, vals)]
    header = [f"x{i}" for i in range(spec.domain_dim)] + ["value"]
    return Result(header, rows, {"probes": P, "values": vals}, f"embed {len(rows)} probes")


def cmd_distance(spec, payload, tol, seed):
    d = rkhs_distance(spec, make_measure(payload["mu"]), make_measure(payload["nu"]))
    return Result(["distance"], [[d]], {"distance": d}, f"distance {format_float(d)}")


def cmd_verify_suite(spec, payload, tol, seed):
    results = verify.run_suite(seed, payload.get("checks"))
    rows = [[r.name, r.passed, r.worst, r.tolerance, r.detail] for r in results]
    n_fail = sum(not r.passed for r in results)
    data = {"seed": seed, "checks": [r.to_dict() for r in results], "pass": n_fail == 0}
    summary = f"verify-suite seed={seed} {len(results) - n_fail}/{len(results)} passed"
    return Result(["name", "passed", "worst", "tolerance", "detail"], rows, data, summary, n_fail == 0)


def cmd_fbm_compare(spec, payload, tol, seed):
    H = float(payload["hurst"])
    pad = int(payload.get("padding", 8))
    dens = payload["density"]
    if "csv" in dens:
        path = Path(dens["csv"])
        if not path.is_file():
            raise FileNotFoundError(f"density file not found: {path}")
        f = DensityOnGrid.from_csv(path, pad)
    else:
        src = make_function(None, dens["function"])
        f = DensityOnGrid.from_function(src.values, dens["a"], dens["b"], dens["n"], pad)
    spatial = fbm_energy_spatial(f, H)
    spectral = fbm_energy_spectral(f, H)
    rel = abs(spatial - spectral) / max(abs(spatial), np.finfo(float).tiny)
    limit = tol.get("rel_tol", DEFAULT_TOLERANCES["fbm-compare"])
    ok = rel <= limit
    d = {"hurst": H, "spatial": spatial, "spectral": spectral, "rel_diff": rel, "pass": ok}
    return Result(list(d), [list(d.values())], d,
                  f"fbm-compare H={H} rel_diff={rel:.3g} {'pass' if ok else 'FAIL'}", ok)


def cmd_gaussian_check(spec, payload, tol, seed):
    norms = payload.get("norms", list(verify.GAUSSIAN_NORMS))
    order = int(payload.get("gh_order", 40))
    N = int(payload.get("truncation_order", 60))
    kernel = KernelSpec.bessel(N)
    limit = tol.get("rel_tol", DEFAULT_TOLERANCES["gaussian-check"])
    rows, cells, worst = [], [], 0.0
    for a in norms:
        for b in norms:
            closed = bessel_pairing_closed_form(a, b, N)
            quad = measure_pair(kernel, gaussian_measure(a, order), gaussian_measure(b, order),
                                detect_infinite=False).value
            rel = abs(closed - quad) / abs(closed)
            worst = max(worst, rel)
            rows.append([a, b, closed, quad, rel])
            cells.append({"h1": a, "h2": b, "closed_form": closed, "quadrature": quad, "rel_err": rel})
    ok = worst <= limit
    return Result(["h1", "h2", "closed_form", "quadrature", "rel_err"], rows,
                  {"cells": cells, "worst_rel_err": worst, "pass": ok},
                  f"gaussian-check {len(rows)} cells worst_rel_err={worst:.3g} {'pass' if ok else 'FAIL'}", ok)


def cmd_isometry_check(spec, payload, tol, seed):
    rv = DiscreteRandomVariable(payload["probabilities"], payload["values"], spec.domain_dim)
    rep = isometry_check(spec, rv)
    limit = tol.get("gap_tol", DEFAULT_TOLERANCES["isometry-check"])
    ok = rep.gap <= limit
    d = dict(rep.to_dict(), **{"pass": ok})
    return Result(list(d), [list(d.values())], d,
                  f"isometry-check gap={rep.gap:.3g} {'pass' if ok else 'FAIL'}", ok)


HANDLERS = {
    "gram": cmd_gram,
    "interp": cmd_interp,
    "norm-trace": cmd_norm_trace,
    "membership": cmd_membership,
    "metric": cmd_metric,
    "pair": cmd_pair,
    "embed": cmd_embed,
    "distance": cmd_distance,
    "verify-suite": cmd_verify_suite,
    "fbm-compare": cmd_fbm_compare,
    "gaussian-check": cmd_gaussian_check,
    "isometry-check": cmd_isometry_check,
}


def validate_config(config: dict, command: str) -> None:
    try:
        jsonschema.validate(config, CONFIG_SCHEMA)
        jsonschema.validate(config.get("payload", {}), PAYLOAD_SCHEMAS[command])
    except jsonschema.ValidationError as e:
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise UsageError(f"config invalid at {where}: {e.message}") from None
    if config.get("command", command) != command:
        raise UsageError(f"config command {config['command']!r} does not match {command!r}")
    if command not in KERNEL_FREE and "kernel" not in config:
        raise UsageError(f"command {command!r} needs a kernel")


def run_job(config: dict, command: str, seed: int | None = None) -> tuple[Result, str]:
    """Validate and execute one job, returning the result and its output format."""
    validate_config(config, command)
    spec = KernelSpec.from_dict(config["kernel"]) if "kernel" in config else None
    if seed is None:
        seed = int(config.get("seed", 0))
    fmt = config.get("output", {}).get("format", "csv")
    res = HANDLERS[command](spec, config.get("payload", {}), config.get("tolerances", {}), seed)
    return res, fmt


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _seed(text: str) -> int:
    v = int(text)
    if not 0 <= v <= U64_MAX:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rkhsbuild", description="Construct and check reproducing kernel Hilbert spaces")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="path to the JSON job description")
    p.add_argument("--output", help="artifact path (overrides output.path; stdout if neither)")
    p.add_argument("--seed", type=_seed, help="u64 seed (overrides the config seed)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = json.loads(Path(args.config).read_text())
        if not isinstance(config, dict):
            raise UsageError("config must be a JSON object")
        result, fmt = run_job(config, args.command, args.seed)
        text = result.render(fmt)
        out = args.output or config.get("output", {}).get("path")
        if out:
            Path(out).write_text(text)
        else:
            sys.stdout.write(text)
    except (UsageError, RkhsError, ValueError, TypeError, OSError, OverflowError, KeyError) as e:
        print(f"rkhsbuild {args.command}: error: {e}", file=sys.stderr)
        return EXIT_ERROR
    print(f"rkhsbuild {result.summary}", file=sys.stderr)
    return EXIT_OK if result.ok else EXIT_VERDICT


if __name__ == "__main__":
    sys.exit(main())
