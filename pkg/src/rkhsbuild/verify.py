"""Randomized invariant battery behind the ``verify-suite`` command.

Each check draws from a generator seeded by the caller and returns a
:class:`CheckResult` with the worst observed violation measure and the
tolerance it was held to.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .applications import (
    DiscreteRandomVariable,
    hausdorff_lower_bound,
    isometry_check,
    matched_witness,
    random_unit_witness,
    rkhs_distance,
)
from .fbm import DensityOnGrid, fbm_energy_spatial, fbm_energy_spectral
from .gaussian import GaussianMeasureSpec, bessel_pairing_closed_form
from .gram import PointSet, build_gram, pinv_apply
from .kernels import KernelSpec, dk_metric, dk_matrix
from .measures import SignedMeasure, delta_span_residual, pairing_value, uniform_measure, measure_pair
from .projection import (
    FunctionSource,
    RkhsFunction,
    constant_function,
    dyadic_chain,
    norm_sup_estimate,
    qf_project,
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    worst: float
    tolerance: float
    seconds: float = 0.0
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "worst": self.worst,
            "tolerance": self.tolerance,
            "detail": self.detail,
        }


# generators


def separated_points(rng, n, lo, hi, min_sep, max_tries: int = 100_000):
    """``n`` uniform draws from ``[lo, hi]`` at pairwise distance at least ``min_sep``."""
    pts: list[float] = []
    for _ in range(max_tries):
        if len(pts) == n:
            break
        x = rng.uniform(lo, hi)
        if all(abs(x - p) >= min_sep for p in pts):
            pts.append(x)
    else:
        raise RuntimeError(f"could not place {n} points {min_sep} apart in [{lo}, {hi}]")
    return np.array(pts)


# (spec, low, high, max |F|, min separation): sampling boxes whose Gram
# condition numbers stay below ~2e5. Re-solving rounded values drifts by
# about kappa * eps, so this is what a 1e-10 idempotence bound needs.
PROJECTION_FAMILIES = (
    (KernelSpec.brownian(), 0.05, 10.0, 30, 0.05),
    (KernelSpec.rbf(0.5), 0.0, 20.0, 30, 0.3),
    (KernelSpec.bessel(), -2.0, 2.0, 5, 0.4),
)

FINITE_DIAGONAL_FAMILIES = (
    (KernelSpec.brownian(), 0.0, 5.0),
    (KernelSpec.bessel(), -2.0, 2.0),
    (KernelSpec.rbf(1.0), -3.0, 3.0),
)


def random_smooth_function(rng) -> FunctionSource:
    a, b, c, d = rng.normal(size=4)
    return FunctionSource(lambda X: np.sin(a * X[:, 0] + b) + c * X[:, 0] + d * np.cos(X[:, 0]), vectorized=True)


def random_atomic(rng, lo, hi, max_atoms=6) -> SignedMeasure:
    n = int(rng.integers(1, max_atoms + 1))
    return SignedMeasure.atomic(rng.uniform(lo, hi, n), rng.normal(size=n))


def _timed(fn: Callable[[], CheckResult]) -> CheckResult:
    t0 = time.perf_counter()
    res = fn()
    return CheckResult(res.name, res.passed, res.worst, res.tolerance, time.perf_counter() - t0, res.detail)


# checks


def check_brownian_metric(rng=None, n_pairs: int = 100, tol: float = 1e-12) -> CheckResult:
    spec = KernelSpec.brownian()
    side = int(math.isqrt(n_pairs))
    grid = np.linspace(0.0, 10.0, side)
    worst = 0.0
    for t in grid:
        for s in grid:
            worst = max(worst, abs(dk_metric(spec, t, s) ** 2 - abs(t - s)))
    return CheckResult("brownian_metric_identity", worst <= tol, worst, tol)


def check_metric_axioms(rng, n: int = 60, slack: float = 1e-12) -> CheckResult:
    worst = 0.0
    for spec, lo, hi in FINITE_DIAGONAL_FAMILIES:
        X = rng.uniform(lo, hi, n)
        D = dk_matrix(spec, X)
        K = spec.cross(X, X)
        asym = np.max(np.abs(K - K.T))
        tri = np.max(D[:, :, None] - D[:, None, :] - D[None, :, :].transpose(0, 2, 1))
        diag_k = np.sqrt(np.diag(K))
        cont = np.max(np.abs(diag_k[:, None] - diag_k[None, :]) - D)
        worst = max(worst, asym, tri, cont, float(np.max(np.abs(np.diag(D)))))
    return CheckResult("metric_axioms", worst <= slack, worst, slack)


def check_projection_laws(rng, n_triples: int = 200, n_probes: int = 50) -> CheckResult:
    worst_interp = worst_idem = worst_nest = 0.0
    for i in range(n_triples):
        spec, lo, hi, nmax, sep = PROJECTION_FAMILIES[i % len(PROJECTION_FAMILIES)]
        m = int(rng.integers(2, nmax + 1))
        pts = separated_points(rng, m, lo, hi, sep)
        F2 = PointSet(pts)
        F1 = PointSet(pts[: int(rng.integers(1, m))])
        f = random_smooth_function(rng)
        q2 = qf_project(spec, F2, f)
        vals = f.values(F2.points)
        worst_interp = max(worst_interp, float(np.max(np.abs(q2.values(F2.points) - vals))))
        qq = qf_project(spec, F2, q2)
        worst_idem = max(worst_idem, float(np.max(np.abs(qq.coeffs - q2.coeffs)) / max(1.0, np.max(np.abs(q2.coeffs)))))
        probes = rng.uniform(lo, hi, n_probes)
        if spec.kind == "brownian_min":
            probes = np.abs(probes)
        q1 = qf_project(spec, F1, f)
        q12 = qf_project(spec, F1, q2)
        q21 = qf_project(spec, F2, q1)
        ref = q1.values(probes)
        scale = max(1.0, float(np.max(np.abs(ref))))
        worst_nest = max(
            worst_nest,
            float(np.max(np.abs(q12.values(probes) - ref))) / scale,
            float(np.max(np.abs(q21.values(probes) - ref))) / scale,
        )
    ok = worst_interp <= 1e-8 and worst_idem <= 1e-10 and worst_nest <= 1e-9
    detail = f"interp={worst_interp:.3g} idem={worst_idem:.3g} nest={worst_nest:.3g}"
    return CheckResult("projection_laws", ok, max(worst_interp, worst_idem, worst_nest), 1e-8, detail=detail)


def random_nested_chain(rng, spec, lo, hi, nmax, sep, depth: int = 8) -> list[PointSet]:
    total = separated_points(rng, nmax, lo, hi, sep)
    cuts = np.sort(rng.choice(np.arange(1, nmax + 1), size=depth, replace=nmax < depth))
    return [PointSet(total[:c]) for c in cuts]


def check_norm_monotonicity(rng, n_chains: int = 20, depth: int = 8, slack: float = 1e-10) -> CheckResult:
    worst = 0.0
    for i in range(n_chains):
        spec, lo, hi, nmax, sep = PROJECTION_FAMILIES[i % len(PROJECTION_FAMILIES)]
        chain = random_nested_chain(rng, spec, lo, hi, max(nmax, depth) if spec.kind != "bessel_series" else nmax, sep, depth)
        trace = norm_sup_estimate(spec, chain, random_smooth_function(rng))
        n = trace.norms
        drops = -(np.diff(n)) / np.maximum(1.0, np.abs(n[1:]))
        worst = max(worst, float(np.max(drops, initial=0.0)))
    return CheckResult("norm_monotonicity", worst <= slack, worst, slack)


def check_membership(rng=None, tol: float = 1e-8) -> CheckResult:
    spec = KernelSpec.brownian()
    chain = dyadic_chain(0.0, 1.0, 9)
    s_star = 0.5
    chain_in = [PointSet(np.union1d([s_star], F.points[:, 0])) for F in chain]
    t_in = norm_sup_estimate(spec, chain_in, RkhsFunction.section(spec, s_star))
    t_one = norm_sup_estimate(spec, chain, constant_function(1.0))
    err = abs(t_in.sup_estimate - s_star)
    ok = t_in.verdict == "bounded" and err <= tol and t_one.verdict == "diverging"
    detail = f"section={t_in.verdict} err={err:.3g}; constant={t_one.verdict} slope={t_one.slope}"
    return CheckResult("membership_discrimination", ok, err, tol, detail=detail)


GAUSSIAN_NORMS = (0.5, 1.0, math.sqrt(2.0), 2.0)


def check_gaussian_closed_form(rng=None, tol: float = 1e-6, gh_order: int = 40, truncation_order: int = 60) -> CheckResult:
    spec = KernelSpec.bessel(truncation_order)
    worst = 0.0
    for a in GAUSSIAN_NORMS:
        mu_a = GaussianMeasureSpec(a, gh_order).materialize()
        for b in GAUSSIAN_NORMS:
            mu_b = GaussianMeasureSpec(b, gh_order).materialize()
            closed = bessel_pairing_closed_form(a, b, truncation_order)
            quad = pairing_value(spec, mu_a, mu_b)
            worst = max(worst, abs(closed - quad) / abs(closed))
    return CheckResult("gaussian_closed_form", worst <= tol, worst, tol)


def gaussian_bump(n: int = 2048, half_width: float = 8.0, padding: int = 8) -> DensityOnGrid:
    return DensityOnGrid.from_function(
        lambda t: np.exp(-0.5 * t * t) / math.sqrt(2.0 * math.pi), -half_width, half_width, n, padding
    )


def check_fbm_agreement(rng=None, tol: float = 1e-2, indicator_tol: float = 1e-3) -> CheckResult:
    bump = gaussian_bump()
    worst = 0.0
    for H in (0.6, 0.75, 0.9):
        sp = fbm_energy_spatial(bump, H)
        worst = max(worst, abs(sp - fbm_energy_spectral(bump, H)) / sp)
    ind = DensityOnGrid.from_function(np.ones_like, 0.0, 1.0, 2048)
    ind_err = abs(fbm_energy_spatial(ind, 0.75) - 8.0 / 3.0)
    ok = worst <= tol and ind_err <= indicator_tol
    return CheckResult("fbm_spatial_spectral", ok, worst, tol, detail=f"indicator_err={ind_err:.3g}")


def check_isometry(rng, n_draws: int = 200, max_m: int = 20, tol: float = 1e-12) -> CheckResult:
    kernels = ((KernelSpec.brownian(), 0.0, 3.0), (KernelSpec.bessel(), -1.5, 1.5), (KernelSpec.rbf(1.0), -3.0, 3.0))
    worst = 0.0
    for i in range(n_draws):
        spec, lo, hi = kernels[i % len(kernels)]
        rv = DiscreteRandomVariable.random(rng, int(rng.integers(1, max_m + 1)), lo, hi)
        worst = max(worst, isometry_check(spec, rv).gap)
    return CheckResult("pushforward_isometry", worst <= tol, worst, tol)


def check_hausdorff(rng, n_draws: int = 500, slack: float = 1e-9) -> CheckResult:
    worst_excess = -math.inf
    worst_eq = 0.0
    for i in range(n_draws):
        spec, lo, hi = FINITE_DIAGONAL_FAMILIES[i % len(FINITE_DIAGONAL_FAMILIES)]
        if i % 2 == 0:
            spec, lo, hi = KernelSpec.rbf(1.0), -3.0, 3.0
        mu = random_atomic(rng, lo, hi)
        nu = random_atomic(rng, lo, hi)
        w = random_unit_witness(spec, rng, lo, hi, int(rng.integers(1, 8)))
        rep = hausdorff_lower_bound(spec, mu, nu, [w])
        worst_excess = max(worst_excess, rep.best_witness_gap - rep.rkhs_dist)
        if rep.rkhs_dist > 1e-6:
            m = matched_witness(spec, mu, nu)
            eq = hausdorff_lower_bound(spec, mu, nu, [m])
            worst_eq = max(worst_eq, abs(eq.best_witness_gap - eq.rkhs_dist))
    ok = worst_excess <= slack and worst_eq <= slack
    return CheckResult(
        "hausdorff_bound", ok, max(worst_excess, worst_eq), slack,
        detail=f"max_excess={worst_excess:.3g} equality_err={worst_eq:.3g}",
    )


def check_cauchy_schwarz(rng, n_pairs: int = 500, tol: float = 1e-10) -> CheckResult:
    worst_cs = worst_bil = 0.0
    for i in range(n_pairs):
        spec, lo, hi = FINITE_DIAGONAL_FAMILIES[i % len(FINITE_DIAGONAL_FAMILIES)]
        xi, eta, xi2 = (random_atomic(rng, lo, hi) for _ in range(3))
        xx, ee, xe = pairing_value(spec, xi, xi), pairing_value(spec, eta, eta), pairing_value(spec, xi, eta)
        worst_cs = max(worst_cs, xe * xe - xx * ee)
        a, b = rng.normal(size=2)
        lhs = pairing_value(spec, a * xi + b * xi2, eta)
        rhs = a * xe + b * pairing_value(spec, xi2, eta)
        scale = max(1.0, abs(a * xe), abs(b * pairing_value(spec, xi2, eta)))
        worst_bil = max(worst_bil, abs(lhs - rhs) / scale)
    ok = worst_cs <= tol and worst_bil <= tol
    return CheckResult(
        "cauchy_schwarz_bilinearity", ok, max(worst_cs, worst_bil), tol,
        detail=f"cs_excess={worst_cs:.3g} bilinear={worst_bil:.3g}",
    )


def check_delta_span(rng=None, max_level: int = 6, tol: float = 1e-3) -> CheckResult:
    spec = KernelSpec.brownian()
    mu = uniform_measure(0.0, 1.0, 201)
    res = [delta_span_residual(spec, mu, F) for F in dyadic_chain(0.0, 1.0, max_level)]
    strictly = all(b < a for a, b in zip(res, res[1:]))
    ok = strictly and res[-1] <= tol
    return CheckResult("delta_span_density", ok, res[-1], tol, detail=f"strictly_decreasing={strictly}")


def penrose_errors(G):
    """Relative residuals ``||KPK - K|| / ||K||`` and ``||PKP - P|| / ||P||``."""
    K = G.matrix
    P = pinv_apply(G, np.eye(G.size))
    e1 = np.linalg.norm(K @ P @ K - K, 2) / np.linalg.norm(K, 2)
    e2 = np.linalg.norm(P @ K @ P - P, 2) / np.linalg.norm(P, 2)
    return float(e1), float(e2)


def check_penrose(rng, n_mats: int = 30, tol: float = 1e-11) -> CheckResult:
    worst = 0.0
    for i in range(n_mats):
        spec, lo, hi = FINITE_DIAGONAL_FAMILIES[i % len(FINITE_DIAGONAL_FAMILIES)]
        pts = separated_points(rng, int(rng.integers(2, 6)), lo, hi, 0.5)
        # duplicated points force the pseudo-inverse path
        if i % 2:
            pts = np.concatenate([pts, pts[: max(1, len(pts) // 2)]])
        worst = max(worst, *penrose_errors(build_gram(spec, pts)))
    return CheckResult("penrose_identities", worst <= tol, worst, tol)


def check_measure_quadrature(rng=None, tol: float = 1e-4) -> CheckResult:
    spec = KernelSpec.brownian()
    mu = uniform_measure(0.0, 1.0, 201)
    err = abs(measure_pair(spec, mu, mu).value - 1.0 / 3.0)
    return CheckResult("uniform_pairing_quadrature", err <= tol, err, tol)


CHECKS = {
    "brownian_metric_identity": check_brownian_metric,
    "metric_axioms": check_metric_axioms,
    "penrose_identities": check_penrose,
    "projection_laws": check_projection_laws,
    "norm_monotonicity": check_norm_monotonicity,
    "membership_discrimination": check_membership,
    "gaussian_closed_form": check_gaussian_closed_form,
    "fbm_spatial_spectral": check_fbm_agreement,
    "pushforward_isometry": check_isometry,
    "hausdorff_bound": check_hausdorff,
    "cauchy_schwarz_bilinearity": check_cauchy_schwarz,
    "delta_span_density": check_delta_span,
    "uniform_pairing_quadrature": check_measure_quadrature,
}


def run_suite(seed: int = 0, names=None) -> list[CheckResult]:
    """Run the named checks (all by default), each on its own child stream of ``seed``."""
    names = list(CHECKS) if names is None else list(names)
    unknown = set(names) - set(CHECKS)
    if unknown:
        raise KeyError(f"unknown checks: {sorted(unknown)}")
    streams = np.random.SeedSequence(seed).spawn(len(CHECKS))
    by_name = dict(zip(CHECKS, streams))
    out = []
    for name in names:
        rng = np.random.default_rng(by_name[name])
        out.append(_timed(lambda: CHECKS[name](rng)))
    return out
