"""Acceptance gate: one PASS/FAIL line per criterion, with its tolerance and time budget.

Run ``pytest tests/test_acceptance.py -v``; the result lines are written
straight to the terminal.
"""
import math
import time

import numpy as np
import pytest
from scipy.special import i0

from rkhsbuild import KernelSpec, SignedMeasure
from rkhsbuild.applications import (
    DiscreteRandomVariable,
    hausdorff_lower_bound,
    isometry_check,
    matched_witness,
    random_unit_witness,
)
from rkhsbuild.fbm import DensityOnGrid, fbm_energy_spatial, fbm_energy_spectral
from rkhsbuild.gaussian import bessel_pairing_closed_form
from rkhsbuild.gram import PointSet
from rkhsbuild.kernels import dk_metric
from rkhsbuild.measures import delta_span_residual, gaussian_measure, pairing_value, uniform_measure
from rkhsbuild.projection import RkhsFunction, constant_function, dyadic_chain, norm_sup_estimate, qf_project
from rkhsbuild.verify import (
    FINITE_DIAGONAL_FAMILIES,
    PROJECTION_FAMILIES,
    gaussian_bump,
    random_atomic,
    random_nested_chain,
    random_smooth_function,
    separated_points,
)

SEED = 20240611


@pytest.fixture
def gate(capsys):
    def report(number, name, ok, elapsed, budget, detail):
        passed = bool(ok) and elapsed < budget
        with capsys.disabled():
            print(f"\nACCEPTANCE {number:02d} {name}: {'PASS' if passed else 'FAIL'} "
                  f"({detail}; {elapsed:.2f}s of {budget:g}s)")
        assert ok, detail
        assert elapsed < budget, f"took {elapsed:.2f}s, budget {budget}s"
    return report


def test_01_brownian_metric(gate):
    rng = np.random.default_rng(SEED)
    t0 = time.perf_counter()
    spec = KernelSpec.brownian()
    pairs = rng.uniform(0.0, 10.0, size=(100, 2))
    worst = max(abs(dk_metric(spec, t, s) ** 2 - abs(t - s)) for t, s in pairs)
    elapsed = time.perf_counter() - t0
    gate(1, "brownian d_k^2 = |t - s|", worst <= 1e-12, elapsed, 1.0, f"max err {worst:.3g} <= 1e-12")


def test_02_projection_laws(gate):
    rng = np.random.default_rng(SEED + 2)
    t0 = time.perf_counter()
    interp = idem = nest = 0.0
    largest = 0
    for i in range(200):
        spec, lo, hi, nmax, sep = PROJECTION_FAMILIES[i % len(PROJECTION_FAMILIES)]
        m = int(rng.integers(2, min(nmax, 30) + 1))
        pts = separated_points(rng, m, lo, hi, sep)
        F2, F1 = PointSet(pts), PointSet(pts[: int(rng.integers(1, m))])
        largest = max(largest, m)
        f = random_smooth_function(rng)
        q2 = qf_project(spec, F2, f)
        interp = max(interp, float(np.max(np.abs(q2.values(F2.points) - f.values(F2.points)))))
        qq = qf_project(spec, F2, q2)
        idem = max(idem, float(np.max(np.abs(qq.coeffs - q2.coeffs))) / max(1.0, float(np.max(np.abs(q2.coeffs)))))
        probes = rng.uniform(max(lo, 0.0) if spec.kind == "brownian_min" else lo, hi, 50)
        q1 = qf_project(spec, F1, f)
        ref = q1.values(probes)
        scale = max(1.0, float(np.max(np.abs(ref))))
        for g in (qf_project(spec, F1, q2), qf_project(spec, F2, q1)):
            nest = max(nest, float(np.max(np.abs(g.values(probes) - ref))) / scale)
    elapsed = time.perf_counter() - t0
    ok = interp <= 1e-8 and idem <= 1e-10 and nest <= 1e-9 and largest <= 30
    gate(2, "projection interpolation/idempotence/nesting", ok, elapsed, 10.0,
         f"interp {interp:.3g} <= 1e-8, idem {idem:.3g} <= 1e-10, nest {nest:.3g} <= 1e-9, |F| <= {largest}")


def test_03_norm_monotonicity(gate):
    rng = np.random.default_rng(SEED + 3)
    t0 = time.perf_counter()
    worst = 0.0
    for i in range(20):
        spec, lo, hi, nmax, sep = PROJECTION_FAMILIES[i % len(PROJECTION_FAMILIES)]
        chain = random_nested_chain(rng, spec, lo, hi, nmax, sep, depth=8)
        assert len(chain) == 8
        norms = norm_sup_estimate(spec, chain, random_smooth_function(rng)).norms
        worst = max(worst, float(np.max(-np.diff(norms) / np.maximum(1.0, np.abs(norms[1:])), initial=0.0)))
    elapsed = time.perf_counter() - t0
    gate(3, "nested norms nondecreasing", worst <= 1e-10, elapsed, 10.0, f"max drop {worst:.3g} <= 1e-10")


def test_04_membership_discrimination(gate):
    t0 = time.perf_counter()
    spec = KernelSpec.brownian()
    s_star = 0.5
    chain = dyadic_chain(0.0, 1.0, 9)
    assert len(chain[-1]) == 512
    with_s = [PointSet(np.union1d([s_star], F.points[:, 0])) for F in chain]
    inside = norm_sup_estimate(spec, with_s, RkhsFunction.section(spec, s_star))
    outside = norm_sup_estimate(spec, chain, constant_function(1.0))
    elapsed = time.perf_counter() - t0
    err = abs(inside.sup_estimate - spec.diag([s_star])[0])
    ok = inside.verdict == "bounded" and err <= 1e-8 and outside.verdict == "diverging"
    gate(4, "membership bounded vs diverging", ok, elapsed, 30.0,
         f"section {inside.verdict} sup err {err:.3g} <= 1e-8; constant {outside.verdict}")


def test_05_gaussian_closed_form(gate):
    t0 = time.perf_counter()
    norms = (0.5, 1.0, math.sqrt(2.0), 2.0)
    spec = KernelSpec.bessel(60)
    worst = worst_oracle = 0.0
    for a in norms:
        for b in norms:
            closed = bessel_pairing_closed_form(a, b, 60)
            quad = pairing_value(spec, gaussian_measure(a, 40), gaussian_measure(b, 40))
            worst = max(worst, abs(closed - quad) / closed)
            worst_oracle = max(worst_oracle, abs(closed - i0(a * b)) / i0(a * b))
    elapsed = time.perf_counter() - t0
    gate(5, "gaussian closed form vs quadrature", worst <= 1e-6 and worst_oracle <= 1e-12, elapsed, 5.0,
         f"max rel err {worst:.3g} <= 1e-6, vs I0(ab) {worst_oracle:.3g}")


def test_06_fbm_spatial_spectral(gate):
    t0 = time.perf_counter()
    bump = gaussian_bump(n=2048, padding=8)
    worst = 0.0
    for H in (0.6, 0.75, 0.9):
        sp = fbm_energy_spatial(bump, H)
        worst = max(worst, abs(sp - fbm_energy_spectral(bump, H)) / sp)
    indicator = DensityOnGrid.from_function(np.ones_like, 0.0, 1.0, 2048, 8)
    ind_err = abs(fbm_energy_spatial(indicator, 0.75) - 8.0 / 3.0)
    elapsed = time.perf_counter() - t0
    gate(6, "fbm spatial vs spectral", worst <= 1e-2 and ind_err <= 1e-3, elapsed, 20.0,
         f"max rel diff {worst:.3g} <= 1e-2; indicator err {ind_err:.3g} <= 1e-3")


def test_07_pushforward_isometry(gate):
    rng = np.random.default_rng(SEED + 7)
    t0 = time.perf_counter()
    kernels = ((KernelSpec.brownian(), 0.0, 3.0), (KernelSpec.bessel(), -1.5, 1.5), (KernelSpec.rbf(1.0), -3.0, 3.0))
    worst = 0.0
    for i in range(200):
        spec, lo, hi = kernels[i % 3]
        rv = DiscreteRandomVariable.random(rng, int(rng.integers(1, 21)), lo, hi)
        worst = max(worst, isometry_check(spec, rv).gap)
    elapsed = time.perf_counter() - t0
    gate(7, "pushforward isometry", worst <= 1e-12, elapsed, 5.0, f"max gap {worst:.3g} <= 1e-12")


def test_08_hausdorff_bound(gate):
    rng = np.random.default_rng(SEED + 8)
    t0 = time.perf_counter()
    violations, worst_eq = 0, 0.0
    for i in range(500):
        spec, lo, hi = (KernelSpec.rbf(1.0), -3.0, 3.0) if i % 2 == 0 else FINITE_DIAGONAL_FAMILIES[i % 3]
        mu, nu = random_atomic(rng, lo, hi), random_atomic(rng, lo, hi)
        w = random_unit_witness(spec, rng, lo, hi, int(rng.integers(1, 8)))
        rep = hausdorff_lower_bound(spec, mu, nu, [w])
        violations += rep.best_witness_gap > rep.rkhs_dist + 1e-9
        if rep.rkhs_dist > 1e-6:
            eq = hausdorff_lower_bound(spec, mu, nu, [matched_witness(spec, mu, nu)])
            worst_eq = max(worst_eq, abs(eq.best_witness_gap - eq.rkhs_dist))
    elapsed = time.perf_counter() - t0
    gate(8, "hausdorff lower bound", violations == 0 and worst_eq <= 1e-9, elapsed, 10.0,
         f"{violations} violations; matched witness err {worst_eq:.3g} <= 1e-9")


def test_09_cauchy_schwarz_bilinearity(gate):
    rng = np.random.default_rng(SEED + 9)
    t0 = time.perf_counter()
    worst_cs = worst_bil = 0.0
    for i in range(500):
        spec, lo, hi = FINITE_DIAGONAL_FAMILIES[i % 3]
        xi, eta, zeta = (random_atomic(rng, lo, hi) for _ in range(3))
        xe, ze = pairing_value(spec, xi, eta), pairing_value(spec, zeta, eta)
        worst_cs = max(worst_cs, xe * xe - pairing_value(spec, xi, xi) * pairing_value(spec, eta, eta))
        a, b = rng.normal(size=2)
        lhs = pairing_value(spec, a * xi + b * zeta, eta)
        worst_bil = max(worst_bil, abs(lhs - (a * xe + b * ze)) / max(1.0, abs(a * xe), abs(b * ze)))
    elapsed = time.perf_counter() - t0
    gate(9, "cauchy-schwarz and bilinearity", worst_cs <= 1e-10 and worst_bil <= 1e-10, elapsed, 5.0,
         f"cs excess {worst_cs:.3g}, bilinear err {worst_bil:.3g} <= 1e-10")


def test_10_delta_span_density(gate):
    t0 = time.perf_counter()
    spec = KernelSpec.brownian()
    mu = uniform_measure(0.0, 1.0, 201)
    res = [delta_span_residual(spec, mu, F) for F in dyadic_chain(0.0, 1.0, 6)]
    elapsed = time.perf_counter() - t0
    strictly = all(b < a for a, b in zip(res, res[1:]))
    gate(10, "delta-span residual", strictly and res[-1] <= 1e-3, elapsed, 5.0,
         f"strictly decreasing {strictly}; level-6 residual {res[-1]:.3g} <= 1e-3")
