"""Pushforward laws of discrete random variables, and Lipschitz/Hausdorff bounds."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import KernelDomainError
from .gram import PointSet
from .kernels import as_points, dk_metric
from .measures import SignedMeasure, equivalence_gap, pairing_value
from .projection import RkhsFunction

WITNESS_NORM_SLACK = 1e-9
BOUND_SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class DiscreteRandomVariable:
    """A map ``X`` from a finite probability space ``{0..m-1}`` into the domain."""

    probabilities: np.ndarray
    values: np.ndarray

    def __init__(self, probabilities, values, dim=None):
        p = np.asarray(probabilities, dtype=np.float64).reshape(-1)
        v = as_points(values, dim)
        if p.shape[0] != v.shape[0] or p.size == 0:
            raise ValueError("probabilities and values must be nonempty and of equal length")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("probabilities must be nonnegative and sum to 1")
        object.__setattr__(self, "probabilities", p)
        object.__setattr__(self, "values", v)

    @property
    def omega_size(self) -> int:
        return self.probabilities.size

    @classmethod
    def random(cls, rng: np.random.Generator, m: int, low: float, high: float) -> "DiscreteRandomVariable":
        """Random law on ``m`` outcomes; values drawn from a small lattice so repeats occur."""
        p = rng.dirichlet(np.ones(m))
        p /= p.sum()
        lattice = np.linspace(low, high, max(2, m))
        return cls(p, rng.choice(lattice, size=m))


def pushforward(rv: DiscreteRandomVariable) -> SignedMeasure:
    """``P o X^{-1}``: one atom per distinct value, carrying its preimage mass.

    Atoms merge on exact coordinate equality only and keep first-occurrence order.
    """
    order: dict[tuple, int] = {}
    pts, wts = [], []
    for p, v in zip(rv.probabilities, rv.values):
        key = tuple(v)
        if key in order:
            wts[order[key]] += p
        else:
            order[key] = len(pts)
            pts.append(v)
            wts.append(float(p))
    return SignedMeasure.atomic(np.array(pts), np.array(wts))


@dataclass(frozen=True)
class IsometryReport:
    lhs: float
    rhs: float
    gap: float

    def to_dict(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "gap": self.gap}


def isometry_check(spec, rv: DiscreteRandomVariable) -> IsometryReport:
    """Compare the double sum over outcomes with the pairing of the pushforward law."""
    K = spec.cross(rv.values, rv.values)
    p = rv.probabilities
    lhs = float(p @ K @ p)
    rhs = pairing_value(spec, pushforward(rv), pushforward(rv))
    return IsometryReport(lhs, rhs, abs(lhs - rhs))


def rkhs_distance(spec, mu: SignedMeasure, nu: SignedMeasure) -> float:
    """``||T_k mu - T_k nu||`` from ``<mu,mu> - 2<mu,nu> + <nu,nu>``."""
    gap, _, _ = equivalence_gap(spec, mu, nu)
    return math.sqrt(max(gap, 0.0))


@dataclass(frozen=True)
class LipschitzReport:
    max_ratio: float
    bound: float
    passed: bool

    def to_dict(self) -> dict:
        return {"max_ratio": self.max_ratio, "bound": self.bound, "pass": self.passed}


def lipschitz_certificate(spec, f: RkhsFunction, probe_pairs: Sequence) -> LipschitzReport:
    """Largest ``|f(t) - f(s)| / d_k(t, s)`` over the probes against ``||f||_k``."""
    best = 0.0
    for t, s in probe_pairs:
        d = dk_metric(spec, t, s)
        if d <= 0.0:
            raise KernelDomainError(f"probe pair ({t}, {s}) has zero d_k distance")
        vals = f.values(np.vstack([as_points(t, spec.domain_dim), as_points(s, spec.domain_dim)]))
        best = max(best, abs(vals[0] - vals[1]) / d)
    bound = f.norm()
    return LipschitzReport(best, bound, best <= bound + 1e-9)


@dataclass(frozen=True)
class HausdorffReport:
    best_witness_gap: float
    rkhs_dist: float
    passed: bool

    def to_dict(self) -> dict:
        return {"best_witness_gap": self.best_witness_gap, "rkhs_dist": self.rkhs_dist, "pass": self.passed}


def witness_gap(f: RkhsFunction, mu: SignedMeasure, nu: SignedMeasure) -> float:
    return abs(mu.integrate(f) - nu.integrate(f))


def hausdorff_lower_bound(spec, mu: SignedMeasure, nu: SignedMeasure, witnesses: Sequence[RkhsFunction]) -> HausdorffReport:
    """Certified lower bound on the Lipschitz-dual distance versus the RKHS distance.

    Each witness must lie in the unit ball of the RKHS (so it is 1-Lipschitz
    for ``d_k``); the bound holds when no witness separates ``mu`` and ``nu``
    by more than their RKHS distance.
    """
    best = 0.0
    for f in witnesses:
        if f.norm() > 1.0 + WITNESS_NORM_SLACK:
            raise ValueError(f"witness norm {f.norm():.12g} exceeds 1")
        best = max(best, witness_gap(f, mu, nu))
    dist = rkhs_distance(spec, mu, nu)
    return HausdorffReport(best, dist, best <= dist + BOUND_SLACK)


def matched_witness(spec, mu: SignedMeasure, nu: SignedMeasure) -> RkhsFunction:
    """``(T_k mu - T_k nu) / ||T_k mu - T_k nu||`` for atomic ``mu`` and ``nu``."""
    if mu.form != "atomic" or nu.form != "atomic":
        raise ValueError("the matched witness is a finite expansion only for atomic measures")
    dist = rkhs_distance(spec, mu, nu)
    if dist == 0.0:
        raise ValueError("measures are equivalent; no separating witness")
    support = PointSet(np.vstack([mu.points, nu.points]))
    coeffs = np.concatenate([mu.weights, -nu.weights]) / dist
    return RkhsFunction(spec, support, coeffs)


def random_unit_witness(spec, rng: np.random.Generator, low: float, high: float, size: int = 5) -> RkhsFunction:
    """A random kernel expansion on a random support, scaled to norm at most one."""
    pts = PointSet(rng.uniform(low, high, size=(size, spec.domain_dim)))
    f = RkhsFunction(spec, pts, rng.normal(size=size))
    n = f.norm()
    if n == 0.0:
        return f
    # half the draws sit on the unit sphere, the rest strictly inside;
    # the 1e-12 shrink keeps rounding from pushing the norm past one
    radius = 1.0 if rng.uniform() < 0.5 else rng.uniform(0.2, 1.0)
    return f.scaled(radius * (1.0 - 1e-12) / n)
