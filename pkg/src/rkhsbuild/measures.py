"""Signed measures, the kernel pairing and the embedding ``T_k``.

A measure is either atomic (points with real weights of any sign) or a
density sampled on quadrature nodes. Both reduce to point masses for the
pairing ``<xi, eta>_k = sum_ij m_i k(t_i, s_j) n_j``, so the atomic case is
an exact double sum and the density case a tensor quadrature. Density
measures built by the constructors here also know how to rebuild themselves
at half resolution, which drives the quadrature error estimate and the
divergence detector.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionError, ZeroMeasureError
from .gram import as_pointset, build_gram, pinv_apply
from .kernels import as_points
from .projection import FunctionSource

RULES = ("trapezoid", "gauss_legendre", "gauss_hermite")


@dataclass(frozen=True, eq=False)
class SignedMeasure:
    form: str
    points: np.ndarray
    weights: np.ndarray
    quad_weights: np.ndarray | None = None
    rule: str | None = None
    coarsen: Callable | None = field(default=None, repr=False)

    def __post_init__(self):
        pts = as_points(self.points)
        w = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        if pts.shape[0] == 0:
            raise ValueError("a measure needs at least one point")
        if w.shape[0] != pts.shape[0]:
            raise DimensionError("points and weights differ in length")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)
        if self.form == "atomic":
            if self.quad_weights is not None or self.rule is not None:
                raise ValueError("atomic measures carry no quadrature rule")
        elif self.form == "grid_density":
            q = np.asarray(self.quad_weights, dtype=np.float64).reshape(-1)
            if q.shape[0] != pts.shape[0]:
                raise DimensionError("nodes and quadrature weights differ in length")
            if not np.all(q > 0) or not np.all(np.isfinite(q)):
                raise ValueError("quadrature weights must be positive and finite")
            if self.rule not in RULES:
                raise ValueError(f"unknown quadrature rule {self.rule!r}")
            object.__setattr__(self, "quad_weights", q)
        else:
            raise ValueError(f"unknown measure form {self.form!r}")

    # constructors

    @classmethod
    def atomic(cls, points, weights) -> "SignedMeasure":
        return cls("atomic", points, weights)

    @classmethod
    def dirac(cls, t, weight: float = 1.0) -> "SignedMeasure":
        return cls("atomic", as_points(t), [weight])

    @classmethod
    def grid(cls, nodes, density, quad_weights, rule: str = "trapezoid", coarsen=None) -> "SignedMeasure":
        nodes = as_points(nodes)
        if coarsen is None and rule == "trapezoid":
            coarsen = _subsample_trapezoid(nodes, np.asarray(density, dtype=np.float64))
        return cls("grid_density", nodes, density, quad_weights, rule, coarsen)

    # derived quantities

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def masses(self) -> np.ndarray:
        """Point masses seen by the quadrature: weights, or density times quadrature weights."""
        if self.form == "atomic":
            return self.weights
        return self.weights * self.quad_weights

    @property
    def density(self) -> np.ndarray | None:
        return None if self.form == "atomic" else self.weights

    def total_variation(self) -> float:
        return float(np.sum(np.abs(self.masses)))

    def total_mass(self) -> float:
        return float(np.sum(self.masses))

    def integrate(self, f) -> float:
        """``int f d(mu)`` for a callable, vectorized source or RKHS function."""
        if hasattr(f, "values"):
            vals = f.values(self.points)
        else:
            vals = FunctionSource(f, dim=self.dim).values(self.points)
        return float(vals @ self.masses)

    def moment(self, n: int) -> float:
        return float(self.masses @ self.points[:, 0] ** n)

    # linear structure

    def scaled(self, c: float) -> "SignedMeasure":
        if self.form == "atomic":
            return SignedMeasure.atomic(self.points, c * self.weights)
        coarse = None
        if self.coarsen is not None:
            base = self.coarsen

            def coarse():
                half = base()
                return None if half is None else half.scaled(c)

        return SignedMeasure("grid_density", self.points, c * self.weights, self.quad_weights, self.rule, coarse)

    def __mul__(self, c):
        return self.scaled(float(c))

    __rmul__ = __mul__

    def __neg__(self):
        return self.scaled(-1.0)

    def __add__(self, other: "SignedMeasure") -> "SignedMeasure":
        if self.form == "atomic" and other.form == "atomic":
            return SignedMeasure.atomic(
                np.vstack([self.points, other.points]), np.concatenate([self.weights, other.weights])
            )
        if (
            self.form == other.form == "grid_density"
            and self.rule == other.rule
            and self.points.shape == other.points.shape
            and np.array_equal(self.points, other.points)
            and np.array_equal(self.quad_weights, other.quad_weights)
        ):
            coarse = None
            if self.coarsen is not None and other.coarsen is not None:
                a, b = self.coarsen, other.coarsen

                def coarse():
                    ha, hb = a(), b()
                    return None if ha is None or hb is None else ha + hb

            return SignedMeasure(
                "grid_density", self.points, self.weights + other.weights, self.quad_weights, self.rule, coarse
            )
        raise TypeError("can only add two atomic measures or two densities on the same grid")

    def __sub__(self, other):
        return self + (-other)

    # serialization

    def to_dict(self) -> dict:
        if self.form == "atomic":
            return {"form": "atomic", "points": self.points.tolist(), "weights": self.weights.tolist()}
        return {
            "form": "grid_density",
            "nodes": self.points.tolist(),
            "density": self.weights.tolist(),
            "quad_weights": self.quad_weights.tolist(),
            "rule": self.rule,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SignedMeasure":
        form = data.get("form")
        if form == "atomic":
            _check_keys(data, {"form", "points", "weights"})
            return cls.atomic(data["points"], data["weights"])
        if form == "grid_density":
            _check_keys(data, {"form", "nodes", "density", "quad_weights", "rule"})
            return cls.grid(data["nodes"], data["density"], data["quad_weights"], data["rule"])
        raise ValueError(f"unknown measure form {form!r}")


def _check_keys(data, allowed):
    missing = allowed - set(data)
    unknown = set(data) - allowed
    if missing or unknown:
        raise ValueError(f"measure JSON: missing {sorted(missing)}, unknown {sorted(unknown)}")


def trapezoid_weights(nodes) -> np.ndarray:
    x = np.asarray(nodes, dtype=np.float64).reshape(-1)
    if x.size < 2 or np.any(np.diff(x) <= 0):
        raise ValueError("trapezoid nodes must be strictly increasing with at least two entries")
    h = np.diff(x)
    w = np.zeros_like(x)
    w[:-1] += 0.5 * h
    w[1:] += 0.5 * h
    return w


def _subsample_trapezoid(nodes, density):
    # half resolution for a user grid: every other node, odd node counts only
    if nodes.shape[1] != 1 or nodes.shape[0] < 5 or nodes.shape[0] % 2 == 0:
        return None
    x = nodes[:, 0]
    if np.any(np.diff(x) <= 0):
        return None

    def coarse():
        xs, ds = x[::2], density[::2]
        return SignedMeasure.grid(xs, ds, trapezoid_weights(xs), "trapezoid")

    return coarse


def density_on_trapezoid(f, a: float, b: float, n: int = 201) -> SignedMeasure:
    """Density ``f`` on ``n`` equispaced nodes of ``[a, b]`` with trapezoid weights."""
    x = np.linspace(a, b, n)
    dens = _eval_density(f, x)

    def coarse():
        return density_on_trapezoid(f, a, b, (n + 1) // 2) if n >= 5 else None

    return SignedMeasure("grid_density", x, dens, trapezoid_weights(x), "trapezoid", coarse)


def density_gauss_legendre(f, a: float, b: float, order: int = 64, panels: int = 1) -> SignedMeasure:
    """Density ``f`` on ``panels`` equal Gauss-Legendre panels of ``[a, b]``."""
    z, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    x = (mid[:, None] + half[:, None] * z[None, :]).reshape(-1)
    q = (half[:, None] * w[None, :]).reshape(-1)

    def coarse():
        return density_gauss_legendre(f, a, b, order // 2, panels) if order >= 4 else None

    return SignedMeasure("grid_density", x, _eval_density(f, x), q, "gauss_legendre", coarse)


def gaussian_measure(sigma: float, order: int = 40) -> SignedMeasure:
    """Centered normal law ``N(0, sigma**2)`` on rescaled Gauss-Hermite nodes.

    Nodes are ``sqrt(2) sigma z_i``; the density times the quadrature weight
    equals ``w_i / sqrt(pi)``, so the rule integrates polynomials up to
    degree ``2 * order - 1`` against the law exactly.
    """
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    z, w = np.polynomial.hermite.hermgauss(order)
    x = math.sqrt(2.0) * sigma * z
    dens = np.exp(-0.5 * (x / sigma) ** 2) / (math.sqrt(2.0 * math.pi) * sigma)
    q = w * np.exp(z * z) * math.sqrt(2.0) * sigma

    def coarse():
        return gaussian_measure(sigma, order // 2) if order >= 4 else None

    return SignedMeasure("grid_density", x, dens, q, "gauss_hermite", coarse)


def uniform_measure(a: float = 0.0, b: float = 1.0, n: int = 201) -> SignedMeasure:
    """Uniform probability on ``[a, b]`` with the trapezoid rule."""
    return density_on_trapezoid(lambda t: np.full_like(t, 1.0 / (b - a)), a, b, n)


def _eval_density(f, x):
    vals = np.asarray(f(x), dtype=np.float64)
    if vals.shape != x.shape:
        vals = np.array([float(f(float(t))) for t in x])
    return vals


@dataclass(frozen=True)
class PairingResult:
    value: float
    finiteness_flag: bool
    quadrature_error_estimate: float | None = None

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "finiteness_flag": self.finiteness_flag,
            "quadrature_error_estimate": self.quadrature_error_estimate,
        }


def _raw_pair(spec, xi: SignedMeasure, eta: SignedMeasure) -> float:
    K = spec.cross(xi.points, eta.points)
    return float(xi.masses @ (K @ eta.masses))


def _half(mu: SignedMeasure):
    if mu.form == "atomic":
        return mu
    return None if mu.coarsen is None else mu.coarsen()


def measure_pair(spec, xi: SignedMeasure, eta: SignedMeasure, detect_infinite: bool = True) -> PairingResult:
    """The pairing ``<xi, eta>_k``.

    For densities the error estimate is the change against the same pair at
    half resolution (``nan`` if a density cannot be coarsened). The pairing
    is declared infinite when the value at least doubles across two
    successive refinements.
    """
    if xi.dim != spec.domain_dim or eta.dim != spec.domain_dim:
        raise DimensionError("measure and kernel dimensions differ")
    value = _raw_pair(spec, xi, eta)
    if xi.form == "atomic" and eta.form == "atomic":
        return PairingResult(value, bool(np.isfinite(value)), None)
    xh, eh = _half(xi), _half(eta)
    if xh is None or eh is None:
        return PairingResult(value, bool(np.isfinite(value)), math.nan)
    v_half = _raw_pair(spec, xh, eh)
    finite = bool(np.isfinite(value))
    if detect_infinite and finite and v_half > 0 and value >= 2.0 * v_half:
        xq, eq = _half(xh), _half(eh)
        if xq is not None and eq is not None:
            v_quarter = _raw_pair(spec, xq, eq)
            if v_quarter > 0 and v_half >= 2.0 * v_quarter:
                finite = False
    return PairingResult(value, finite, abs(value - v_half))


def pairing_value(spec, xi, eta) -> float:
    return _raw_pair(spec, xi, eta)


class KernelEmbedding(FunctionSource):
    """The function ``t -> int k(t, s) d(mu)(s)``."""

    def __init__(self, spec, mu: SignedMeasure):
        self.spec = spec
        self.mu = mu
        super().__init__(self._eval, vectorized=True, dim=spec.domain_dim)

    def _eval(self, X):
        return self.spec.cross(X, self.mu.points) @ self.mu.masses


def embed(spec, mu: SignedMeasure) -> KernelEmbedding:
    return KernelEmbedding(spec, mu)


def equivalence_gap(spec, xi1: SignedMeasure, xi2: SignedMeasure) -> tuple[float, float, float]:
    """``(<x1-x2, x1-x2>, <x1, x1>, <x2, x2>)`` via bilinear expansion."""
    a = _raw_pair(spec, xi1, xi1)
    b = _raw_pair(spec, xi2, xi2)
    c = _raw_pair(spec, xi1, xi2)
    return (a - c) + (b - c), a, b


def measures_equivalent(spec, xi1: SignedMeasure, xi2: SignedMeasure, tol: float = 1e-10) -> bool:
    """True when ``<x1-x2, x1-x2>_k <= tol (1 + <x1,x1> + <x2,x2>)``."""
    gap, a, b = equivalence_gap(spec, xi1, xi2)
    return bool(gap <= tol * (1.0 + a + b))


@dataclass(frozen=True)
class DualNormReport:
    sup_over_candidates: float
    self_value: float
    gap: float
    argmax: int | None = None

    def to_dict(self) -> dict:
        return {"sup_over_candidates": self.sup_over_candidates, "self_value": self.self_value, "gap": self.gap}


def dual_norm_check(spec, xi: SignedMeasure, candidates: Sequence[SignedMeasure]) -> DualNormReport:
    """Compare ``sup |<eta, xi>|`` over normalized candidates with ``sqrt(<xi, xi>)``.

    Each candidate is scaled onto the unit sphere of the pairing norm;
    candidates with zero norm contribute zero.
    """
    self_sq = _raw_pair(spec, xi, xi)
    if not self_sq > 0:
        raise ZeroMeasureError("dual_norm_check needs <xi, xi> > 0")
    self_value = math.sqrt(self_sq)
    best, arg = 0.0, None
    for i, eta in enumerate(candidates):
        nn = _raw_pair(spec, eta, eta)
        if not nn > 0:
            continue
        v = abs(_raw_pair(spec, eta, xi)) / math.sqrt(nn)
        if v > best:
            best, arg = v, i
    return DualNormReport(best, self_value, self_value - best, arg)


def delta_span_residual(spec, mu: SignedMeasure, F) -> float:
    """Squared pairing distance from ``mu`` to the span of Dirac masses on ``F``."""
    F = as_pointset(F, spec.domain_dim)
    b = embed(spec, mu).values(F.points)
    G = build_gram(spec, F)
    c = pinv_apply(G, b)
    return max(_raw_pair(spec, mu, mu) - float(b @ c), 0.0)


def best_atomic_approximation(spec, mu: SignedMeasure, F) -> SignedMeasure:
    F = as_pointset(F, spec.domain_dim)
    G = build_gram(spec, F)
    return SignedMeasure.atomic(F.points, pinv_apply(G, embed(spec, mu).values(F.points)))
