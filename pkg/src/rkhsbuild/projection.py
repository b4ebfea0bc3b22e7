"""Finite-set interpolation projections and the increasing-limit norm.

For a finite point set ``F`` the projection ``Q_F`` sends any function to
its kernel interpolant on ``F``; its squared norm ``f|_F^T K_F^{-1} f|_F``
increases along nested sets, and a function belongs to the RKHS exactly when
that increasing limit stays bounded. :func:`norm_sup_estimate` follows a
finite chain and labels the trace heuristically.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionError, KernelDomainError, NestingError
from .gram import (
    DEFAULT_COND_LIMIT,
    DEFAULT_RANK_TOL,
    GramFactor,
    PointSet,
    as_pointset,
    build_gram,
    format_float,
    pinv_apply,
)
from .kernels import as_points

PLATEAU_TOL = 1e-6
PLATEAU_WINDOW = 3
DIVERGENCE_SLOPE = 0.2
MONOTONE_SLACK = 1e-10


class FunctionSource:
    """A deterministic real function on the kernel domain.

    ``func`` receives one point at a time (a float for 1-D domains, a
    coordinate array otherwise) unless ``vectorized=True``, in which case it
    receives the whole ``(m, d)`` array and returns ``m`` values.
    """

    def __init__(self, func: Callable, vectorized: bool = False, dim: int = 1):
        self.func = func
        self.vectorized = vectorized
        self.dim = dim

    def values(self, X) -> np.ndarray:
        X = as_points(X, self.dim)
        if self.vectorized:
            out = np.asarray(self.func(X), dtype=np.float64).reshape(-1)
        elif self.dim == 1:
            out = np.array([float(self.func(float(x))) for x in X[:, 0]])
        else:
            out = np.array([float(self.func(x)) for x in X])
        if out.shape[0] != X.shape[0]:
            raise DimensionError("function returned the wrong number of values")
        return out

    def __call__(self, t):
        vals = self.values(t)
        return float(vals[0]) if vals.shape[0] == 1 else vals


def as_source(f, dim: int = 1) -> FunctionSource:
    if isinstance(f, (FunctionSource, RkhsFunction)):
        return f
    if callable(f):
        return FunctionSource(f, dim=dim)
    raise TypeError("expected a callable or FunctionSource")


def zero_function(dim: int = 1) -> FunctionSource:
    return FunctionSource(lambda X: np.zeros(len(X)), vectorized=True, dim=dim)


def constant_function(value: float, dim: int = 1) -> FunctionSource:
    return FunctionSource(lambda X: np.full(len(X), float(value)), vectorized=True, dim=dim)


@dataclass(frozen=True, eq=False)
class RkhsFunction:
    """A finite kernel expansion ``sum_j coeffs[j] k(., support[j])``."""

    spec: object
    support: PointSet
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.float64).reshape(-1)
        if c.shape[0] != len(self.support):
            raise DimensionError("coeffs and support differ in length")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def section(cls, spec, s, scale: float = 1.0) -> "RkhsFunction":
        """The kernel section ``scale * k(., s)``."""
        return cls(spec, PointSet(s, dim=spec.domain_dim), np.array([scale]))

    @property
    def dim(self) -> int:
        return self.support.dim

    def values(self, X) -> np.ndarray:
        return self.spec.cross(X, self.support.points) @ self.coeffs

    def __call__(self, t):
        vals = self.values(t)
        return float(vals[0]) if vals.shape[0] == 1 else vals

    def norm_sq(self) -> float:
        K = self.spec.cross(self.support.points, self.support.points)
        return float(self.coeffs @ K @ self.coeffs)

    def norm(self) -> float:
        return math.sqrt(max(self.norm_sq(), 0.0))

    def scaled(self, c: float) -> "RkhsFunction":
        return RkhsFunction(self.spec, self.support, c * self.coeffs)

    def normalized(self) -> "RkhsFunction":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize the zero function")
        return self.scaled(1.0 / n)


def _restrict(f, F: PointSet) -> np.ndarray:
    return as_source(f, F.dim).values(F.points)


def qf_project(spec, F, f, gram: GramFactor | None = None) -> RkhsFunction:
    """Kernel interpolant of ``f`` on ``F`` (Moore-Penrose when ``K_F`` is singular)."""
    F = as_pointset(F, spec.domain_dim)
    G = build_gram(spec, F) if gram is None else gram
    return RkhsFunction(spec, F, pinv_apply(G, _restrict(f, F)))


def qf_norm_sq(spec, F, f, gram: GramFactor | None = None) -> float:
    """``f|_F^T K_F^{[-1]} f|_F``, clipped at zero."""
    F = as_pointset(F, spec.domain_dim)
    G = build_gram(spec, F) if gram is None else gram
    v = _restrict(f, F)
    return max(float(v @ pinv_apply(G, v)), 0.0)


def reproduce_check(spec, F, f, s0) -> float:
    """``|row_{s0}(K_F) K_F^{[-1]} f|_F - f(s0)|`` for ``s0`` in ``F``."""
    F = as_pointset(F, spec.domain_dim)
    i = F.index_of(s0)
    if i < 0:
        raise KernelDomainError("s0 must be one of the points of F")
    G = build_gram(spec, F)
    v = _restrict(f, F)
    return abs(float(G.matrix[i] @ pinv_apply(G, v)) - float(v[i]))


@dataclass(frozen=True)
class NormStage:
    set_size: int
    norm_sq: float
    condition_estimate: float
    flags: tuple = ()


@dataclass(frozen=True)
class NormTrace:
    """Squared projection norms along a nested chain, with a heuristic verdict.

    ``sup_estimate`` is the last squared norm; it equals the supremum when
    the verdict is ``"bounded"`` and is only a lower bound otherwise.
    """

    stages: list
    verdict: str
    sup_estimate: float
    slope: float | None = None
    params: dict = field(default_factory=dict)

    @property
    def norms(self) -> np.ndarray:
        return np.array([s.norm_sq for s in self.stages])

    @property
    def sizes(self) -> np.ndarray:
        return np.array([s.set_size for s in self.stages])

    def is_monotone(self, slack: float = MONOTONE_SLACK) -> bool:
        n = self.norms
        return bool(np.all(np.diff(n) >= -slack * np.maximum(1.0, np.abs(n[1:]))))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["set_size", "norm_sq", "condition_estimate", "flags"])
        for s in self.stages:
            w.writerow([s.set_size, format_float(s.norm_sq), format_float(s.condition_estimate), ";".join(s.flags)])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "stages": [
                {
                    "set_size": s.set_size,
                    "norm_sq": s.norm_sq,
                    "condition_estimate": s.condition_estimate,
                    "flags": list(s.flags),
                }
                for s in self.stages
            ],
            "verdict": self.verdict,
            "sup_estimate": self.sup_estimate,
            "slope": self.slope,
        }


def classify_trace(
    sizes: Sequence[int],
    norms: Sequence[float],
    plateau_tol: float = PLATEAU_TOL,
    plateau_window: int = PLATEAU_WINDOW,
    divergence_slope: float = DIVERGENCE_SLOPE,
) -> tuple[str, float | None]:
    """Label a norm trace ``bounded``, ``diverging`` or ``inconclusive``.

    Bounded: the last ``plateau_window`` relative increments (or all of them,
    if fewer) are below ``plateau_tol``. Diverging: the log-log slope of
    ``norm_sq`` against ``|F|`` over the last half of the trace exceeds
    ``divergence_slope``. Returns the verdict and the fitted slope (or None).
    """
    norms = np.asarray(norms, dtype=np.float64)
    sizes = np.asarray(sizes, dtype=np.float64)
    if norms.size < 2:
        return "inconclusive", None
    inc = np.diff(norms)
    scale = np.maximum(np.abs(norms[1:]), np.finfo(float).tiny)
    rel = np.where(inc == 0.0, 0.0, np.abs(inc) / scale)
    if np.all(rel[-plateau_window:] < plateau_tol):
        return "bounded", 0.0
    half = norms.size // 2
    tail_n, tail_s = norms[half:], sizes[half:]
    ok = (tail_n > 0) & (tail_s > 0)
    slope = None
    if ok.sum() >= 2 and np.ptp(np.log(tail_s[ok])) > 0:
        slope = float(np.polyfit(np.log(tail_s[ok]), np.log(tail_n[ok]), 1)[0])
        if slope > divergence_slope:
            return "diverging", slope
    return "inconclusive", slope


def norm_sup_estimate(
    spec,
    nested: Sequence,
    f,
    plateau_tol: float = PLATEAU_TOL,
    plateau_window: int = PLATEAU_WINDOW,
    divergence_slope: float = DIVERGENCE_SLOPE,
    rank_tol: float = DEFAULT_RANK_TOL,
    cond_limit: float = DEFAULT_COND_LIMIT,
) -> NormTrace:
    """Squared projection norms of ``f`` along a nested chain of point sets.

    Stages whose Gram matrix is rank deficient or has a condition estimate
    above ``cond_limit`` go through the pseudo-inverse and carry the flag
    ``pinv``. The verdict comes from :func:`classify_trace`.
    """
    chain = [as_pointset(F, spec.domain_dim) for F in nested]
    if not chain:
        raise ValueError("need at least one point set")
    for i, (a, b) in enumerate(zip(chain, chain[1:])):
        if not a.issubset(b):
            raise NestingError(f"stage {i} is not contained in stage {i + 1}")
    src = as_source(f, spec.domain_dim)
    stages = []
    for F in chain:
        G = build_gram(spec, F, rank_tol, cond_limit)
        flags = ()
        if G.factor_kind != "cholesky":
            flags = ("pinv",) if G.full_rank else ("pinv", "rank_deficient")
        stages.append(NormStage(len(F), qf_norm_sq(spec, F, src, G), G.condition_estimate, flags))
    verdict, slope = classify_trace(
        [s.set_size for s in stages], [s.norm_sq for s in stages],
        plateau_tol, plateau_window, divergence_slope,
    )
    return NormTrace(
        stages, verdict, stages[-1].norm_sq, slope,
        {"plateau_tol": plateau_tol, "plateau_window": plateau_window, "divergence_slope": divergence_slope},
    )


def dyadic_chain(a: float, b: float, levels: int, start: int = 0, include_left: bool = False) -> list[PointSet]:
    """Dyadic refinements of ``[a, b]``: level ``l`` holds ``a + j (b-a) / 2**l``.

    ``j`` runs over ``1..2**l`` (or ``0..2**l`` with ``include_left``), for
    ``l = start .. levels``. Each level contains the previous one.
    """
    out = []
    for lev in range(start, levels + 1):
        n = 2 ** lev
        j = np.arange(0 if include_left else 1, n + 1)
        out.append(PointSet(a + j * (b - a) / n))
    return out


def prefix_chain(points, sizes: Sequence[int]) -> list[PointSet]:
    """Nested prefixes of a discrete point list, lowest index first."""
    P = as_pointset(points)
    return [P.subset(range(n)) for n in sizes]
