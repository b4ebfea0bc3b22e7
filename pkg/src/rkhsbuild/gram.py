"""Gram matrices, rank-revealing factorization and pseudo-inverse action."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from . import _backend
from .errors import DimensionError
from .kernels import as_points

DEFAULT_RANK_TOL = 1e-11
DEFAULT_COND_LIMIT = 1e12


@dataclass(frozen=True)
class PointSet:
    """An ordered, nonempty finite set of points; order fixes matrix indexing."""

    points: np.ndarray
    labels: tuple | None = None

    def __init__(self, points, labels=None, dim=None):
        arr = as_points(points, dim)
        if arr.shape[0] == 0:
            raise ValueError("a PointSet needs at least one point")
        arr.setflags(write=False)
        object.__setattr__(self, "points", arr)
        if labels is not None:
            labels = tuple(labels)
            if len(labels) != arr.shape[0]:
                raise DimensionError("labels and points differ in length")
        object.__setattr__(self, "labels", labels)

    def __len__(self):
        return self.points.shape[0]

    def __iter__(self):
        return iter(self.points)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def subset(self, indices) -> "PointSet":
        idx = list(indices)
        labels = None if self.labels is None else [self.labels[i] for i in idx]
        return PointSet(self.points[idx], labels)

    def keys(self) -> list[tuple]:
        return [tuple(p) for p in self.points]

    def issubset(self, other: "PointSet") -> bool:
        return set(self.keys()) <= set(other.keys())

    def index_of(self, point) -> int:
        """Index of the first exact coordinate match, or ``-1``."""
        p = as_points(point, self.dim)[0]
        hits = np.flatnonzero(np.all(self.points == p, axis=1))
        return int(hits[0]) if hits.size else -1


def as_pointset(F, dim=None) -> PointSet:
    return F if isinstance(F, PointSet) else PointSet(F, dim=dim)


@dataclass(frozen=True, eq=False)
class GramFactor:
    """A Gram matrix together with the factorization used to apply its inverse.

    ``factor_kind`` is ``"cholesky"`` when all pivots cleared the rank test
    and the pivot-ratio condition estimate is below the limit; otherwise an
    eigendecomposition drives the Moore-Penrose pseudo-inverse, keeping the
    eigenvalues above ``rank_tol`` times the largest.
    """

    matrix: np.ndarray
    pivot_order: np.ndarray
    numerical_rank: int
    rank_tol: float
    factor_kind: str
    condition_estimate: float
    _chol: np.ndarray | None = field(default=None, repr=False)
    _eigvecs: np.ndarray | None = field(default=None, repr=False)
    _inv_eigvals: np.ndarray | None = field(default=None, repr=False)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    @property
    def full_rank(self) -> bool:
        return self.numerical_rank == self.size

    def pinv_matrix(self) -> np.ndarray:
        return pinv_apply(self, np.eye(self.size))

    def to_csv(self) -> str:
        return matrix_to_csv(self.matrix)


def factor_matrix(K, rank_tol: float = DEFAULT_RANK_TOL, cond_limit: float = DEFAULT_COND_LIMIT) -> GramFactor:
    """Factor a symmetric PSD matrix; see :class:`GramFactor` for the rule."""
    K = np.asarray(K, dtype=np.float64)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise DimensionError(f"Gram matrix must be square, got {K.shape}")
    K = 0.5 * (K + K.T)
    K.setflags(write=False)
    m = K.shape[0]
    L, piv, rank = _backend.pivoted_cholesky(K, rank_tol)
    pivots = np.diag(L[:rank, :rank]) ** 2 if rank else np.zeros(0)
    cond = float(pivots[0] / pivots[-1]) if rank else np.inf
    if rank == m and cond <= cond_limit:
        return GramFactor(K, piv, rank, rank_tol, "cholesky", cond, _chol=L)
    lam, V = np.linalg.eigh(K)
    lam_max = lam[-1] if m else 0.0
    keep = lam > rank_tol * lam_max
    if keep.all():
        keep[0] = False
    inv = np.zeros_like(lam)
    inv[keep] = 1.0 / lam[keep]
    eig_cond = float(lam_max / lam[keep][0]) if keep.any() else np.inf
    return GramFactor(
        K, piv, int(keep.sum()), rank_tol, "eigen_pinv", max(cond, eig_cond),
        _eigvecs=V, _inv_eigvals=inv,
    )


def build_gram(spec, F, rank_tol: float = DEFAULT_RANK_TOL, cond_limit: float = DEFAULT_COND_LIMIT) -> GramFactor:
    """Assemble and factor the Gram matrix of ``spec`` on ``F``."""
    X = getattr(F, "points", None)
    X = as_points(F if X is None else X, spec.domain_dim)
    return factor_matrix(spec.cross(X, X), rank_tol, cond_limit)


def pinv_apply(G: GramFactor, v) -> np.ndarray:
    """Apply the (pseudo-)inverse of the Gram matrix to a vector or matrix."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape[0] != G.size:
        raise DimensionError(f"vector of length {v.shape[0]} for a {G.size}x{G.size} Gram matrix")
    if G.factor_kind == "cholesky":
        piv = G.pivot_order
        y = solve_triangular(G._chol, v[piv], lower=True)
        z = solve_triangular(G._chol.T, y, lower=False)
        out = np.empty_like(z)
        out[piv] = z
        return out
    V = G._eigvecs
    coef = V.T @ v
    coef = (G._inv_eigvals * coef.T).T
    return V @ coef


def select_independent(spec, F, tol: float = DEFAULT_RANK_TOL) -> PointSet:
    """Greedy pivoted selection of points with linearly independent kernel sections.

    Pivots on the largest Schur-complement diagonal (lowest index on ties)
    until it drops to ``tol`` times the first pivot. Selected points are
    returned in their original order.
    """
    F = as_pointset(F, spec.domain_dim)
    K = spec.cross(F.points, F.points)
    _, piv, rank = _backend.pivoted_cholesky(0.5 * (K + K.T), tol)
    return F.subset(sorted(int(i) for i in piv[:rank]))


def format_float(x: float) -> str:
    """Shortest round-trip decimal, with integral values written without ``.0``."""
    x = float(x)
    if x.is_integer() and abs(x) < 1e16:
        return str(int(x))
    return repr(x)


def matrix_to_csv(M) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in np.atleast_2d(M):
        writer.writerow([format_float(v) for v in row])
    return buf.getvalue()
