"""Positive definite kernels, the induced metric d_k, and point equivalence.

Every built-in kernel is real and symmetric. Points are handled as ``(m, d)``
float arrays; scalars and flat lists are accepted wherever a point or point
list is expected and promoted with :func:`as_points`.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _backend
from .errors import KernelDomainError, SingularDiagonalError

KINDS = ("brownian_min", "bessel_series", "fbm_singular", "gauss_rbf")

_KIND_CODES = {
    "brownian_min": _backend.BROWNIAN_MIN,
    "bessel_series": _backend.BESSEL_SERIES,
    "fbm_singular": _backend.FBM_SINGULAR,
    "gauss_rbf": _backend.GAUSS_RBF,
}

_PARAM_NAMES = {
    "brownian_min": (),
    "bessel_series": ("truncation_order",),
    "fbm_singular": ("hurst",),
    "gauss_rbf": ("width",),
}

_DEFAULTS = {"truncation_order": 60, "width": 1.0}

DEFAULT_PD_TOL = 1e-10
DEFAULT_EQUIV_TOL = 1e-9


class SeriesTruncationWarning(UserWarning):
    """The truncated Bessel series may not have converged at this argument."""


def as_points(points, dim=None) -> np.ndarray:
    """Promote a scalar, a flat list or an ``(m, d)`` array to ``(m, d)`` floats."""
    arr = np.asarray(points, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(-1, 1) if dim in (None, 1) else arr.reshape(1, -1)
    elif arr.ndim != 2:
        raise ValueError(f"points must be at most 2-D, got shape {arr.shape}")
    if dim is not None and arr.shape[1] != dim:
        raise KernelDomainError(f"expected {dim}-dimensional points, got {arr.shape[1]}")
    return arr


def as_point(t, dim=None) -> np.ndarray:
    arr = as_points(t, dim)
    if arr.shape[0] != 1:
        raise ValueError("expected a single point")
    return arr[0]


@dataclass(frozen=True)
class KernelSpec:
    """A named built-in kernel with its parameters.

    Use the classmethod constructors (:meth:`brownian`, :meth:`bessel`,
    :meth:`fbm`, :meth:`rbf`) or :meth:`from_dict` rather than filling
    ``params`` by hand.
    """

    kind: str
    params: dict = field(default_factory=dict)
    domain_dim: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}; expected one of {KINDS}")
        allowed = _PARAM_NAMES[self.kind]
        unknown = set(self.params) - set(allowed)
        if unknown:
            raise ValueError(f"unknown parameters for {self.kind}: {sorted(unknown)}")
        params = {name: self.params.get(name, _DEFAULTS.get(name)) for name in allowed}
        if self.kind == "bessel_series":
            n = params["truncation_order"]
            if int(n) != n or n < 1:
                raise ValueError("bessel_series requires an integer truncation_order >= 1")
            params["truncation_order"] = int(n)
        elif self.kind == "fbm_singular":
            h = params["hurst"]
            if h is None or not 0.5 <= float(h) < 1.0:
                raise ValueError("fbm_singular requires hurst H in [1/2, 1)")
            params["hurst"] = float(h)
        elif self.kind == "gauss_rbf":
            w = float(params["width"])
            if not w > 0.0 or not math.isfinite(w):
                raise ValueError("gauss_rbf requires a positive width")
            params["width"] = w
        if self.domain_dim < 1 or (self.kind != "gauss_rbf" and self.domain_dim != 1):
            raise ValueError(f"{self.kind} is defined on the real line only")
        object.__setattr__(self, "params", params)

    @classmethod
    def brownian(cls) -> "KernelSpec":
        return cls("brownian_min")

    @classmethod
    def bessel(cls, truncation_order: int = 60) -> "KernelSpec":
        return cls("bessel_series", {"truncation_order": truncation_order})

    @classmethod
    def fbm(cls, hurst: float) -> "KernelSpec":
        return cls("fbm_singular", {"hurst": hurst})

    @classmethod
    def rbf(cls, width: float = 1.0, domain_dim: int = 1) -> "KernelSpec":
        return cls("gauss_rbf", {"width": width}, domain_dim)

    @property
    def diagonal_singular(self) -> bool:
        return self.kind == "fbm_singular"

    def _param(self):
        if self.kind == "bessel_series":
            return float(self.params["truncation_order"])
        if self.kind == "fbm_singular":
            return self.params["hurst"]
        if self.kind == "gauss_rbf":
            return self.params["width"]
        return 0.0

    def validate(self, X: np.ndarray) -> None:
        if not np.all(np.isfinite(X)):
            raise KernelDomainError("points must have finite coordinates")
        if self.kind == "brownian_min" and np.any(X < 0.0):
            raise KernelDomainError("brownian_min is defined on [0, inf); got a negative point")

    def cross(self, X, Y) -> np.ndarray:
        """Kernel matrix between two point lists, with domain checks."""
        X = as_points(X, self.domain_dim)
        Y = as_points(Y, self.domain_dim)
        self.validate(X)
        self.validate(Y)
        out = _backend.cross_gram(_KIND_CODES[self.kind], X, Y, self._param())
        if self.diagonal_singular and np.isinf(out).any():
            raise SingularDiagonalError(
                "fbm_singular is infinite on the diagonal; supports must be disjoint"
            )
        return out

    def diag(self, X) -> np.ndarray:
        """k(x, x) for each point, or an error for diagonal-singular kernels."""
        X = as_points(X, self.domain_dim)
        self.validate(X)
        if self.diagonal_singular:
            raise SingularDiagonalError("fbm_singular has no finite diagonal")
        if self.kind == "brownian_min":
            return X[:, 0].copy()
        if self.kind == "gauss_rbf":
            return np.ones(X.shape[0])
        return np.array([_backend.cross_gram(_KIND_CODES[self.kind], x[None], x[None], self._param())[0, 0] for x in X])

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "params": dict(self.params)}
        if self.domain_dim != 1:
            out["domain_dim"] = self.domain_dim
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "KernelSpec":
        unknown = set(data) - {"kind", "params", "domain_dim"}
        if unknown:
            raise ValueError(f"unknown kernel keys: {sorted(unknown)}")
        return cls(data["kind"], dict(data.get("params", {})), int(data.get("domain_dim", 1)))


@dataclass(frozen=True)
class CustomKernel:
    """Wrap an arbitrary scalar function ``k(t, s)`` of coordinate vectors.

    Intended for test doubles (constant or indefinite kernels) and quick
    experiments; it is not serializable and performs no domain checks.
    """

    func: Callable
    name: str = "custom"
    domain_dim: int = 1
    diagonal_singular: bool = False

    def validate(self, X):
        if not np.all(np.isfinite(X)):
            raise KernelDomainError("points must have finite coordinates")

    def cross(self, X, Y) -> np.ndarray:
        X = as_points(X, self.domain_dim)
        Y = as_points(Y, self.domain_dim)
        return np.array([[float(self.func(x, y)) for y in Y] for x in X]).reshape(len(X), len(Y))

    def diag(self, X) -> np.ndarray:
        X = as_points(X, self.domain_dim)
        return np.array([float(self.func(x, x)) for x in X])


def bessel_tail_bound(x: float, n_terms: int) -> float:
    """Upper bound on the series remainder after ``n_terms`` terms at ``x = t s``.

    The terms ``x**n / (n!)**2`` shrink geometrically with ratio at most
    ``|x| / n_terms**2`` from index ``n_terms`` on; returns ``inf`` when that
    ratio is not below one.
    """
    ax = abs(x)
    ratio = ax / (n_terms * n_terms)
    if ratio >= 1.0:
        return math.inf
    log_term = n_terms * math.log(ax) - 2.0 * math.lgamma(n_terms + 1) if ax > 0 else -math.inf
    return math.exp(log_term) / (1.0 - ratio)


def eval_kernel(spec, t, s) -> float:
    """Evaluate ``k(t, s)`` at a pair of points.

    For ``bessel_series`` the ``N``-term partial sum is returned and a
    :class:`SeriesTruncationWarning` is issued when :func:`bessel_tail_bound`
    exceeds ``1e-12`` relative to the value.
    """
    dim = spec.domain_dim
    t_arr = as_point(t, dim)[None]
    s_arr = as_point(s, dim)[None]
    value = float(spec.cross(t_arr, s_arr)[0, 0])
    if getattr(spec, "kind", None) == "bessel_series":
        x = float(t_arr[0, 0] * s_arr[0, 0])
        bound = bessel_tail_bound(x, spec.params["truncation_order"])
        if bound > 1e-12 * max(abs(value), 1.0):
            warnings.warn(
                f"bessel_series truncated at N={spec.params['truncation_order']} "
                f"may be off by up to {bound:.3g} at t*s={x:.6g}",
                SeriesTruncationWarning,
                stacklevel=2,
            )
    return value


def _dk_from_entries(ktt, kts, kss):
    sq = (ktt - kts) + (kss - kts)
    return np.sqrt(np.maximum(sq, 0.0))


def _bessel_dk_sq(t, s, n_terms):
    # sum_{n>=1} ((t**n - s**n) / n!)**2 with the differences built by
    # D_n = (t D_{n-1} + s**(n-1)/(n-1)! (t - s)) / n, so nothing cancels
    diff = t - s
    D = np.zeros(np.broadcast(t, s).shape)
    b = np.ones_like(D)
    acc = np.zeros_like(D)
    for n in range(1, n_terms):
        D = (t * D + b * diff) / n
        acc += D * D
        b = b * s / n
    return acc


def _dk_block(spec, X, Y):
    """d_k between the rows of ``X`` and ``Y``.

    Entry-wise ``k(t,t) - 2 k(t,s) + k(s,s)`` loses about half the digits
    near the diagonal, so the Bessel series and the Gaussian kernel use
    cancellation-free forms of the same quantity.
    """
    if spec.diagonal_singular:
        raise SingularDiagonalError("d_k needs a finite diagonal; fbm_singular has none")
    kind = getattr(spec, "kind", None)
    if kind == "bessel_series":
        X = as_points(X, 1)
        Y = as_points(Y, 1)
        spec.validate(X)
        spec.validate(Y)
        sq = _bessel_dk_sq(X[:, :1], Y[:, :1].T, spec.params["truncation_order"])
        return np.sqrt(sq)
    if kind == "gauss_rbf":
        X = as_points(X, spec.domain_dim)
        Y = as_points(Y, spec.domain_dim)
        spec.validate(X)
        spec.validate(Y)
        r2 = np.zeros((X.shape[0], Y.shape[0]))
        for j in range(X.shape[1]):
            r2 += np.subtract.outer(X[:, j], Y[:, j]) ** 2
        w = spec.params["width"]
        return np.sqrt(-2.0 * np.expm1(-r2 / (2.0 * w * w)))
    Kxy = spec.cross(X, Y)
    dx = spec.diag(X) if hasattr(spec, "diag") else np.diag(spec.cross(X, X))
    dy = spec.diag(Y) if hasattr(spec, "diag") else np.diag(spec.cross(Y, Y))
    return _dk_from_entries(dx[:, None], Kxy, dy[None, :])


def dk_metric(spec, t, s) -> float:
    """Kernel distance ``sqrt(k(t,t) - 2 k(t,s) + k(s,s))``."""
    dim = spec.domain_dim
    return float(_dk_block(spec, as_point(t, dim)[None], as_point(s, dim)[None])[0, 0])


def dk_matrix(spec, X) -> np.ndarray:
    """Pairwise d_k distances between the rows of ``X``."""
    X = as_points(X, spec.domain_dim)
    return _dk_block(spec, X, X)


@dataclass(frozen=True)
class PDReport:
    min_eigenvalue: float
    passed: bool

    def to_dict(self) -> dict:
        return {"min_eigenvalue": self.min_eigenvalue, "pass": self.passed}


def check_pd(spec, F, tol: float = DEFAULT_PD_TOL) -> PDReport:
    """Screen the Gram matrix on ``F`` for positive semidefiniteness.

    Passes when the smallest eigenvalue is at least
    ``-tol * max(1, largest diagonal entry)``.
    """
    X = _points_of(F, spec.domain_dim)
    if X.shape[0] < 1:
        raise ValueError("check_pd needs at least one point")
    K = spec.cross(X, X)
    K = 0.5 * (K + K.T)
    lam_min = float(np.linalg.eigvalsh(K)[0])
    scale = max(1.0, float(np.max(np.diag(K))))
    return PDReport(lam_min, lam_min >= -tol * scale)


def detect_equivalent_points(spec, F, tol: float = DEFAULT_EQUIV_TOL) -> list[list[int]]:
    """Partition the indices of ``F`` into classes of points with ``d_k = 0``.

    Points are scanned in order; each joins the first class whose
    representative (its first member) is within ``tol``. Returns lists of
    indices into ``F``.
    """
    X = _points_of(F, spec.domain_dim)
    D = dk_matrix(spec, X)
    classes: list[list[int]] = []
    for i in range(X.shape[0]):
        for cls in classes:
            if D[cls[0], i] <= tol:
                cls.append(i)
                break
        else:
            classes.append([i])
    return classes


def _points_of(F, dim):
    # PointSet or anything array-like
    pts = getattr(F, "points", F)
    return as_points(pts, dim)
