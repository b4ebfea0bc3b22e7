"""Pure NumPy implementations of the hot kernels.

These mirror the compiled routines in ``_core.pyx`` one for one and are used
whenever the extension is unavailable (or ``RKHSBUILD_PURE_PYTHON=1``).
"""
import numpy as np

BROWNIAN_MIN = 0
BESSEL_SERIES = 1
FBM_SINGULAR = 2
GAUSS_RBF = 3

_SERIES_RTOL = 1e-16


def cross_gram(kind, X, Y, param):
    """Kernel matrix ``k(X[i], Y[j])`` for one of the built-in kernels.

    ``X`` and ``Y`` are ``(n, d)`` and ``(m, d)`` float arrays. Domain checks
    are the caller's job; the fBm kernel returns ``inf`` on coincident points.
    """
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if kind == BROWNIAN_MIN:
        return np.minimum.outer(X[:, 0], Y[:, 0])
    if kind == BESSEL_SERIES:
        return _bessel_series(np.multiply.outer(X[:, 0], Y[:, 0]), int(param))
    if kind == FBM_SINGULAR:
        diff = np.abs(np.subtract.outer(X[:, 0], Y[:, 0]))
        with np.errstate(divide="ignore"):
            out = diff ** (2.0 * param - 2.0)
        out[diff == 0.0] = np.inf
        return out
    if kind == GAUSS_RBF:
        # explicit differences keep k(t, t) == 1 and symmetry bit-for-bit
        sq = np.zeros((X.shape[0], Y.shape[0]))
        for c in range(X.shape[1]):
            sq += np.subtract.outer(X[:, c], Y[:, c]) ** 2
        return np.exp(-sq / (2.0 * param * param))
    raise ValueError(f"unknown kernel code {kind}")


def _bessel_series(x, n_terms):
    # per-entry stopping rule identical to the compiled loop
    total = np.ones_like(x)
    term = np.ones_like(x)
    active = np.ones(x.shape, dtype=bool)
    ax = np.abs(x)
    for n in range(1, n_terms):
        term = np.where(active, term * x / (n * n), 0.0)
        total = total + term
        done = (np.abs(term) < _SERIES_RTOL * np.abs(total)) & (n * n > ax)
        active &= ~done
        if not active.any():
            break
    return total


def pivoted_cholesky(K, rel_tol):
    """Greedy diagonal-pivoted Cholesky of a PSD matrix.

    Stops once the largest remaining Schur-complement diagonal falls to
    ``rel_tol`` times the first pivot. Ties go to the lowest original index.

    Returns
    -------
    L : ndarray, shape (m, rank)
        Lower factor in pivoted order, ``K[piv][:, piv][:, :rank]`` rows.
    piv : ndarray of int
        Permutation; the first ``rank`` entries are the selected indices.
    rank : int
    """
    A = np.array(K, dtype=np.float64, copy=True)
    m = A.shape[0]
    piv = np.arange(m)
    d = np.diag(A).copy()
    L = np.zeros((m, m))
    rank = 0
    first = None
    for i in range(m):
        cand = piv[i:]
        dcand = d[cand]
        dmax = dcand.max()
        pj = int(cand[dcand == dmax].min())
        j = i + int(np.flatnonzero(cand == pj)[0])
        if first is None:
            first = dmax
            if not dmax > 0.0:
                break
        if not dmax > rel_tol * first:
            break
        piv[i], piv[j] = piv[j], piv[i]
        L[i, :i], L[j, :i] = L[j, :i].copy(), L[i, :i].copy()
        root = np.sqrt(dmax)
        L[i, i] = root
        rest = piv[i + 1:]
        col = (A[rest, pj] - L[i + 1:, :i] @ L[i, :i]) / root
        L[i + 1:, i] = col
        d[rest] -= col * col
        d[pj] = 0.0
        rank += 1
    return L[:, :rank], piv, rank


def toeplitz_quadratic(f, w):
    """``sum_ij f[i] f[j] w[|i - j|]`` for a symmetric Toeplitz weight."""
    f = np.asarray(f, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    n = f.shape[0]
    acf = np.correlate(f, f, mode="full")[n - 1:]
    return float(w[0] * acf[0] + 2.0 * np.dot(w[1:n], acf[1:]))
