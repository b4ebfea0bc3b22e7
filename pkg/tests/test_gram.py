import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rkhsbuild import KernelSpec, PointSet, build_gram, pinv_apply, select_independent
from rkhsbuild.errors import DimensionError
from rkhsbuild.gram import factor_matrix, format_float
from rkhsbuild.kernels import CustomKernel
from rkhsbuild.verify import penrose_errors

from conftest import FINITE_KERNELS

BROWNIAN = KernelSpec.brownian()
const_one = CustomKernel(lambda t, s: 1.0, "const")


def test_brownian_gram_matrix():
    G = build_gram(BROWNIAN, [1, 2, 3])
    np.testing.assert_array_equal(G.matrix, [[1, 1, 1], [1, 2, 2], [1, 2, 3]])
    assert G.numerical_rank == 3 and G.factor_kind == "cholesky"
    assert np.linalg.det(G.matrix) == pytest.approx(1.0)


def test_singleton_gram():
    G = build_gram(KernelSpec.rbf(0.7), [1.5])
    assert G.matrix.shape == (1, 1) and G.matrix[0, 0] == 1.0
    assert G.numerical_rank == 1


def test_duplicate_point_engages_pinv():
    G = build_gram(BROWNIAN, [1, 1])
    assert G.numerical_rank == 1
    assert G.factor_kind == "eigen_pinv"
    assert not G.full_rank


def test_select_independent_examples():
    assert select_independent(BROWNIAN, [1, 1, 2]).points[:, 0].tolist() == [1.0, 2.0]
    assert select_independent(BROWNIAN, [1, 2, 3]).points[:, 0].tolist() == [1.0, 2.0, 3.0]
    assert len(select_independent(const_one, [1, 2, 3])) == 1


def test_pinv_apply_examples():
    G = build_gram(BROWNIAN, [1, 2, 3])
    np.testing.assert_allclose(pinv_apply(G, [1, 1, 1]), [1, 0, 0], atol=1e-14)
    ones = factor_matrix(np.ones((2, 2)))
    np.testing.assert_allclose(pinv_apply(ones, [1, 1]), [0.5, 0.5], atol=1e-15)
    # SVD oracle
    np.testing.assert_allclose(ones.pinv_matrix(), np.linalg.pinv(np.ones((2, 2))), atol=1e-15)
    eye = factor_matrix(np.eye(4))
    v = np.array([0.3, -1.0, 2.0, 7.0])
    np.testing.assert_array_equal(pinv_apply(eye, v), v)


def test_pinv_apply_length_check():
    G = build_gram(BROWNIAN, [1, 2])
    with pytest.raises(DimensionError):
        pinv_apply(G, [1, 2, 3])


def spaced_points(r, window, n, gap=0.6):
    # jittered points at least ``gap - 0.1`` apart, clear of the window's left edge
    x = window[0] + 0.1 + gap * np.arange(n) + 0.1 * r.uniform(size=n)
    return x[x <= window[1]]


# Penrose residuals of a double-precision pseudo-inverse scale like eps * kappa,
# with kappa the condition number of the retained spectrum, so the
# rank_tol-level identities are asserted where kappa stays below ~1e5 (the
# entire bessel_series kernel gets there by 5 points at spacing 0.6).
PENROSE_CASES = [
    pytest.param(KernelSpec.brownian(), (0.0, 5.0), 6, id="brownian"),
    pytest.param(KernelSpec.bessel(), (-2.0, 2.0), 5, id="bessel"),
    pytest.param(KernelSpec.rbf(1.0), (-3.0, 3.0), 6, id="rbf"),
]


@pytest.mark.parametrize("spec,window,max_n", PENROSE_CASES)
@given(seed=st.integers(0, 2 ** 32 - 1), n=st.integers(1, 6), dup=st.booleans())
def test_penrose_identities(spec, window, max_n, seed, n, dup):
    x = spaced_points(np.random.default_rng(seed), window, min(n, max_n))
    if dup:
        x = np.append(x, x[0])
    e1, e2 = penrose_errors(build_gram(spec, x))
    assert e1 <= 1e-11 and e2 <= 1e-11


@given(seed=st.integers(0, 2 ** 32 - 1), n=st.integers(6, 9), dup=st.booleans())
def test_penrose_rounding_bound_ill_conditioned(seed, n, dup):
    x = spaced_points(np.random.default_rng(seed), (-2.5, 2.5), n, gap=0.45)
    if dup:
        x = np.append(x, x[0])
    G = build_gram(KernelSpec.bessel(), x)
    lam = np.linalg.eigvalsh(G.matrix)
    kept = lam[lam > G.rank_tol * lam[-1]]
    kappa = kept[-1] / kept[0]
    e1, e2 = penrose_errors(G)
    bound = max(G.rank_tol, 10 * len(x) * np.finfo(float).eps * kappa)
    assert e1 <= bound and e2 <= bound


@pytest.mark.parametrize("spec,window", FINITE_KERNELS)
@given(seed=st.integers(0, 2 ** 32 - 1))
def test_select_independent_idempotent(spec, window, seed):
    r = np.random.default_rng(seed)
    x = r.choice(np.linspace(*window, 9), size=8)
    once = select_independent(spec, x)
    twice = select_independent(spec, once)
    np.testing.assert_array_equal(once.points, twice.points)


@pytest.mark.parametrize("spec,window", FINITE_KERNELS)
def test_pinv_inverts_full_rank(spec, window, rng):
    x = spaced_points(rng, window, 5)
    G = build_gram(spec, x)
    assert G.full_rank
    for _ in range(10):
        v = rng.normal(size=x.size)
        back = pinv_apply(G, G.matrix @ v)
        assert np.linalg.norm(back - v) <= 1e-10 * np.linalg.norm(v)


def test_pointset_behaviour():
    P = PointSet([3, 1, 2])
    assert len(P) == 3 and P.dim == 1
    assert P.issubset(PointSet([1, 2, 3, 4]))
    assert not P.issubset(PointSet([1, 2]))
    assert P.index_of(2) == 2
    with pytest.raises(ValueError):
        P.points[0, 0] = 9.0


def test_gram_csv_shortest_roundtrip():
    G = build_gram(KernelSpec.rbf(1.0), [0, 1])
    text = G.to_csv()
    rows = [list(map(float, line.split(","))) for line in text.strip().splitlines()]
    np.testing.assert_array_equal(rows, G.matrix)
    assert format_float(2.0) == "2"
    assert format_float(0.1) == "0.1"
