import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from rkhsbuild import DensityOnGrid, c_h_constant, fbm_energy_spatial, fbm_energy_spectral
from rkhsbuild.errors import KernelDomainError
from rkhsbuild.fbm import cell_pair_weights, spectral_finiteness_integral
from rkhsbuild.verify import gaussian_bump

C_H_06 = 8.732303655178187  # 2 Gamma(0.2) sin(0.4 pi), mpmath at 30 digits: 8.73230365517818558


def bump_energy(H):
    # f_hat(u) = exp(-u^2 / 2), so (c_H / pi) int_0^inf exp(-u^2) u^(1-2H) du
    return c_h_constant(H) * math.gamma(1 - H) / (2 * math.pi)


def indicator(n=512, padding=8):
    return DensityOnGrid.from_function(lambda t: np.ones_like(t), 0.0, 1.0, n, padding)


def test_c_h_values():
    assert c_h_constant(0.75) == pytest.approx(math.sqrt(2 * math.pi), rel=1e-15)
    assert c_h_constant(0.6) == pytest.approx(C_H_06, rel=1e-15)
    mp.mp.dps = 30
    assert c_h_constant(0.6) == pytest.approx(float(2 * mp.gamma(0.2) * mp.sin(0.4 * mp.pi)), rel=1e-15)
    assert 0 < c_h_constant(1 - 1e-9) < 1e-8


@pytest.mark.parametrize("H", [0.5, 1.0, 0.2, 1.3])
def test_hurst_range(H):
    with pytest.raises(KernelDomainError):
        c_h_constant(H)
    with pytest.raises(KernelDomainError):
        fbm_energy_spatial(indicator(16), H)


def test_zero_density():
    f = DensityOnGrid(0.0, 0.1, np.zeros(64))
    assert fbm_energy_spatial(f, 0.7) == 0.0
    assert fbm_energy_spectral(f, 0.7) == 0.0


def test_indicator_energy():
    assert fbm_energy_spatial(indicator(), 0.75) == pytest.approx(8 / 3, abs=1e-3)


@pytest.mark.parametrize("H", [0.55, 0.6, 0.9])
def test_indicator_energy_other_hurst(H):
    # iint_[0,1]^2 |t-s|^(2H-2) = 1 / (H (2H - 1))
    assert fbm_energy_spatial(indicator(), H) == pytest.approx(1 / (H * (2 * H - 1)), rel=1e-10)


def test_cell_weights_against_quadrature():
    H, h = 0.7, 0.25
    w = cell_pair_weights(6, h, H)
    for m in range(6):
        def inner(t):
            return integrate.quad(lambda s: abs(t - s) ** (2 * H - 2), m * h, (m + 1) * h,
                                  points=[t] if m == 0 else None)[0]
        ref = integrate.quad(inner, 0, h)[0]
        assert w[m] == pytest.approx(ref, rel=1e-7)


def test_cell_weights_large_lags_are_accurate():
    H = 0.99
    n = 200000
    w = cell_pair_weights(n, 1.0, H)
    g = 2 * H
    mp.mp.dps = 40
    m = n - 1
    exact = (mp.mpf(m + 1) ** g - 2 * mp.mpf(m) ** g + mp.mpf(m - 1) ** g) / (g * (g - 1))
    assert w[-1] == pytest.approx(float(exact), rel=1e-9)


@pytest.mark.parametrize("H", [0.6, 0.75, 0.9])
def test_spatial_spectral_agree_on_bump(H):
    f = gaussian_bump(2048, 8.0, 8)
    a, b = fbm_energy_spatial(f, H), fbm_energy_spectral(f, H)
    assert abs(a - b) <= 1e-2 * abs(a)


@pytest.mark.parametrize("H", [0.6, 0.75, 0.9])
def test_bump_energy_closed_form(H):
    f = gaussian_bump(2048, 8.0, 8)
    assert fbm_energy_spatial(f, H) == pytest.approx(bump_energy(H), rel=1e-3)
    assert fbm_energy_spectral(f, H) == pytest.approx(bump_energy(H), rel=1e-3)


def test_finiteness_integral_of_bump():
    H = 0.75
    f = gaussian_bump(2048, 8.0, 8)
    # int |f_hat|^2 |u|^(1-2H) over the line = Gamma(1 - H)
    assert spectral_finiteness_integral(f, H) == pytest.approx(math.gamma(1 - H), rel=1e-3)


def test_translation_invariance():
    f = gaussian_bump(1024, 8.0, 8)
    for c in (0.37, -5.0, 120.0):
        assert fbm_energy_spatial(f.shifted(c), 0.7) == pytest.approx(fbm_energy_spatial(f, 0.7), rel=1e-10)


def test_reflection_invariance(rng):
    vals = rng.normal(size=300)
    f = DensityOnGrid(0.3, 0.02, vals)
    g = f.reflected()
    lo, hi = f.support
    assert g.support == pytest.approx((-hi, -lo))
    np.testing.assert_array_equal(g.values, vals[::-1])
    assert fbm_energy_spatial(g, 0.8) == pytest.approx(fbm_energy_spatial(f, 0.8), rel=1e-10)


@pytest.mark.parametrize("H", [0.6, 0.75, 0.9])
def test_scaling_law(H):
    # f(t) -> f(t / lam) / lam on the same grid spacing multiplies the energy by lam^(2H-2)
    lam = 2.0
    bump = lambda t: np.exp(-t * t / 2) / math.sqrt(2 * math.pi)  # noqa: E731
    f = DensityOnGrid.from_function(bump, -8, 8, 1024)
    g = DensityOnGrid.from_function(lambda t: bump(t / lam) / lam, -16, 16, 2048)
    ratio_spatial = fbm_energy_spatial(g, H) / fbm_energy_spatial(f, H)
    ratio_spectral = fbm_energy_spectral(g, H) / fbm_energy_spectral(f, H)
    assert ratio_spatial == pytest.approx(lam ** (2 * H - 2), rel=1e-2)
    assert ratio_spectral == pytest.approx(lam ** (2 * H - 2), rel=1e-2)


@given(st.integers(0, 2 ** 32 - 1), st.floats(0.51, 0.99))
def test_energy_is_nonnegative(seed, H):
    vals = np.random.default_rng(seed).normal(size=64)
    assert fbm_energy_spatial(DensityOnGrid(0.0, 0.05, vals), H) >= 0.0


def test_from_csv(tmp_path):
    path = tmp_path / "density.csv"
    t = np.linspace(0, 1, 11)
    path.write_text("t,f\n" + "".join(f"{float(a)!r},{float(b)!r}\n" for a, b in zip(t, 2 * t)))
    f = DensityOnGrid.from_csv(path)
    assert f.spacing == pytest.approx(0.1)
    np.testing.assert_allclose(f.values, 2 * t)


def test_nonuniform_samples_rejected():
    with pytest.raises(ValueError):
        DensityOnGrid.from_samples([0.0, 0.1, 0.3], [1, 1, 1])


def test_grid_validation():
    with pytest.raises(ValueError):
        DensityOnGrid(0.0, -1.0, [1.0])
    with pytest.raises(ValueError):
        DensityOnGrid(0.0, 1.0, [1.0, np.inf])
