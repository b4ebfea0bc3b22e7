import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special

from rkhsbuild import (
    GaussianMeasureSpec,
    KernelSpec,
    SignedMeasure,
    bessel_pairing_closed_form,
    eval_kernel,
    gaussian_even_moment,
    measure_pair,
    moment_membership,
)
from rkhsbuild.gaussian import gaussian_moment, scaled_moments

I0_OF_ONE = 1.2660658777520082  # scipy.special.i0(1.0), frozen


def test_moment_examples():
    assert gaussian_even_moment(0, 2.7) == 1.0
    assert gaussian_even_moment(1, 1.7) == pytest.approx(1.7 ** 2, rel=1e-15)
    assert gaussian_even_moment(2, 1.0) == pytest.approx(3.0, rel=1e-15)
    assert gaussian_moment(3, 1.0) == 0.0


@pytest.mark.parametrize("n,h", [(n, h) for n in (3, 10, 25, 60, 150) for h in (0.5, 1.0, 1.9)
                                 if (n, h) != (150, 1.9)])
def test_moment_against_exact_arithmetic(n, h):
    mp.mp.dps = 40
    exact = mp.factorial(2 * n) / (2 ** n * mp.factorial(n)) * mp.mpf(h) ** (2 * n)
    assert gaussian_even_moment(n, h) == pytest.approx(float(exact), rel=1e-12)


def test_moment_guards():
    with pytest.raises(OverflowError):
        gaussian_even_moment(151, 1.0)
    with pytest.raises(OverflowError):
        gaussian_even_moment(150, 1.9)  # about 1e370
    with pytest.raises(ValueError):
        gaussian_even_moment(-1, 1.0)


@pytest.mark.parametrize("h", [0.5, 1.0, math.sqrt(2), 2.0])
def test_quadrature_moments_match(h):
    mu = GaussianMeasureSpec(h, 40).materialize()
    for n in range(11):
        assert mu.moment(2 * n) == pytest.approx(gaussian_even_moment(n, h), rel=1e-8)


def test_membership_of_dirac_at_zero():
    rep = moment_membership(SignedMeasure.dirac(0.0), 20)
    assert rep.partial_sums[0] == 1.0 and rep.partial_sums[-1] == 1.0
    assert rep.verdict == "bounded"


@pytest.mark.parametrize("a", [0.3, 1.0, 2.5])
def test_membership_of_dirac(a):
    rep = moment_membership(SignedMeasure.dirac(a), 60)
    assert rep.verdict == "bounded"
    assert rep.partial_sums[-1] == pytest.approx(special.i0(2 * a), rel=1e-13)


def test_membership_of_standard_gaussian():
    rep = moment_membership(GaussianMeasureSpec(1.0).materialize(), 60)
    assert rep.verdict == "bounded"
    assert rep.partial_sums[-1] == pytest.approx(I0_OF_ONE, rel=1e-13)
    # the partial sums, from exact moments, are sum_m (1/4)^m / (m!)^2 repeated over odd n
    exact = np.cumsum([0.25 ** (n // 2) / math.factorial(n // 2) ** 2 if n % 2 == 0 else 0.0 for n in range(61)])
    np.testing.assert_allclose(rep.partial_sums, exact, rtol=1e-12)


def test_membership_of_exponential_diverges():
    # Exp with mean 2 has moments n! 2^n, so the terms are 4^n
    z, w = np.polynomial.laguerre.laggauss(60)
    mu = SignedMeasure.atomic(2.0 * z, w)
    rep = moment_membership(mu, 25)
    assert rep.verdict == "diverging"
    exact = np.cumsum(4.0 ** np.arange(26))
    np.testing.assert_allclose(rep.partial_sums, exact, rtol=1e-8)


def test_membership_report_json_fields():
    d = moment_membership(SignedMeasure.dirac(1.0), 5).to_dict()
    assert set(d) == {"n", "partial_sum", "verdict"}
    assert d["n"] == list(range(6))


def test_scaled_moments_needs_real_line():
    with pytest.raises(ValueError):
        scaled_moments(SignedMeasure.atomic([[0.0, 1.0]], [1.0]), 4)


def test_closed_form_examples():
    assert bessel_pairing_closed_form(1e-9, 1.3) == pytest.approx(1.0, abs=1e-15)
    assert bessel_pairing_closed_form(math.sqrt(2), math.sqrt(2)) == pytest.approx(2.279585302336067, rel=1e-15)
    partial = sum(0.25 ** n / math.factorial(n) ** 2 for n in range(30))
    assert bessel_pairing_closed_form(1.0, 1.0) == pytest.approx(partial, rel=1e-15)


@given(st.floats(0.05, 3.0), st.floats(0.05, 3.0))
def test_closed_form_symmetry(a, b):
    assert bessel_pairing_closed_form(a, b) == bessel_pairing_closed_form(b, a)


@pytest.mark.parametrize("a", [0.5, 1.0, math.sqrt(2), 2.0])
@pytest.mark.parametrize("b", [0.5, 1.0, math.sqrt(2), 2.0])
def test_closed_form_equals_quadrature(a, b):
    spec = KernelSpec.bessel(60)
    quad = measure_pair(spec, GaussianMeasureSpec(a).materialize(), GaussianMeasureSpec(b).materialize()).value
    closed = bessel_pairing_closed_form(a, b, 60)
    assert abs(closed - quad) <= 1e-6 * abs(closed)
    # and the closed form itself against the modified Bessel function
    assert closed == pytest.approx(special.i0(a * b), rel=1e-13)


def test_closed_form_is_kernel_value():
    assert bessel_pairing_closed_form(1.2, 0.7) == pytest.approx(eval_kernel(KernelSpec.bessel(), 0.72, 0.245), rel=1e-15)
