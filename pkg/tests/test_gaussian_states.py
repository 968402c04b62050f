import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import dense_argmax, gaussian_moments_by_quadrature
from sg_edr.errors import DomainError
from sg_edr.gaussian_states import (
    CovarianceMatrix,
    GaussianState,
    StateClass,
    bogoliubov_moments,
    classify,
    contraction_time,
    evolved_variance,
    free_density,
    kennard_residual,
    moments,
    schrodinger_residual,
    squeezed_from_bogoliubov,
    v_functional,
    wavefunction,
)

widths = st.complex_numbers(min_magnitude=1e-2, max_magnitude=1e2, allow_nan=False,
                            allow_infinity=False).filter(lambda k: k.real > 1e-3 * abs(k))


def test_validation():
    with pytest.raises(DomainError):
        GaussianState(-1.0)
    with pytest.raises(DomainError):
        GaussianState(1j)
    with pytest.raises(DomainError):
        GaussianState(1.0, hbar=0.0)
    with pytest.raises(DomainError):
        GaussianState(1.0, mean_z=math.inf)


def test_json_round_trip():
    s = GaussianState(1 + 2j, mean_z=0.5, mean_p=-1.0, hbar=2.0)
    assert GaussianState.from_json(s.to_json()) == s


def test_moments_real_width():
    cm = moments(GaussianState(0.5))
    assert (cm.var_z, cm.cor_zp, cm.var_p) == (0.5, 0.0, 0.5)


def test_moments_contractive_width():
    cm = moments(GaussianState(1 + 2j))
    assert cm.var_z == pytest.approx(0.25, abs=1e-15)
    assert cm.cor_zp == pytest.approx(-2.0, abs=1e-15)
    assert cm.var_p == pytest.approx(5.0, abs=1e-14)


@pytest.mark.parametrize("k", [0.5, 1 + 2j, 2 - 0.7j, 0.1 + 0.05j])
def test_moments_against_quadrature(k):
    vz, vp, cor = gaussian_moments_by_quadrature(complex(k))
    cm = moments(GaussianState(k))
    assert cm.var_z == pytest.approx(vz, rel=1e-10)
    assert cm.var_p == pytest.approx(vp, rel=1e-10)
    assert cm.cor_zp == pytest.approx(cor, rel=1e-10, abs=1e-12)


@given(st.floats(min_value=1e-3, max_value=1e3))
def test_real_width_has_no_correlation(k):
    assert moments(GaussianState(k)).cor_zp == 0.0


@given(widths, st.floats(min_value=0.1, max_value=10.0))
def test_schrodinger_equality(k, hbar):
    cm = moments(GaussianState(k, hbar=hbar))
    scale = cm.var_z * cm.var_p
    assert abs(schrodinger_residual(cm, hbar)) <= 1e-12 * scale


def test_schrodinger_residual_arithmetic():
    assert schrodinger_residual(CovarianceMatrix(1.0, 1.0, 0.0), 1.0) == 0.75
    assert schrodinger_residual(CovarianceMatrix(0.25, 0.25, 0.0), 1.0) == -0.1875


def test_kennard_residual():
    for k in (0.1, 1.0, 7.0):
        assert abs(kennard_residual(moments(GaussianState(k)), 1.0)) < 1e-12
    assert kennard_residual(moments(GaussianState(1 + 2j)), 1.0) == pytest.approx(1.0, abs=1e-14)


@given(widths, st.floats(min_value=0.1, max_value=10.0))
def test_kennard_zero_preserved_under_real_scaling(k, c):
    before = kennard_residual(moments(GaussianState(k)), 1.0)
    after = kennard_residual(moments(GaussianState(c * k)), 1.0)
    # Im(k)/Re(k) is scale invariant, so is the residual relative to hbar^2/4
    assert (abs(before) < 1e-12) == (abs(after) < 1e-12)


def test_classify():
    assert classify(GaussianState(1 + 2j)) is StateClass.CONTRACTIVE
    assert classify(GaussianState(1 - 2j)) is StateClass.SQUEEZED
    assert classify(GaussianState(3.0)) is StateClass.MINIMUM_UNCERTAINTY
    assert classify(GaussianState(3.0), reference_k=3.0) is StateClass.COHERENT_RELATIVE_TO_SCALE
    assert classify(GaussianState(3.0), reference_k=2.0) is StateClass.MINIMUM_UNCERTAINTY
    # 1e-13 relative imaginary part counts as real
    assert classify(GaussianState(complex(3.0, 3e-13))) is StateClass.MINIMUM_UNCERTAINTY


@given(widths)
def test_contractive_iff_negative_correlation(k):
    s = GaussianState(k)
    if classify(s) is StateClass.CONTRACTIVE:
        assert moments(s).cor_zp < 0


def test_v_functional_examples():
    assert v_functional(GaussianState(0.5), 0.0, 1.0) == 0.5
    assert v_functional(GaussianState(0.5), 2.0, 1.0) == pytest.approx(2.5, abs=1e-15)
    assert v_functional(GaussianState(1 + 2j), 0.05, 1.0) == pytest.approx(0.1625, abs=1e-15)


def test_v_functional_rejects_means():
    with pytest.raises(DomainError, match="zero-mean"):
        v_functional(GaussianState(1.0, mean_z=0.1), 1.0, 1.0)


def test_evolved_variance_independent_of_means():
    a = evolved_variance(GaussianState(1 + 2j), 0.3, 1.0)
    b = evolved_variance(GaussianState(1 + 2j, mean_z=2.0, mean_p=-3.0), 0.3, 1.0)
    assert a == b


def test_contraction_time():
    s = GaussianState(1 + 2j)
    t_star = contraction_time(s, 1.0)
    assert t_star == pytest.approx(0.2, abs=1e-15)
    t_scan, _ = dense_argmax(lambda t: -evolved_variance(s, t, 1.0), 0.0, 1.0, n=100001)
    assert abs(t_scan - t_star) < 1e-5
    assert contraction_time(GaussianState(2.0), 1.0) is None
    assert contraction_time(GaussianState(1 - 2j), 1.0) is None


@given(st.floats(min_value=1e-2, max_value=1e2), st.floats(min_value=0.0, max_value=10.0),
       st.floats(min_value=0.0, max_value=10.0))
def test_real_width_variance_monotone(k, t1, t2):
    s = GaussianState(k)
    lo, hi = sorted((t1, t2))
    assert evolved_variance(s, lo, 1.0) <= evolved_variance(s, hi, 1.0)


def test_free_density():
    s = GaussianState(0.5)
    assert free_density(s, 0.0, 1.0, 0.0) == pytest.approx((2 * math.pi * 0.5) ** -0.5, rel=1e-15)
    for state, t in ((s, 0.0), (GaussianState(1 + 2j), 0.13), (GaussianState(0.2 - 1j), 2.0)):
        z = np.linspace(-60, 60, 200001)
        dz = z[1] - z[0]
        rho = free_density(state, t, 1.0, z)
        assert abs(rho.sum() * dz - 1.0) < 1e-10
        assert abs((z * z * rho).sum() * dz - v_functional(state, t, 1.0)) < 1e-10


@given(widths, st.floats(min_value=-3, max_value=3), st.floats(min_value=-3, max_value=3))
def test_wavefunction_normalised_with_requested_means(k, mz, mp):
    s = GaussianState(k, mean_z=mz, mean_p=mp)
    sd = math.sqrt(moments(s).var_z)
    z = np.linspace(mz - 40 * sd, mz + 40 * sd, 40001)
    dz = z[1] - z[0]
    psi = wavefunction(s, z)
    dens = np.abs(psi) ** 2
    assert abs(dens.sum() * dz - 1.0) < 1e-9
    assert abs((z * dens).sum() * dz - mz) < 1e-8 * max(1.0, sd)
    # <P> = hbar Im int psi* psi', with the spectral derivative of the samples
    kw = 2 * np.pi * np.fft.fftfreq(z.size, d=dz)
    dpsi = np.fft.ifft(1j * kw * np.fft.fft(psi))
    p_mean = (np.conj(psi) * dpsi).imag.sum() * dz
    assert abs(p_mean - mp) < 1e-8 * max(1.0, math.sqrt(moments(s).var_p))


def test_bogoliubov_vacuum():
    s = squeezed_from_bogoliubov(1.0, 0.0, 0.0, 1.0, 1.0)
    assert s.k == 0.5
    cm = moments(s)
    assert (cm.var_z, cm.var_p, cm.cor_zp) == (0.5, 0.5, 0.0)


def test_bogoliubov_real_squeezing():
    r = 1.0
    s = squeezed_from_bogoliubov(math.cosh(r), math.sinh(r), 0.0, 1.0, 1.0)
    cm = moments(s)
    assert cm.var_z == pytest.approx(math.exp(-2) / 2, rel=1e-14)
    assert cm.cor_zp == 0.0


def test_bogoliubov_complex_squeezing_sign():
    # The correlation implied by the wavefunction is -2 hbar Im(mu* nu); with
    # nu = i sinh r that is negative (a contractive state).
    r = 0.7
    mu, nu = math.cosh(r), 1j * math.sinh(r)
    s = squeezed_from_bogoliubov(mu, nu, 0.0, 1.0, 1.0)
    expected = -2.0 * math.sinh(r) * math.cosh(r)
    assert moments(s).cor_zp == pytest.approx(expected, rel=1e-13)
    assert bogoliubov_moments(mu, nu, 1.0, 1.0).cor_zp == pytest.approx(expected, rel=1e-13)
    vz, vp, cor = gaussian_moments_by_quadrature(s.k)
    assert cor == pytest.approx(expected, rel=1e-9)
    assert classify(s) is StateClass.CONTRACTIVE


@given(st.floats(min_value=0.0, max_value=2.0), st.floats(min_value=0.0, max_value=2 * math.pi),
       st.floats(min_value=0.0, max_value=2 * math.pi), st.floats(min_value=0.2, max_value=5.0),
       st.floats(min_value=0.2, max_value=5.0))
def test_bogoliubov_moments_match_width(r, phi, chi, m, omega):
    mu = math.cosh(r) * cmath.exp(1j * chi)
    nu = math.sinh(r) * cmath.exp(1j * phi)
    s = squeezed_from_bogoliubov(mu, nu, 0.3 - 0.2j, m, omega)
    a, b = moments(s), bogoliubov_moments(mu, nu, m, omega)
    scale = max(1.0, a.var_z, a.var_p)
    assert abs(a.var_z - b.var_z) <= 1e-9 * scale
    assert abs(a.var_p - b.var_p) <= 1e-9 * scale
    assert abs(a.cor_zp - b.cor_zp) <= 1e-9 * scale


@given(st.floats(min_value=0.0, max_value=1.5), st.floats(min_value=0.0, max_value=2 * math.pi),
       st.complex_numbers(max_magnitude=3.0))
def test_bogoliubov_means_solve_eigen_equation(r, phi, lam):
    mu, nu = math.cosh(r), math.sinh(r) * cmath.exp(1j * phi)
    s = squeezed_from_bogoliubov(mu, nu, lam, 1.0, 1.0)
    alpha = (s.mean_z + 1j * s.mean_p) / math.sqrt(2.0)
    assert abs(mu * alpha + nu * alpha.conjugate() - lam) < 1e-10
    # the packet centre sits at sqrt(2 hbar / m omega) * lambda / (mu + nu)
    assert abs(s.centre - math.sqrt(2.0) * lam / (mu + nu)) < 1e-10


def test_bogoliubov_constraint():
    with pytest.raises(DomainError, match=r"\|mu\|\^2 - \|nu\|\^2 = 1"):
        squeezed_from_bogoliubov(1.0, 0.5, 0.0, 1.0, 1.0)
