import math

import numpy as np
import pytest
from numpy.polynomial.hermite import hermval

from gupest import model
from gupest.errors import DegeneracyError, DomainError

from conftest import mp_psi


def test_lambda_example(cfg):
    assert model.lambda_param(model.Deformation(0.01), cfg) == pytest.approx(100.50125, abs=1e-5)


def test_lambda_tiny_product():
    # 1/(m omega beta) = 1e6: lambda ~ 1e6 + 1/2
    lam = model.lambda_param(model.Deformation(1e-6), model.OscillatorConfig(1.0, 1.0))
    assert lam == pytest.approx(1e6 + 0.5, rel=1e-12)


def test_energy_values(cfg):
    d = model.Deformation(0.01)
    # direct evaluation of the closed form at beta = 0.01
    assert model.energy(0, d, cfg) == pytest.approx(0.50250625, abs=1e-8)
    assert model.energy(1, d, cfg) == pytest.approx(1.51251875, abs=1e-7)


@pytest.mark.parametrize("n", range(6))
def test_energy_undeformed_limit(n, cfg):
    assert model.energy(n, model.Deformation(1e-8), cfg) == pytest.approx(n + 0.5, abs=1e-6)


def test_ground_energy_slope(cfg):
    assert model.denergy_dbeta(0, model.Deformation(1e-8), cfg) == pytest.approx(0.25, abs=1e-7)


@pytest.mark.parametrize("n", [0, 1, 4])
@pytest.mark.parametrize("beta", [1e-3, 0.2])
def test_energy_derivative_matches_difference(n, beta):
    cfg = model.OscillatorConfig(2.0, 0.7)
    h = 1e-6 * beta
    fd = (model.energy(n, model.Deformation(beta + h), cfg)
          - model.energy(n, model.Deformation(beta - h), cfg)) / (2 * h)
    assert model.denergy_dbeta(n, model.Deformation(beta), cfg) == pytest.approx(fd, rel=1e-7)


def test_spectrum_monotone(cfg):
    for beta in (1e-4, 1e-2, 0.5):
        d = model.Deformation(beta)
        e = [model.energy(n, d, cfg) for n in range(10)]
        assert np.all(np.diff(e) > 0)
        # gaps widen with n in the deformed oscillator
        assert np.all(np.diff(e, 2) > 0)
    e0 = [model.energy(0, model.Deformation(b), cfg) for b in (1e-4, 1e-3, 1e-2)]
    assert np.all(np.diff(e0) > 0)


def test_config_validation():
    with pytest.raises(DomainError):
        model.OscillatorConfig(0.0, 1.0)
    with pytest.raises(DomainError):
        model.OscillatorConfig(1.0, -2.0)
    with pytest.raises(DomainError):
        model.Deformation(0.0)
    with pytest.raises(DomainError):
        model.Deformation(float("nan"))


def test_wavefunction_window(cfg):
    with pytest.raises(DomainError):
        model.psi_gegenbauer(0, 0.0, model.Deformation(2.0), cfg)
    with pytest.raises(DomainError):
        model.psi_gegenbauer(0, 0.0, model.Deformation(1e-8), cfg)


@pytest.mark.parametrize("n", [0, 1, 3, 6])
@pytest.mark.parametrize("beta", [1e-4, 1e-2, 0.5])
def test_gegenbauer_form_matches_mpmath(n, beta, cfg):
    p = np.array([-30.0, -3.0, -0.4, 0.0, 0.7, 2.0, 11.0])
    got = model.psi_gegenbauer(n, p, model.Deformation(beta), cfg)
    ref = np.array([float(mp_psi(n, x, beta)) for x in p])
    np.testing.assert_allclose(got, ref, rtol=1e-10, atol=1e-13)


def test_gegenbauer_form_other_mass():
    cfg = model.OscillatorConfig(3.0, 0.5)
    p = np.linspace(-5, 5, 7)
    got = model.psi_gegenbauer(2, p, model.Deformation(0.03), cfg)
    ref = np.array([float(mp_psi(2, x, 0.03, m_omega=1.5)) for x in p])
    np.testing.assert_allclose(got, ref, rtol=1e-10, atol=1e-13)


@pytest.mark.parametrize("n", range(5))
def test_parity(n, cfg):
    p = np.linspace(0.1, 8, 13)
    d = model.Deformation(0.05)
    np.testing.assert_allclose(model.psi_gegenbauer(n, -p, d, cfg),
                               (-1) ** n * model.psi_gegenbauer(n, p, d, cfg), rtol=1e-14)


@pytest.mark.parametrize("n", range(4))
def test_undeformed_limit_is_hermite_function(n, cfg):
    # at tiny beta the eigenfunctions approach the ordinary momentum-space
    # oscillator states, up to the phase convention
    p = np.linspace(-4, 4, 17)
    psi = model.psi_gegenbauer(n, p, model.Deformation(1e-6), cfg)
    coeffs = np.zeros(n + 1)
    coeffs[n] = 1.0
    herm = hermval(p, coeffs) * np.exp(-p * p / 2) / math.sqrt(2**n * math.factorial(n) * math.sqrt(math.pi))
    np.testing.assert_allclose(np.abs(psi), np.abs(herm), atol=1e-4)


@pytest.mark.parametrize("n", range(6))
@pytest.mark.parametrize("beta", [1e-3, 1e-2, 1e-1])
def test_hypergeometric_form_agrees(n, beta, cfg):
    d = model.Deformation(beta)
    p = np.linspace(-20, 20, 81)
    hyp = model.psi_hypergeometric(n, p, d, cfg)
    geg = model.psi_gegenbauer(n, p, d, cfg)
    assert np.max(np.abs(hyp.imag)) <= 1e-9 * max(np.max(np.abs(geg)), 1e-300)
    assert np.max(np.abs(hyp.real - geg)) <= 1e-8


def test_hypergeometric_example(cfg):
    d = model.Deformation(0.01)
    assert model.psi_hypergeometric(0, 0.0, d, cfg).real == pytest.approx(
        model.psi_gegenbauer(0, 0.0, d, cfg), rel=1e-9)


def test_hypergeometric_degenerate_lambda():
    # lambda = 2 exactly when m omega beta = 1/sqrt(2)
    cfg = model.OscillatorConfig()
    d = model.Deformation(1 / math.sqrt(2))
    assert model.lambda_param(d, cfg) == pytest.approx(2.0, abs=1e-12)
    with pytest.raises(DegeneracyError):
        model.psi_hypergeometric(1, 0.3, d, cfg)
    # the production form is fine there
    assert np.isfinite(model.psi_gegenbauer(1, 0.3, d, cfg))


def test_normalization_phase():
    assert [model.normalization_phase(n) for n in range(4)] == [1, 1j, -1, -1j]


def test_measure(cfg):
    d = model.Deformation(0.25)
    assert model.measure(d, 2.0) == pytest.approx(0.5)
    assert model.dlog_measure(d, 2.0) == pytest.approx(-2.0)
    assert model.Deformation(0.04).delta_x0 == pytest.approx(0.2)


def test_lambda_other_values(cfg):
    assert model.lambda_param(model.Deformation(1.0), cfg) == pytest.approx(1.618034, abs=1e-6)
    big = model.lambda_param(model.Deformation(1e6), cfg)
    assert 1.0 < big < 1.0 + 1e-11


def test_measure_examples():
    assert model.measure(model.Deformation(0.3), 0.0) == 1.0
    assert model.measure(model.Deformation(0.01), 10.0) == pytest.approx(0.5)
    assert model.measure(model.Deformation(0.04), 5.0) == pytest.approx(0.5)


def test_energy_examples(cfg):
    assert model.energy(2, model.Deformation(1e-12), cfg) == pytest.approx(2.5, abs=1e-10)
    assert model.denergy_dbeta(1, model.Deformation(0.01), cfg) == pytest.approx(1.253750, abs=1e-6)


def test_hypergeometric_examples(cfg):
    d = model.Deformation(0.01)
    v = model.psi_hypergeometric(1, 2.5, d, cfg)
    assert abs(v.imag) <= 1e-9 * abs(v)
    assert abs(model.psi_gegenbauer(0, 1.7, d, cfg)) == abs(model.psi_gegenbauer(0, -1.7, d, cfg))
