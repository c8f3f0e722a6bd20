import math

import numpy as np
import pytest

from gupest import estimation, hilbert, model, states
from gupest.errors import DomainError

CFG = model.OscillatorConfig()


def _quad(f, nmax, d):
    return hilbert.integrate_weighted(f, d, scale=hilbert.momentum_scale(nmax, d, CFG),
                                      lam=model.lambda_param(d, CFG))


def test_taylor_reference_coefficients():
    assert estimation.taylor_reference(0).h_coeffs == (1.125, -6.625, 25.09375)
    assert estimation.taylor_reference(1).imu_coeffs == (3.75, -22.5, 101.25)
    assert estimation.taylor_reference(2).h_coeffs == (15.375, -156.875, 1137.53125)
    assert estimation.taylor_reference(1).H(0.01) == pytest.approx(5.2101, abs=1e-4)
    with pytest.raises(DomainError):
        estimation.taylor_reference(3)


@pytest.mark.parametrize("n", [0, 1, 2])
def test_small_beta_qfi(n):
    d = model.Deformation(1e-3)
    ref = estimation.taylor_reference(n)
    rep = estimation.fi_momentum(states.eigenstate(n), d, CFG)
    assert rep.H == pytest.approx(ref.H(1e-3), rel=1e-3)
    assert rep.I_mu == pytest.approx(ref.I_mu(1e-3), rel=1e-3)


def test_ordering_in_n():
    for beta in (1e-3, 1e-2):
        d = model.Deformation(beta)
        reps = [estimation.fi_momentum(states.eigenstate(n), d, CFG) for n in range(3)]
        assert reps[0].H < reps[1].H < reps[2].H
        assert reps[0].Q < reps[1].Q < reps[2].Q


@pytest.mark.parametrize("n", [0, 1, 3])
def test_real_eigenstate_saturates(n):
    rep = estimation.fi_momentum(states.eigenstate(n), model.Deformation(0.01), CFG)
    assert abs(rep.F - rep.H) <= 1e-8 * rep.H
    assert rep.F_amended > rep.H
    assert rep.R == pytest.approx(1e-4 * rep.F_amended)
    assert estimation.snr_qsnr(rep) == pytest.approx((rep.R, rep.Q))


def test_superposition_gram_matches_direct():
    d = model.Deformation(0.01)
    st = states.PureState(((0, 0.6), (2, 0.8j)))
    c = st.vector()

    def f(p):
        psi, dpsi = hilbert.psi_and_derivative(2, p, d, CFG)
        amp = c @ psi
        damp = c @ dpsi
        return np.stack([np.abs(damp) ** 2, np.conj(amp) * damp])

    dd, ov = _quad(f, 2, d)
    direct = 4 * dd.real - 4 * ov.imag**2
    assert estimation.qfi(st, d, CFG) == pytest.approx(direct, rel=1e-9)


def test_qubit_sin2_law():
    d = model.Deformation(1e-3)
    h0 = estimation.qfi(states.eigenstate(0), d, CFG)
    h1 = estimation.qfi(states.eigenstate(1), d, CFG)
    for phi in np.linspace(0, math.pi / 2, 9):
        h = estimation.qfi(states.qubit_superposition(phi), d, CFG)
        assert abs(h - (h0 + (h1 - h0) * math.sin(phi) ** 2)) <= 1e-3 * h1


def test_mixture_endpoints_and_interior():
    d = model.Deformation(0.01)
    for theta in (0.0, math.pi / 2):
        rep = estimation.fi_momentum(states.mixture_ground_first(theta), d, CFG)
        pure = estimation.fi_momentum(states.eigenstate(0 if theta == 0 else 1), d, CFG)
        assert rep.H == pytest.approx(pure.H, rel=1e-9)
        assert rep.F == pytest.approx(rep.H, rel=1e-4)
    for theta in (0.3, 0.8, 1.2):
        rep = estimation.fi_momentum(states.mixture_ground_first(theta), d, CFG)
        assert rep.F < rep.H


def test_mixed_qfi_closure_matches_explicit_sum():
    # spectral formula summed over an explicit basis of 26 states versus
    # the completeness closure used by qfi_mixed
    d = model.Deformation(0.01)
    st = states.mixture_ground_first(0.6)
    p = st.vector()
    big = 25
    _, A = estimation.basis_matrices(big, d, CFG)
    w = np.zeros(big + 1)
    w[: len(p)] = p
    tot = 0.0
    for n in range(big + 1):
        for m in range(big + 1):
            if w[n] + w[m] > 0:
                tot += 2 * (w[n] * A[m, n] + w[m] * A[n, m]) ** 2 / (w[n] + w[m])
    assert estimation.qfi(st, d, CFG) == pytest.approx(tot, rel=1e-6)


def test_thermal_fi_against_finite_difference():
    beta, T = 0.01, 0.4
    d = model.Deformation(beta)
    st = states.thermal_state(states.ThermalSpec(T), d, CFG)
    h = 1e-4 * beta

    def q_at(b):
        db = model.Deformation(b)
        s = states.thermal_state(states.ThermalSpec(T), db, CFG)
        assert s.nmax == st.nmax

        def q(p):
            return s.vector() @ model.psi_all(s.nmax, p, db, CFG) ** 2

        return q

    qp, qm, q0 = q_at(beta + h), q_at(beta - h), q_at(beta)

    def f(p):
        dq = (qp(p) - qm(p)) / (2 * h)
        return dq * dq / q0(p)

    oracle = _quad(f, st.nmax, d)
    rep = estimation.fi_momentum(st, d, CFG)
    assert rep.F == pytest.approx(oracle, rel=1e-5)
    assert st.beta_dependent_weights


def test_weight_derivatives_sum_to_zero():
    d = model.Deformation(0.01)
    st = states.thermal_state(states.ThermalSpec(0.7), d, CFG)
    dw = estimation.weight_derivatives(st, d, CFG)
    assert abs(dw.sum()) <= 1e-14
    assert np.all(estimation.weight_derivatives(states.mixture_ground_first(0.4), d, CFG) == 0)


def test_thermal_low_temperature_is_ground_state():
    d = model.Deformation(0.01)
    cold = estimation.fi_momentum(states.thermal_state(states.ThermalSpec(0.02), d, CFG), d, CFG)
    g = estimation.fi_momentum(states.eigenstate(0), d, CFG)
    assert cold.H == pytest.approx(g.H, rel=1e-9)
    assert cold.F == pytest.approx(g.F, rel=1e-6)


def test_qutrit_grid_matches_pure_qfi():
    d = model.Deformation(0.01)
    thetas = np.array([0.0, 0.7])
    phis = np.array([0.2, 1.3])
    grid = estimation.qutrit_qfi_grid(thetas, phis, d, CFG)
    assert grid.shape == (2, 2)
    for i, th in enumerate(thetas):
        for j, ph in enumerate(phis):
            h = estimation.qfi(states.qutrit_superposition(ph, th), d, CFG)
            assert grid[i, j] == pytest.approx(h, rel=1e-10)


def test_qfi_vanishes_for_small_m_omega():
    d = model.Deformation(0.01)
    vals = [estimation.qfi(states.eigenstate(0), d, model.OscillatorConfig(m, 1.0)) for m in (1e-1, 1e-2, 1e-3)]
    # H falls off like (m omega)^2 once m omega beta is small
    assert vals[1] / vals[0] == pytest.approx(1e-2, rel=2e-2)
    assert vals[2] / vals[1] == pytest.approx(1e-2, rel=2e-2)


def test_outcome_density_normalised():
    d = model.Deformation(0.02)
    for st in (states.qubit_superposition(0.4), states.thermal_state(states.ThermalSpec(0.5), d, CFG)):
        def f(p, st=st):
            q, dq = estimation.outcome_density(st, p, d, CFG)
            return np.stack([q, dq + q * model.dlog_measure(d, p)])

        norm, dnorm = _quad(f, st.nmax, d)
        assert norm == pytest.approx(1.0, abs=1e-10)
        assert abs(dnorm) <= 1e-7


def test_mixture_ordering_at_quarter_pi():
    rep = estimation.fi_momentum(states.mixture_ground_first(math.pi / 4), model.Deformation(0.01), CFG)
    assert rep.F < rep.H < rep.F_amended


def test_zero_qfi_gives_zero_qsnr():
    rep = estimation.EstimationReport(0.1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    assert estimation.snr_qsnr(rep) == (0.0, 0.0)


def test_report_dict():
    rep = estimation.fi_momentum(states.eigenstate(0), model.Deformation(0.01), CFG)
    assert list(rep.as_dict()) == ["beta", "H", "F", "I_mu", "F_amended", "F_classical_full", "R", "Q"]
