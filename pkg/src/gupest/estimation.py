"""Quantum and classical Fisher information for estimating beta.

Conventions: ``d/dbeta`` acts on wavefunction values at fixed momentum,
and every scalar product is taken with the measure mu_beta at the
central beta. A momentum measurement returns outcomes with density
``q(p) = sum_n p_n |psi_n(p)|^2`` relative to ``mu_beta dp``.
"""

import functools
import math
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from . import hilbert, model
from .errors import DomainError
from .hilbert import DerivativeSpec, QuadratureSpec
from .states import PureState

#: Outcome densities below this contribute nothing to FI integrands.
DENSITY_FLOOR = 1e-300
#: Mixed-state weights below this are treated as outside the support.
WEIGHT_FLOOR = 1e-14


@dataclass(frozen=True)
class EstimationReport:
    beta: float
    H: float
    F: float
    I_mu: float
    F_amended: float
    F_classical_full: float
    R: float
    Q: float

    def as_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class TaylorReference:
    """Small-beta polynomials ``c0 + c1 beta + c2 beta^2`` for H and I_mu."""

    n: int
    h_coeffs: tuple
    imu_coeffs: tuple

    def H(self, beta):
        return _poly(self.h_coeffs, beta)

    def I_mu(self, beta):
        return _poly(self.imu_coeffs, beta)


_TAYLOR = {
    0: ((Fraction(9, 8), Fraction(-53, 8), Fraction(803, 32)),
        (Fraction(3, 4), Fraction(-3), Fraction(9))),
    1: ((Fraction(45, 8), Fraction(-351, 8), Fraction(7633, 32)),
        (Fraction(15, 4), Fraction(-45, 2), Fraction(405, 4))),
    2: ((Fraction(123, 8), Fraction(-1255, 8), Fraction(36401, 32)),
        (Fraction(39, 4), Fraction(-165, 2), Fraction(2043, 4))),
}


def _poly(coeffs, beta):
    return sum(float(c) * beta**k for k, c in enumerate(coeffs))


def taylor_reference(n):
    if n not in _TAYLOR:
        raise DomainError(f"small-beta reference only known for n in 0..2, got {n}")
    h, imu = _TAYLOR[n]
    return TaylorReference(n, h, imu)


def _quad_kwargs(nmax, d, cfg):
    return {"scale": hilbert.momentum_scale(nmax, d, cfg), "lam": model.lambda_param(d, cfg)}


@functools.lru_cache(maxsize=256)
def basis_matrices(nmax, d, cfg, qspec=QuadratureSpec(), dspec=DerivativeSpec()):
    """Gram matrices of the eigenbasis and its beta-derivatives.

    Returns ``(G, A)`` with ``G[n, m] = <d psi_n | d psi_m>`` and
    ``A[m, n] = <psi_m | d psi_n>``, both real ``(nmax+1, nmax+1)``.
    """
    k = nmax + 1

    def integrand(p):
        psi, dpsi = hilbert.psi_and_derivative(nmax, p, d, cfg, dspec)
        gram = dpsi[:, None, :] * dpsi[None, :, :]
        overlap = psi[:, None, :] * dpsi[None, :, :]
        return np.concatenate([gram.reshape(k * k, -1), overlap.reshape(k * k, -1)])

    vals = hilbert.integrate_weighted(integrand, d, qspec, **_quad_kwargs(nmax, d, cfg))
    G = vals[: k * k].reshape(k, k)
    A = vals[k * k:].reshape(k, k)
    G = 0.5 * (G + G.T)
    return G, A


def qfi_pure(state, d, cfg, qspec=QuadratureSpec(), dspec=DerivativeSpec()):
    """QFI ``4 <d psi|d psi> - 4 Im(<psi|d psi>)^2`` of a pure state."""
    G, A = basis_matrices(state.nmax, d, cfg, qspec, dspec)
    c = state.vector()
    dd = np.real(np.conj(c) @ G @ c)
    overlap = np.conj(c) @ A @ c
    return float(max(4.0 * dd - 4.0 * overlap.imag**2, 0.0))


def weight_derivatives(state, d, cfg):
    """``d p_n / d beta`` for the weights of a mixed state."""
    w = state.vector()
    if not state.beta_dependent_weights:
        return np.zeros_like(w)
    dE = np.array([model.denergy_dbeta(n, d, cfg) for n in range(len(w))])
    mean = math.fsum(w * dE)
    return -w * (dE - mean) / state.temperature


def qfi_mixed(state, d, cfg, qspec=QuadratureSpec(), dspec=DerivativeSpec()):
    """QFI of an eigenbasis-diagonal mixed state.

    Pairs with both indices outside the support are skipped; pairs with
    one index outside are summed in closed form through completeness,
    ``sum_m |<psi_m|d psi_n>|^2 = <d psi_n|d psi_n>``.
    """
    p = state.vector()
    dp = weight_derivatives(state, d, cfg)
    G, A = basis_matrices(state.nmax, d, cfg, qspec, dspec)
    support = np.flatnonzero(p > WEIGHT_FLOOR)
    ps, dps = p[support], dp[support]
    As = A[np.ix_(support, support)]  # As[m, n] = <psi_m | d psi_n>
    num = ps[None, :] * As + ps[:, None] * As.T + np.diag(dps)
    inside = 2.0 * np.sum(num**2 / (ps[None, :] + ps[:, None]))
    outside = 4.0 * np.sum(ps * (np.diag(G)[support] - np.sum(As**2, axis=0)))
    return float(max(inside + outside, 0.0))


def qfi(state, d, cfg, qspec=QuadratureSpec(), dspec=DerivativeSpec()):
    if isinstance(state, PureState):
        return qfi_pure(state, d, cfg, qspec, dspec)
    return qfi_mixed(state, d, cfg, qspec, dspec)


def outcome_density(state, p, d, cfg, dspec=DerivativeSpec(), with_derivative=True):
    """Born density ``q(p|beta)`` w.r.t. ``mu_beta dp`` and its beta-derivative."""
    if with_derivative:
        psi, dpsi = hilbert.psi_and_derivative(state.nmax, p, d, cfg, dspec)
    else:
        psi, dpsi = model.psi_all(state.nmax, p, d, cfg), None
    if isinstance(state, PureState):
        c = state.vector()
        amp = np.tensordot(c, psi, axes=1)
        q = np.abs(amp) ** 2
        if dpsi is None:
            return q, None
        damp = np.tensordot(c, dpsi, axes=1)
        return q, 2.0 * np.real(np.conj(amp) * damp)
    w = state.vector()
    q = np.tensordot(w, psi**2, axes=1)
    if dpsi is None:
        return q, None
    dw = weight_derivatives(state, d, cfg)
    dq = np.tensordot(dw, psi**2, axes=1) + 2.0 * np.tensordot(w, psi * dpsi, axes=1)
    return q, dq


def _fi_integrals(state, d, cfg, qspec, dspec):
    def integrand(p):
        q, dq = outcome_density(state, p, d, cfg, dspec)
        dlm = model.dlog_measure(d, p)
        ok = q > DENSITY_FLOOR
        qs = np.where(ok, q, 1.0)
        f_term = np.where(ok, dq * dq / qs, 0.0)
        full = np.where(ok, (dq + q * dlm) ** 2 / qs, 0.0)
        return np.stack([f_term, q * dlm * dlm, full, q])

    return hilbert.integrate_weighted(integrand, d, qspec, **_quad_kwargs(state.nmax, d, cfg))


def fi_momentum(state, d, cfg, qspec=QuadratureSpec(), dspec=DerivativeSpec()):
    """Full estimation report for a momentum measurement on ``state``.

    ``F`` is the Fisher information of q relative to mu_beta dp, ``I_mu``
    the measure term, and ``F_classical_full`` the Fisher information of
    the Lebesgue density mu_beta q (this one includes the cross term and
    governs maximum-likelihood estimation from simulated samples).
    """
    F, I_mu, F_full, _norm = (float(v) for v in _fi_integrals(state, d, cfg, qspec, dspec))
    H = qfi(state, d, cfg, qspec, dspec)
    F_amended = F + I_mu
    b2 = d.beta**2
    return EstimationReport(
        beta=d.beta,
        H=H,
        F=F,
        I_mu=I_mu,
        F_amended=F_amended,
        F_classical_full=F_full,
        R=b2 * F_amended,
        Q=b2 * H,
    )


def snr_qsnr(report):
    """``(R, Q) = (beta^2 F_amended, beta^2 H)``."""
    b2 = report.beta**2
    return b2 * report.F_amended, b2 * report.H


def qutrit_qfi_grid(thetas, phis, d, cfg, qspec=QuadratureSpec(), dspec=DerivativeSpec()):
    """QFI of the three-level superposition on a (theta, phi) grid.

    Uses the Gram matrix of psi_0..psi_2 once; the states are real so
    the imaginary-overlap term vanishes. Returns shape
    ``(len(thetas), len(phis))``.
    """
    G, _ = basis_matrices(2, d, cfg, qspec, dspec)
    th = np.asarray(thetas, dtype=float)[:, None]
    ph = np.asarray(phis, dtype=float)[None, :]
    c = np.stack(np.broadcast_arrays(
        np.cos(ph) + 0 * th, np.sin(ph) * np.sin(th), np.sin(ph) * np.cos(th)))
    return 4.0 * np.einsum("i...,ij,j...->...", c, G, c)
