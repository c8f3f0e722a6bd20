"""Harmonic oscillator in the deformed algebra [x, p] = i (1 + beta p^2).

Units: hbar = 1. Momentum-space eigenfunctions are available in the
Gegenbauer form (production path) and the hypergeometric form (used to
cross-check the Gegenbauer prefactor).
"""

import math
from dataclasses import dataclass

import numpy as np

from . import specfun
from .errors import DegeneracyError, DomainError

#: Range of beta for which wavefunctions are evaluated.
BETA_WINDOW = (1e-6, 1.0)


@dataclass(frozen=True)
class OscillatorConfig:
    m: float = 1.0
    omega: float = 1.0

    def __post_init__(self):
        if not (self.m > 0 and math.isfinite(self.m)):
            raise DomainError(f"mass must be positive, got {self.m}")
        if not (self.omega > 0 and math.isfinite(self.omega)):
            raise DomainError(f"omega must be positive, got {self.omega}")

    @property
    def k(self):
        """Spring constant m omega^2."""
        return self.m * self.omega**2

    @property
    def a(self):
        """Oscillator length 1/sqrt(m omega)."""
        return math.sqrt(1.0 / (self.m * self.omega))

    @property
    def m_omega(self):
        return self.m * self.omega


@dataclass(frozen=True)
class Deformation:
    """Deformation strength ``beta`` (inverse squared momentum).

    Any positive ``beta`` can be stored so that limits of the spectrum
    can be probed; eigenfunctions additionally require ``beta`` inside
    :data:`BETA_WINDOW`.
    """

    beta: float

    def __post_init__(self):
        if not (self.beta > 0 and math.isfinite(self.beta)):
            raise DomainError(f"beta must be positive and finite, got {self.beta}")

    @property
    def delta_x0(self):
        """Minimal position uncertainty sqrt(beta)."""
        return math.sqrt(self.beta)

    def scaled(self, factor):
        return Deformation(self.beta * factor)

    def require_supported(self):
        lo, hi = BETA_WINDOW
        # slack so that finite-difference stencils at the window edge pass
        if not (lo * (1 - 1e-3) <= self.beta <= hi * (1 + 1e-3)):
            raise DomainError(f"beta={self.beta:g} outside supported window [{lo:g}, {hi:g}]")


def lambda_param(d, cfg):
    """Gegenbauer order ``lambda = (1 + sqrt(1 + 4/(m omega beta)^2)) / 2``."""
    c = cfg.m_omega * d.beta
    # sqrt(1 + 4/c^2) = sqrt(c^2 + 4)/c, safer for tiny c
    return 0.5 * (1.0 + math.hypot(c, 2.0) / c)


def measure(d, p):
    """Integration measure ``1 / (1 + beta p^2)``."""
    p = np.asarray(p, dtype=float)
    out = 1.0 / (1.0 + d.beta * p * p)
    return float(out) if out.ndim == 0 else out


def dlog_measure(d, p):
    """``d/dbeta ln mu_beta(p) = -p^2 / (1 + beta p^2)``."""
    p = np.asarray(p, dtype=float)
    p2 = p * p
    return -p2 / (1.0 + d.beta * p2)


def energy(n, d, cfg):
    n = specfun._check_order(n, cap=None)
    b = d.beta
    root = math.sqrt(b * b + 4.0 * cfg.a**4)
    return 0.5 * cfg.k * ((n + 0.5) * (b + root) + b * n * n)


def denergy_dbeta(n, d, cfg):
    """Analytic beta-derivative of :func:`energy`."""
    n = specfun._check_order(n, cap=None)
    b = d.beta
    root = math.sqrt(b * b + 4.0 * cfg.a**4)
    return 0.5 * cfg.k * ((n + 0.5) * (1.0 + b / root) + n * n)


def ln_prefactor(n, lam, beta):
    """Log of the Gegenbauer-form normalisation for degree ``n``.

    The Gamma factors are combined through the duplication formula into
    Gamma(lam)/Gamma(lam + 1/2), which stays accurate for lam ~ 1e6.
    """
    return (
        0.25 * math.log(beta / math.pi)
        - 0.5 * specfun.ln_gamma_ratio(lam, 0.5)
        + 0.5 * (math.lgamma(n + 1.0) + math.log(lam + n) - specfun.ln_pochhammer(2.0 * lam, n))
    )


def psi_all(nmax, p, d, cfg):
    """Eigenfunctions ``psi_0 .. psi_nmax`` at momenta ``p``.

    Returns shape ``(nmax + 1,) + np.shape(p)``; all degrees share one
    Gegenbauer recurrence.
    """
    specfun._check_order(nmax)
    d.require_supported()
    lam = lambda_param(d, cfg)
    p = np.asarray(p, dtype=float)
    bp2 = d.beta * p * p
    s = p * np.sqrt(d.beta / (1.0 + bp2))
    s = np.clip(s, -1.0, 1.0)
    log_env = -0.5 * lam * np.log1p(bp2)
    pref = np.array([ln_prefactor(n, lam, d.beta) for n in range(nmax + 1)])
    pref = pref.reshape((-1,) + (1,) * p.ndim)
    return np.exp(pref + log_env) * specfun.gegenbauer_all(nmax, lam, s)


def psi_gegenbauer(n, p, d, cfg):
    """Normalised eigenfunction of degree ``n`` (Gegenbauer form)."""
    n = specfun._check_order(n)
    val = psi_all(n, p, d, cfg)[n]
    return float(val) if np.ndim(val) == 0 else val


def ln_abs_normalization(n, lam, beta):
    """``ln |N_n|`` for the hypergeometric form.

    ``sin(pi lam) Gamma(1 - n - lam)`` is replaced by its reflection
    value ``(-1)^n pi / Gamma(n + lam)``, so no pole is ever evaluated.
    """
    return (
        -0.5 * math.log(math.pi)
        + 0.25 * math.log(beta)
        + (lam + n - 0.5) * math.log(2.0)
        + math.lgamma(n + lam)
        + 0.5 * (math.log(lam + n) - math.lgamma(n + 1.0) - math.lgamma(n + 2.0 * lam))
    )


def normalization_phase(n):
    # (-i)^n / (-1)^n from the reflection sign
    return 1j**n


def psi_hypergeometric(n, p, d, cfg):
    """Eigenfunction of degree ``n`` from the terminating 2F1 form.

    Validation path only. Raises :class:`DegeneracyError` when lambda is
    within 1e-6 of an integer, where ``2F1(.; 1 - n - lam; .)`` meets a
    pole.
    """
    n = specfun._check_order(n)
    d.require_supported()
    lam = lambda_param(d, cfg)
    if abs(lam - round(lam)) < 1e-6:
        raise DegeneracyError(f"lambda={lam} is too close to an integer; use psi_gegenbauer")
    p_arr = np.atleast_1d(np.asarray(p, dtype=float))
    sb = math.sqrt(d.beta)
    ln_norm = ln_abs_normalization(n, lam, d.beta)
    phase = normalization_phase(n)
    b = 1.0 - n - 2.0 * lam
    c = 1.0 - n - lam
    out = np.empty(p_arr.shape, dtype=complex)
    for i, pv in enumerate(p_arr):
        f = specfun.hyp2f1_terminating(n, b, c, 0.5 * (1.0 + 1j * pv * sb))
        mag = math.exp(ln_norm - 0.5 * (n + lam) * math.log1p(d.beta * pv * pv))
        out[i] = phase * mag * f
    if np.ndim(p) == 0:
        return complex(out[0])
    return out
