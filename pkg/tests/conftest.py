import mpmath
import pytest

from gupest import model


@pytest.fixture
def cfg():
    return model.OscillatorConfig()


def mp_gegenbauer(n, lam, x):
    """Explicit power series of C_n^lam at the current mpmath precision."""
    lam = mpmath.mpf(lam)
    x = mpmath.mpf(x)
    tot = mpmath.mpf(0)
    for k in range(n // 2 + 1):
        tot += ((-1) ** k * mpmath.gamma(n - k + lam)
                / (mpmath.gamma(lam) * mpmath.factorial(k) * mpmath.factorial(n - 2 * k))
                * (2 * x) ** (n - 2 * k))
    return tot


def mp_psi(n, p, beta, m_omega=1.0, dps=40):
    """High-precision eigenfunction from the textbook normalisation.

    Works at ``max(dps, current precision)`` so callers such as
    ``mpmath.diff`` can raise the precision further.
    """
    with mpmath.workdps(max(dps, mpmath.mp.dps)):
        beta = mpmath.mpf(beta)
        p = mpmath.mpf(p)
        c = m_omega * beta
        lam = (1 + mpmath.sqrt(1 + 4 / c**2)) / 2
        norm2 = (mpmath.sqrt(beta) * 2 ** (2 * lam) * mpmath.gamma(lam) ** 2
                 * mpmath.factorial(n) * (n + lam) / (2 * mpmath.pi * mpmath.gamma(n + 2 * lam)))
        s = mpmath.sqrt(beta) * p / mpmath.sqrt(1 + beta * p * p)
        return mpmath.sqrt(norm2) * (1 + beta * p * p) ** (-lam / 2) * mp_gegenbauer(n, lam, s)
