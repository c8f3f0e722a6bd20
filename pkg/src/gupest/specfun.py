"""Special-function kernel: log-Gamma, Gegenbauer polynomials, terminating 2F1.

Everything is double precision. Quantities involving Gamma functions of
large arguments (lambda grows like 1/beta) are handled in log space.
"""

import math

import numpy as np

from .errors import DomainError

#: Highest polynomial degree the toolkit makes accuracy claims for.
MAX_ORDER = 40

# B_{2k} / (2k (2k-1)) for the Stirling series of ln Gamma
_STIRLING = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
)

_RATIO_SWITCH = 10.0


def ln_gamma(x):
    """Natural log of the Gamma function for ``x > 0``."""
    x = float(x)
    if not x > 0.0 or math.isinf(x):
        raise DomainError(f"ln_gamma requires finite x > 0, got {x!r}")
    return math.lgamma(x)


def _stirling_tail(z):
    zi = 1.0 / z
    zi2 = zi * zi
    acc = 0.0
    for c in reversed(_STIRLING):
        acc = acc * zi2 + c
    return acc * zi


def ln_gamma_ratio(x, a):
    """Return ``ln Gamma(x + a) - ln Gamma(x)`` without cancellation.

    For large ``x`` both log-Gammas are huge and nearly equal; the
    difference is assembled from the Stirling series directly so the
    result keeps full relative precision. Requires ``x > 0`` and
    ``x + a > 0``.
    """
    x = float(x)
    a = float(a)
    if not (x > 0.0 and x + a > 0.0):
        raise DomainError(f"ln_gamma_ratio needs x > 0 and x + a > 0, got x={x}, a={a}")
    if min(x, x + a) < _RATIO_SWITCH:
        return math.lgamma(x + a) - math.lgamma(x)
    # (x+a-1/2) ln(x+a) - (x-1/2) ln x - a, rearranged
    main = (x - 0.5) * math.log1p(a / x) + a * math.log(x + a) - a
    return main + (_stirling_tail(x + a) - _stirling_tail(x))


def ln_pochhammer(x, n):
    """``ln (x)_n`` for ``x > 0`` and integer ``n >= 0``."""
    return math.fsum(math.log(x + k) for k in range(n))


def gegenbauer_all(nmax, lam, s):
    """Evaluate ``C_0 .. C_nmax`` of order ``lam`` at the points ``s``.

    Returns an array of shape ``(nmax + 1,) + np.shape(s)`` filled by the
    three-term recurrence, which is stable on [-1, 1].
    """
    if nmax < 0:
        raise DomainError("polynomial degree must be non-negative")
    if not lam > 0:
        raise DomainError(f"Gegenbauer order must be positive, got {lam}")
    s = np.asarray(s, dtype=float)
    out = np.empty((nmax + 1,) + s.shape)
    out[0] = 1.0
    if nmax >= 1:
        out[1] = 2.0 * lam * s
    for k in range(2, nmax + 1):
        out[k] = (2.0 * (k + lam - 1.0) * s * out[k - 1] - (k + 2.0 * lam - 2.0) * out[k - 2]) / k
    return out


def gegenbauer(n, lam, s):
    """Gegenbauer polynomial ``C_n^(lam)(s)``.

    Accepts scalar or array ``s``; the return type follows ``s``.
    """
    n = _check_order(n)
    if np.any(np.abs(s) > 1.0):
        raise DomainError("Gegenbauer argument must lie in [-1, 1]")
    val = gegenbauer_all(n, lam, s)[n]
    return float(val) if np.ndim(val) == 0 else val


# Double-double helpers (Dekker / Knuth error-free transformations). A value
# is a pair (hi, lo) with |lo| <= ulp(hi)/2; complex values are pairs of those.

_SPLITTER = 134217729.0  # 2**27 + 1


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _quick_two_sum(a, b):
    s = a + b
    return s, b - (s - a)


def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _dd_add(x, y):
    s, e = _two_sum(x[0], y[0])
    return _quick_two_sum(s, e + x[1] + y[1])


def _dd_neg(x):
    return -x[0], -x[1]


def _dd_mul(x, y):
    p, e = _two_prod(x[0], y[0])
    return _quick_two_sum(p, e + x[0] * y[1] + x[1] * y[0])


def _dd_div(x, y):
    q1 = x[0] / y[0]
    r = _dd_add(x, _dd_neg(_dd_mul(y, (q1, 0.0))))
    q2 = r[0] / y[0]
    r = _dd_add(r, _dd_neg(_dd_mul(y, (q2, 0.0))))
    q3 = r[0] / y[0]
    s, e = _quick_two_sum(q1, q2)
    return _dd_add((s, e), (q3, 0.0))


def _cdd(z):
    return (z.real, 0.0), (z.imag, 0.0)


def _cdd_mul(u, v):
    re = _dd_add(_dd_mul(u[0], v[0]), _dd_neg(_dd_mul(u[1], v[1])))
    im = _dd_add(_dd_mul(u[0], v[1]), _dd_mul(u[1], v[0]))
    return re, im


def _cdd_div(u, v):
    den = _dd_add(_dd_mul(v[0], v[0]), _dd_mul(v[1], v[1]))
    num = _cdd_mul(u, (v[0], _dd_neg(v[1])))
    return _dd_div(num[0], den), _dd_div(num[1], den)


def hyp2f1_terminating(n, b, c, z):
    """Terminating Gauss series ``2F1(-n, b; c; z)``.

    For z near 1/2 and large |b|, |c| the terms are O(1) while the sum
    can be many orders smaller, so each term is generated in
    double-double arithmetic and the n + 1 terms are added with
    ``math.fsum``. Raises :class:`DomainError` when ``(c)_k`` vanishes
    inside the summation range.
    """
    n = _check_order(n, cap=None)
    b = complex(b)
    c = complex(c)
    z = _cdd(complex(z))
    term = ((1.0, 0.0), (0.0, 0.0))
    parts_re = [1.0]
    parts_im = []
    for k in range(n):
        ck = c + k
        if abs(ck) <= 1e-14 * max(1.0, abs(c)):
            raise DomainError(f"(c)_k has a pole at k={k + 1} for c={c}")
        # b + k and c + k are formed exactly from the double inputs
        bk = (_two_sum(b.real, float(k)), _two_sum(b.imag, 0.0))
        ckd = (_two_sum(c.real, float(k)), _two_sum(c.imag, 0.0))
        ratio = _cdd_div(bk, ckd)
        scale = ((float(k - n), 0.0), (0.0, 0.0))
        ratio = _cdd_mul(ratio, scale)
        ratio = (_dd_div(ratio[0], (float(k + 1), 0.0)), _dd_div(ratio[1], (float(k + 1), 0.0)))
        term = _cdd_mul(_cdd_mul(term, ratio), z)
        parts_re.extend(term[0])
        parts_im.extend(term[1])
    return complex(math.fsum(parts_re), math.fsum(parts_im))


def _check_order(n, cap=MAX_ORDER):
    if isinstance(n, bool) or int(n) != n or n < 0:
        raise DomainError(f"degree must be a non-negative integer, got {n!r}")
    n = int(n)
    if cap is not None and n > cap:
        raise DomainError(f"degree {n} above supported maximum {cap}")
    return n
