"""Deformed inner products, weighted quadrature and beta-derivatives.

All integrals run over the momentum line with weight mu_beta(p). The
integrator is a vectorised adaptive Gauss-Kronrod (10/21) scheme on a
symmetric window [-P, P]; P is doubled until the weighted tail is
negligible. Integrands may be vector valued, in which case the whole
vector is refined on one shared set of nodes.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import model
from .errors import AccuracyError, DomainError

# 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
_XGK = np.array([
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208626368323,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
])
_WG = np.array([
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
])

_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KW = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GW = np.zeros(21)
_GW[1:10:2] = _WG
_GW[11:20:2] = _WG[::-1]

_MAX_DOUBLINGS = 60
_INITIAL_PIECES = 16
_MAX_INTERVALS = 20000


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_refinements: int = 30

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise DomainError("quadrature tolerances must be positive")
        if self.max_refinements < 1:
            raise DomainError("max_refinements must be at least 1")


@dataclass(frozen=True)
class DerivativeSpec:
    rel_step: float = 1e-4
    richardson_levels: int = 2

    def __post_init__(self):
        if not 0 < self.rel_step < 0.1:
            raise DomainError("rel_step must lie in (0, 0.1)")
        if self.richardson_levels not in (1, 2, 3):
            raise DomainError("richardson_levels must be 1, 2 or 3")


def gauss_kronrod_nodes(a, b):
    """Kronrod nodes for each interval ``[a_i, b_i]``, shape ``(m, 21)``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    return mid[:, None] + half[:, None] * _NODES[None, :], half


def _gk21(f, a, b):
    """Kronrod value, error and L1 estimates per interval.

    Returns arrays of shape ``(m,) + component_shape``.
    """
    x, half = gauss_kronrod_nodes(a, b)
    fx = np.asarray(f(x.ravel()))
    comp = fx.shape[:-1]
    fx = fx.reshape(comp + x.shape)
    fx = np.moveaxis(fx, -2, 0)  # (m, *comp, 21)
    hs = half.reshape((-1,) + (1,) * len(comp))
    kron = hs * (fx @ _KW)
    gauss = hs * (fx @ _GW)
    l1 = hs * (np.abs(fx) @ _KW)
    return kron, np.abs(kron - gauss), l1


def adaptive_integrate(f, edges, spec=QuadratureSpec(), tol_floor=None, knots=None):
    """Integrate ``f`` over ``[edges[0], edges[-1]]`` by adaptive bisection.

    ``f`` maps a 1-d array of points to an array whose last axis runs
    over those points. Returns ``(value, error, l1)``; ``tol_floor``
    optionally sets a per-component absolute tolerance (defaults to
    ``spec.abs_tol``). If ``knots`` is a list, the left/right ends of the
    final subdivision are appended to it.

    Intervals whose error estimate stops shrinking under bisection while
    already small relative to the local |f| mass are frozen as
    noise-limited: integrands built from finite differences carry a
    rounding floor that no amount of subdivision removes.
    """
    edges = np.asarray(edges, dtype=float)
    a, b = edges[:-1], edges[1:]
    parent_err = np.full(len(a), np.inf)
    length = edges[-1] - edges[0]
    atol = spec.abs_tol if tol_floor is None else tol_floor
    val_done = err_done = l1_done = 0.0
    noisy_err = 0.0
    for _ in range(spec.max_refinements + 1):
        kron, err, l1 = _gk21(f, a, b)
        total = val_done + kron.sum(axis=0)
        total_err = err_done + err.sum(axis=0)
        total_l1 = l1_done + l1.sum(axis=0)
        tol = np.maximum(atol, spec.rel_tol * np.abs(total))
        if np.all(total_err <= tol):
            if knots is not None:
                knots.extend([a, b])
            return total, total_err, total_l1
        m = len(a)
        share = ((b - a) / length).reshape((-1,) + (1,) * (kron.ndim - 1))
        within = np.all((err / (0.5 * tol * share)).reshape(m, -1) <= 1.0, axis=1)
        err_max = err.reshape(m, -1).max(axis=1)
        stagnant = err_max > 0.125 * parent_err
        small = np.all((err <= 1e-6 * l1).reshape(m, -1), axis=1)
        noisy = stagnant & small & ~within
        ok = within | noisy
        if knots is not None:
            knots.extend([a[ok], b[ok]])
        val_done = val_done + kron[ok].sum(axis=0)
        err_done = err_done + err[ok].sum(axis=0)
        l1_done = l1_done + l1[ok].sum(axis=0)
        noisy_err = noisy_err + (err[noisy].sum(axis=0) if np.any(noisy) else 0.0)
        if np.all(ok):
            break
        if 2 * np.count_nonzero(~ok) > _MAX_INTERVALS:
            break
        mid = 0.5 * (a[~ok] + b[~ok])
        pe = np.tile(err_max[~ok], 2)
        a, b = np.concatenate([a[~ok], mid]), np.concatenate([mid, b[~ok]])
        order = np.argsort(a)
        a, b, parent_err = a[order], b[order], pe[order]
    else:
        ok = np.zeros(len(a), dtype=bool)
    if np.all(ok):
        tol = np.maximum(atol, spec.rel_tol * np.abs(val_done))
        # remaining excess is rounding noise of the integrand itself
        if np.all(err_done - noisy_err <= tol):
            return val_done, err_done, l1_done
    raise AccuracyError(
        f"adaptive quadrature did not converge in {spec.max_refinements} refinements",
        estimate=total,
        error=total_err,
    )


def integrate_weighted(f, d, spec=QuadratureSpec(), *, scale=10.0, lam=None, knots=None):
    """``int dp mu_beta(p) f(p)`` over the real line.

    Parameters
    ----------
    f : callable
        Vectorised integrand; may return extra leading axes.
    d : Deformation or None
        Supplies the weight; ``None`` integrates against dp.
    scale : float
        Half-width of the first window [-P, P].
    lam : float, optional
        Envelope exponent: ``mu f`` is assumed to decay like
        ``(1 + beta p^2)^(-lam - 1)``. Without it the decay rate of the
        tail is measured from successive window doublings.
    knots : list, optional
        Collects the interval ends of every accepted subinterval.
    """
    if d is None:
        g = f
        beta = None
    else:
        beta = d.beta

        def g(p):
            return f(p) / (1.0 + beta * p * p)

    P = float(scale)
    edges = np.linspace(-P, P, _INITIAL_PIECES + 1)
    total, err, _ = adaptive_integrate(g, edges, spec, knots=knots)
    prev_mass = None
    for _ in range(_MAX_DOUBLINGS):
        ring = np.linspace(P, 2 * P, 5)
        right, e_r, l1_r = adaptive_integrate(g, ring, spec, tol_floor=spec.abs_tol / 4, knots=knots)
        left, e_l, l1_l = adaptive_integrate(
            g, -ring[::-1], spec, tol_floor=spec.abs_tol / 4, knots=knots)
        total = total + left + right
        err = err + e_l + e_r
        mass = np.max(l1_l + l1_r)
        P *= 2
        if lam is not None and beta is not None:
            r = 2.0 ** (-(2.0 * lam + 1.0))
        elif prev_mass is not None and prev_mass > 0:
            r = min(mass / prev_mass, 0.9)
        else:
            r = 0.5
        prev_mass = mass
        tail = mass * r / (1.0 - r)
        if mass <= spec.abs_tol and tail <= spec.abs_tol:
            if np.ndim(total) == 0:
                return complex(total) if np.iscomplexobj(total) else float(total)
            return total
    raise AccuracyError(
        "integration window kept growing without the tail becoming negligible",
        estimate=total, error=err,
    )


def inner_product(bra, ket, d, spec=QuadratureSpec(), **kwargs):
    """Deformed scalar product ``<bra|ket> = int mu bra* ket dp``."""

    def f(p):
        return np.conj(bra(p)) * ket(p)

    return complex(integrate_weighted(f, d, spec, **kwargs))


def momentum_scale(nmax, d, cfg):
    """Initial quadrature half-width covering the bulk of psi_0..psi_nmax."""
    lam = model.lambda_param(d, cfg)
    return 8.0 * math.sqrt((nmax + 1.0) / (lam * d.beta))


def _richardson(estimates):
    # estimates at steps h, h/2, h/4, ... of a central difference (error ~ h^2)
    table = [np.asarray(e) for e in estimates]
    j = 1
    while len(table) > 1:
        fac = 4.0**j
        table = [(fac * table[i + 1] - table[i]) / (fac - 1.0) for i in range(len(table) - 1)]
        j += 1
    return table[0]


def psi_and_derivative(nmax, p, d, cfg, spec=DerivativeSpec()):
    """``psi_n(p)`` and ``d psi_n / d beta`` for all n <= nmax.

    The derivative acts on wavefunction values at fixed p; lambda and
    the prefactor follow beta through re-evaluation. Both arrays have
    shape ``(nmax + 1,) + np.shape(p)``.
    """
    h_min = spec.rel_step / 2 ** (spec.richardson_levels - 1)
    if d.beta * h_min <= 0 or 1.0 + h_min == 1.0:
        raise DomainError("finite-difference step underflows")
    psi = model.psi_all(nmax, p, d, cfg)
    diffs = []
    for j in range(spec.richardson_levels):
        h = spec.rel_step / 2**j
        up = model.psi_all(nmax, p, d.scaled(1.0 + h), cfg)
        down = model.psi_all(nmax, p, d.scaled(1.0 - h), cfg)
        diffs.append((up - down) / (2.0 * d.beta * h))
    return psi, _richardson(diffs)


def dpsi_dbeta(n, p, d, cfg, spec=DerivativeSpec()):
    """Beta-derivative of the eigenfunction ``psi_n`` at momenta ``p``.

    Rejected alternative: differentiating the amplitudes
    sqrt(mu_beta) psi_n would move the measure's beta-dependence into
    the states; that convention does not reproduce the small-beta
    expansions of the QFI and is not used.
    """
    _, dpsi = psi_and_derivative(n, p, d, cfg, spec)
    val = dpsi[n]
    return float(val) if np.ndim(val) == 0 else val
