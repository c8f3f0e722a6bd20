"""Simulated momentum measurements and maximum-likelihood estimation of beta.

Outcomes are drawn from the Lebesgue density ``mu_beta(p) q(p|beta)`` by
inverting a tabulated CDF. Replica ``i`` of an experiment seeded with
``seed`` always uses the Philox stream keyed by ``(seed, i)``, so
replicas can run in any order or in parallel.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from . import estimation, hilbert, model
from .errors import AccuracyError, BracketError, DomainError
from .hilbert import QuadratureSpec
from .states import parse_state

MIN_GRID = 4096
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_SCAN_POINTS = 41


def replica_rng(seed, replica=0):
    """Independent generator for one replica."""
    ss = np.random.SeedSequence(int(seed) & (2**64 - 1), spawn_key=(int(replica),))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class SampleSet:
    beta_true: float
    state_descriptor: str
    seed: int
    samples: np.ndarray = field(repr=False)
    replica: int = 0

    def __len__(self):
        return len(self.samples)


@dataclass(frozen=True)
class MleResult:
    beta_hat: float
    loglik_at_hat: float
    n_samples: int
    stderr_estimate: float


class MomentumSampler:
    """Inverse-CDF sampler for momentum outcomes of ``state`` at ``d``.

    The CDF is tabulated on the knots of the adaptive quadrature of the
    density (so resolution follows the mass), each subinterval is split
    further until at least ``min_grid`` points exist, and the inverse is
    a monotone (PCHIP) interpolant.
    """

    def __init__(self, state, d, cfg, qspec=QuadratureSpec(), min_grid=MIN_GRID):
        self.state = state
        self.d = d
        self.cfg = cfg

        def density(p):
            q, _ = estimation.outcome_density(state, p, d, cfg, with_derivative=False)
            return q

        knots = []
        total = hilbert.integrate_weighted(
            density, d, qspec,
            scale=hilbert.momentum_scale(state.nmax, d, cfg),
            lam=model.lambda_param(d, cfg),
            knots=knots,
        )
        lefts = np.concatenate(knots[0::2])
        rights = np.concatenate(knots[1::2])
        order = np.argsort(lefts)
        lefts, rights = lefts[order], rights[order]

        def lebesgue(p):
            return density(p) * model.measure(d, p)

        # mass per quadrature interval decides how finely it is split
        nodes, half = hilbert.gauss_kronrod_nodes(lefts, rights)
        mass = half * (lebesgue(nodes.ravel()).reshape(nodes.shape) @ hilbert._KW)
        weight = mass / mass.sum()
        pieces = 1 + np.floor(min_grid * weight).astype(int)
        while pieces.sum() + 1 < min_grid:
            pieces += 1
        grid = [np.linspace(lo, hi, k + 1)[:-1] for lo, hi, k in zip(lefts, rights, pieces)]
        grid = np.concatenate(grid + [rights[-1:]])
        nodes, half = hilbert.gauss_kronrod_nodes(grid[:-1], grid[1:])
        cell = half * (lebesgue(nodes.ravel()).reshape(nodes.shape) @ hilbert._KW)
        if np.any(cell < -1e-14):
            raise AccuracyError("negative probability mass in CDF table", estimate=cell.min())
        cell = np.clip(cell, 0.0, None)
        cdf = np.concatenate([[0.0], np.cumsum(cell)])
        self.normalization = float(total)
        self.tabulated_mass = float(cdf[-1])
        cdf /= cdf[-1]
        self.grid = grid
        self.cdf_values = cdf
        keep = np.concatenate([[True], np.diff(cdf) > 0])
        self._inverse = PchipInterpolator(cdf[keep], grid[keep])
        self._forward = PchipInterpolator(grid, cdf)

    def cdf(self, p):
        p = np.asarray(p, dtype=float)
        out = self._forward(np.clip(p, self.grid[0], self.grid[-1]))
        return np.clip(out, 0.0, 1.0)

    def ppf(self, u):
        return self._inverse(np.asarray(u, dtype=float))

    def draw(self, count, rng):
        return self.ppf(rng.random(count))


def sample_momentum(state, d, cfg, count, seed, replica=0, sampler=None):
    """Draw ``count`` momentum outcomes; deterministic in ``(seed, replica)``."""
    if count < 1:
        raise DomainError("count must be at least 1")
    sampler = sampler or MomentumSampler(state, d, cfg)
    samples = sampler.draw(int(count), replica_rng(seed, replica))
    return SampleSet(d.beta, state.descriptor, int(seed), samples, replica)


def log_likelihood(samples, beta, cfg, state_descriptor=None):
    """``sum_i ln[mu_beta(p_i) q(p_i|beta)]`` for a sample array."""
    d = model.Deformation(beta)
    state = parse_state(state_descriptor, d, cfg)
    q, _ = estimation.outcome_density(state, samples, d, cfg, with_derivative=False)
    dens = np.maximum(q * model.measure(d, samples), estimation.DENSITY_FLOOR)
    return math.fsum(np.log(dens))


def mle_beta(samples, bracket, cfg, rtol=1e-6):
    """Maximum-likelihood estimate of beta inside ``bracket``.

    A coarse log-spaced scan picks the best cell, then golden-section
    search in ln(beta) refines it to relative width ``rtol``. The
    standard error comes from the observed information (numerical
    second derivative of the log-likelihood).
    """
    lo, hi = (float(x) for x in bracket)
    if not 0 < lo < hi:
        raise DomainError(f"invalid bracket {bracket}")
    model.Deformation(lo).require_supported()
    model.Deformation(hi).require_supported()
    data = np.asarray(samples.samples)
    desc = samples.state_descriptor

    def ll(log_beta):
        return log_likelihood(data, math.exp(log_beta), cfg, desc)

    grid = np.linspace(math.log(lo), math.log(hi), _SCAN_POINTS)
    vals = np.array([ll(x) for x in grid])
    k = int(np.argmax(vals))
    if k == 0 or k == len(grid) - 1:
        raise BracketError(
            f"likelihood maximum at bracket edge beta={math.exp(grid[k]):.3g}")
    a, b = grid[k - 1], grid[k + 1]
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = ll(x1), ll(x2)
    while b - a > rtol:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = ll(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = ll(x1)
    x_hat = 0.5 * (a + b)
    beta_hat = math.exp(x_hat)
    l_hat = ll(x_hat)
    if l_hat < max(vals[0], vals[-1]):
        raise BracketError("interior maximum below the bracket-edge likelihood")
    h = 1e-3 * beta_hat
    if beta_hat - h <= lo or beta_hat + h >= hi:
        h = 0.5 * min(beta_hat - lo, hi - beta_hat)
    lp = log_likelihood(data, beta_hat + h, cfg, desc)
    lm = log_likelihood(data, beta_hat - h, cfg, desc)
    curv = (lp - 2.0 * l_hat + lm) / (h * h)
    stderr = 1.0 / math.sqrt(-curv) if curv < 0 else math.inf
    return MleResult(beta_hat, l_hat, len(data), stderr)


@dataclass
class ExperimentSummary:
    state: str
    beta_true: float
    m: float
    omega: float
    replicas: int
    count: int
    seed: int
    beta_hats: list
    edge_hits: int
    mean: float
    variance: float
    stderr_of_mean: float
    predicted_variance_F: float
    predicted_variance_F_amended: float
    predicted_variance_F_classical_full: float
    report: dict

    def as_dict(self):
        return {
            "state": self.state,
            "beta_true": self.beta_true,
            "m": self.m,
            "omega": self.omega,
            "replicas": self.replicas,
            "count": self.count,
            "seed": self.seed,
            "edge_hits": self.edge_hits,
            "mean": self.mean,
            "variance": self.variance,
            "stderr_of_mean": self.stderr_of_mean,
            "predicted_variance": {
                "1/(M*F)": self.predicted_variance_F,
                "1/(M*F_amended)": self.predicted_variance_F_amended,
                "1/(M*F_classical_full)": self.predicted_variance_F_classical_full,
            },
            "report": self.report,
            "beta_hats": self.beta_hats,
        }


def _replica(args):
    sampler, cfg, count, seed, index, bracket = args
    ss = sample_momentum(sampler.state, sampler.d, cfg, count, seed, index, sampler)
    try:
        return mle_beta(ss, bracket, cfg).beta_hat, False
    except BracketError:
        return math.nan, True


def cr_experiment(state, beta_true, cfg, replicas, count, seed, bracket=None, map_fn=map):
    """Repeat sampling + MLE and compare the spread with Cramer-Rao predictions.

    Replicas whose likelihood peaks on the bracket edge are counted in
    ``edge_hits`` and left out of the moments. ``map_fn`` may be a
    parallel map; results are collected in replica order.
    """
    if replicas < 10:
        raise DomainError("cr_experiment needs at least 10 replicas")
    d = model.Deformation(beta_true)
    bracket = bracket or model.BETA_WINDOW
    sampler = MomentumSampler(state, d, cfg)
    jobs = [(sampler, cfg, count, seed, i, bracket) for i in range(replicas)]
    results = list(map_fn(_replica, jobs))
    hats = np.array([r[0] for r in results])
    edge_hits = sum(1 for r in results if r[1])
    good = hats[np.isfinite(hats)]
    report = estimation.fi_momentum(state, d, cfg)
    mean = float(np.mean(good)) if len(good) else math.nan
    var = float(np.var(good, ddof=1)) if len(good) > 1 else math.nan
    return ExperimentSummary(
        state=state.descriptor,
        beta_true=beta_true,
        m=cfg.m,
        omega=cfg.omega,
        replicas=replicas,
        count=count,
        seed=seed,
        beta_hats=[float(h) for h in hats],
        edge_hits=edge_hits,
        mean=mean,
        variance=var,
        stderr_of_mean=math.sqrt(var / len(good)) if len(good) > 1 else math.nan,
        predicted_variance_F=1.0 / (count * report.F),
        predicted_variance_F_amended=1.0 / (count * report.F_amended),
        predicted_variance_F_classical_full=1.0 / (count * report.F_classical_full),
        report=report.as_dict(),
    )
