"""Probe states: eigenstates, superpositions, mixtures and thermal states.

States carry only their expansion in the oscillator eigenbasis; the
basis functions themselves depend on beta and are evaluated on demand.
Text descriptors (``n:0``, ``qubit:phi=0.3``, ``qutrit:phi=..,theta=..``,
``mix:theta=..``, ``thermal:T=..``) round-trip through
:func:`parse_state`.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import model
from .errors import DomainError
from .specfun import MAX_ORDER, _check_order

_NORM_TOL = 1e-12


@dataclass(frozen=True)
class PureState:
    """Superposition ``sum_n c_n |psi_n>``."""

    coeffs: tuple
    descriptor: str = field(default="", compare=False)

    def __post_init__(self):
        coeffs = tuple((_check_order(n), complex(c)) for n, c in self.coeffs)
        ns = [n for n, _ in coeffs]
        if len(set(ns)) != len(ns):
            raise DomainError("duplicate eigenstate index in PureState")
        norm = math.fsum(abs(c) ** 2 for _, c in coeffs)
        if abs(norm - 1.0) > _NORM_TOL:
            raise DomainError(f"PureState not normalised: sum |c|^2 = {norm!r}")
        object.__setattr__(self, "coeffs", tuple(sorted(coeffs)))

    @property
    def nmax(self):
        return max(n for n, _ in self.coeffs)

    def vector(self):
        """Dense coefficient vector of length ``nmax + 1``."""
        v = np.zeros(self.nmax + 1, dtype=complex)
        for n, c in self.coeffs:
            v[n] = c
        return v

    @property
    def is_real(self):
        return all(c.imag == 0.0 for _, c in self.coeffs)

    def norm(self):
        return math.fsum(abs(c) ** 2 for _, c in self.coeffs)


@dataclass(frozen=True)
class MixedState:
    """Eigenbasis-diagonal density matrix ``sum_n p_n |psi_n><psi_n|``.

    ``temperature`` is set for thermal states, whose weights depend on
    beta through the spectrum.
    """

    weights: tuple
    beta_dependent_weights: bool = False
    temperature: float = None
    descriptor: str = field(default="", compare=False)

    def __post_init__(self):
        weights = tuple((_check_order(n), float(w)) for n, w in self.weights)
        ns = [n for n, _ in weights]
        if len(set(ns)) != len(ns):
            raise DomainError("duplicate eigenstate index in MixedState")
        if any(w < 0 for _, w in weights):
            raise DomainError("negative weight in MixedState")
        total = math.fsum(w for _, w in weights)
        if abs(total - 1.0) > _NORM_TOL:
            raise DomainError(f"MixedState weights sum to {total!r}")
        if self.beta_dependent_weights and self.temperature is None:
            raise DomainError("beta-dependent weights need a temperature")
        object.__setattr__(self, "weights", tuple(sorted(weights)))

    @property
    def nmax(self):
        return max(n for n, _ in self.weights)

    def vector(self):
        v = np.zeros(self.nmax + 1)
        for n, w in self.weights:
            v[n] = w
        return v


@dataclass(frozen=True)
class ThermalSpec:
    T: float
    tail_tol: float = 1e-12

    def __post_init__(self):
        if not self.T > 0:
            raise DomainError("temperature must be positive")
        if not self.tail_tol > 0:
            raise DomainError("tail_tol must be positive")


def eigenstate(n):
    return PureState(((n, 1.0),), descriptor=f"n:{n}")


def qubit_superposition(phi):
    """``cos(phi) |psi_0> + sin(phi) |psi_1>``."""
    c, s = math.cos(phi), math.sin(phi)
    return PureState(_renorm([(0, c), (1, s)]), descriptor=f"qubit:phi={phi!r}")


def qutrit_superposition(phi, theta):
    """``cos(phi)|0> + sin(phi) sin(theta)|1> + sin(phi) cos(theta)|2>``."""
    cp, sp = math.cos(phi), math.sin(phi)
    coeffs = [(0, cp), (1, sp * math.sin(theta)), (2, sp * math.cos(theta))]
    return PureState(_renorm(coeffs), descriptor=f"qutrit:phi={phi!r},theta={theta!r}")


def mixture_ground_first(theta):
    c2 = math.cos(theta) ** 2
    s2 = math.sin(theta) ** 2
    tot = c2 + s2
    return MixedState(((0, c2 / tot), (1, s2 / tot)), descriptor=f"mix:theta={theta!r}")


def thermal_state(spec, d, cfg):
    """Boltzmann mixture truncated where ``exp(-(E_N - E_0)/T) < tail_tol``."""
    e0 = model.energy(0, d, cfg)
    logw = []
    n = 0
    while True:
        x = -(model.energy(n, d, cfg) - e0) / spec.T
        if math.exp(x) < spec.tail_tol:
            break
        if n > MAX_ORDER:
            raise DomainError(
                f"thermal state at T={spec.T:g} needs more than {MAX_ORDER + 1} levels; "
                "lower the temperature or raise tail_tol"
            )
        logw.append(x)
        n += 1
    w = np.exp(np.array(logw))
    w /= math.fsum(w)
    return MixedState(
        tuple(enumerate(w.tolist())),
        beta_dependent_weights=True,
        temperature=spec.T,
        descriptor=f"thermal:T={spec.T!r}",
    )


def _renorm(coeffs):
    # cos(pi/2) is 6e-17, not 0: such entries are dropped
    coeffs = [(n, c) for n, c in coeffs if abs(c) > 1e-15]
    norm = math.sqrt(math.fsum(c * c for _, c in coeffs))
    return tuple((n, c / norm) for n, c in coeffs)


def parse_state(text, d=None, cfg=None):
    """Build a state from its text descriptor.

    Thermal states need the deformation and oscillator configuration
    because their weights depend on the spectrum.
    """
    kind, _, rest = text.strip().partition(":")
    params = {}
    if kind not in ("n", "qubit", "qutrit", "mix", "thermal"):
        raise DomainError(f"unknown state kind {kind!r} in {text!r}")
    try:
        if kind != "n":
            for item in filter(None, rest.split(",")):
                key, sep, val = item.partition("=")
                if not sep:
                    raise DomainError(f"malformed state parameter {item!r} in {text!r}")
                params[key.strip()] = parse_angle(val)
        if kind == "n":
            return eigenstate(int(rest))
        if kind == "qubit":
            return qubit_superposition(params["phi"])
        if kind == "qutrit":
            return qutrit_superposition(params["phi"], params["theta"])
        if kind == "mix":
            return mixture_ground_first(params["theta"])
        if kind == "thermal":
            if d is None or cfg is None:
                raise DomainError("thermal states need beta and oscillator parameters")
            return thermal_state(ThermalSpec(params["T"]), d, cfg)
    except KeyError as exc:
        raise DomainError(f"state {text!r} is missing parameter {exc.args[0]!r}") from None
    except ValueError as exc:
        if isinstance(exc, DomainError):
            raise
        raise DomainError(f"cannot parse state {text!r}: {exc}") from None


def parse_angle(text):
    """Float, optionally written as a multiple of pi (``0.25pi``, ``pi/4``)."""
    t = text.strip().replace(" ", "")
    if "pi" not in t:
        return float(t)
    num, _, den = t.partition("/")
    head = num.replace("*", "").replace("pi", "")
    factor = float(head) if head not in ("", "+", "-") else float(head + "1")
    val = factor * math.pi
    if den:
        val /= float(den)
    return val
