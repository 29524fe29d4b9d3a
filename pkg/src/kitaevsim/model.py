"""Chain definition: site-resolved potentials and quadratic coupling matrices.

A chain is a 1-D lattice of ``L`` spinless fermion sites with hopping ``J``,
p-wave pairing of strength ``Delta`` decaying with distance as ``d**(-alpha)``,
and an on-site chemical potential that may be uniform, commensurately
modulated (Harper), incommensurately modulated (Aubry-Andre) or random
(Anderson).  The Hamiltonian is encoded by two real ``L x L`` matrices:
``A`` (symmetric, hopping + potential) and ``B`` (antisymmetric, pairing),
in the quadratic form

    H = sum_lm A[l, m] a+_l a_m + 1/2 sum_lm (B[l, m] a+_l a+_m + h.c.)

Sites are 1-based in all formulas and docs; arrays are 0-based storage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Union

import numpy as np

# Inverse golden ratio, the default quasiperiodic modulation frequency.
GOLDEN_RATIO_INVERSE = (math.sqrt(5.0) - 1.0) / 2.0

# Sentinel exponent selecting strict nearest-neighbour pairing (delta_{l,1}).
NEAREST_NEIGHBOR = math.inf


class Boundary(Enum):
    """Chain termination: open ends or a closed ring with antiperiodic wrap."""

    OPEN = "open"
    CLOSED_ANTIPERIODIC = "closed"


class ConfigError(ValueError):
    """Raised on malformed chain configuration input; carries the bad key."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"config key '{key}': {message}")


@dataclass(frozen=True)
class Uniform:
    """Constant chemical potential mu on every site."""

    mu: float = 0.0


@dataclass(frozen=True)
class Harper:
    """Commensurate sinusoidal potential mu + V sin(2 pi l p/q + phi).

    ``p`` and ``q`` must be coprime; the canonical range is 0 <= p <= q but
    larger p is admitted (the potential is exactly periodic in p -> p + q).
    """

    mu: float
    V: float
    p: int
    q: int
    phi: float = 0.0

    def __post_init__(self):
        if self.q < 1:
            raise ValueError(f"Harper q must be >= 1, got {self.q}")
        if self.p < 0:
            raise ValueError(f"Harper requires p >= 0, got p={self.p}")
        if math.gcd(self.p, self.q) != 1:
            raise ValueError(f"Harper requires gcd(p, q) = 1, got p={self.p}, q={self.q}")

    @property
    def omega(self) -> float:
        return self.p / self.q


@dataclass(frozen=True)
class AubryAndre:
    """Incommensurate sinusoidal potential mu + V sin(2 pi l omega + phi)."""

    mu: float
    V: float
    omega: float = GOLDEN_RATIO_INVERSE
    phi: float = 0.0


@dataclass(frozen=True)
class Anderson:
    """Random potential mu + u_l with u_l drawn uniformly from [-V, V].

    Draws use the PCG64 generator seeded with ``seed`` (64-bit), one draw per
    site in site order, so an identical seed reproduces the identical vector.
    """

    mu: float
    V: float
    seed: int

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError(f"Anderson seed must fit in 64 bits, got {self.seed}")


PotentialSpec = Union[Uniform, Harper, AubryAndre, Anderson]


@dataclass(frozen=True)
class ChainSpec:
    """Full physical description of one chain instance."""

    L: int
    J: float
    Delta: float
    alpha: float  # pairing decay exponent in [0, inf]; inf = nearest neighbour
    boundary: Boundary
    potential: PotentialSpec

    def __post_init__(self):
        if self.L < 1:
            raise ValueError(f"L must be >= 1, got {self.L}")
        if self.boundary is Boundary.CLOSED_ANTIPERIODIC and self.L < 2:
            raise ValueError("closed chains need L >= 2")
        if not (self.J >= 0 and math.isfinite(self.J)):
            raise ValueError(f"J must be a finite non-negative energy, got {self.J}")
        if not math.isfinite(self.Delta):
            raise ValueError(f"Delta must be finite, got {self.Delta}")
        if not self.alpha >= 0:
            raise ValueError(f"alpha must be >= 0 (or inf), got {self.alpha}")

    def with_size(self, L: int) -> "ChainSpec":
        return ChainSpec(L, self.J, self.Delta, self.alpha, self.boundary, self.potential)

    def with_boundary(self, boundary: Boundary) -> "ChainSpec":
        return ChainSpec(self.L, self.J, self.Delta, self.alpha, boundary, self.potential)


@dataclass(frozen=True)
class CouplingMatrices:
    """Quadratic-form matrices: A symmetric (hopping/potential), B antisymmetric (pairing)."""

    A: np.ndarray
    B: np.ndarray
    boundary: Boundary = Boundary.OPEN

    @property
    def L(self) -> int:
        return self.A.shape[0]


def _sin_two_pi_frac(r: np.ndarray, q: int, phi: float) -> np.ndarray:
    """sin(2 pi r/q + phi) with the exact zeros/extrema of the phi = 0 cycle.

    ``r`` holds integer residues mod q.  Reducing the argument mod q keeps
    Harper potentials exactly periodic in p -> p + q, and pinning the
    quarter-cycle values makes omega in {0, 1/2, 1} with phi = 0 collapse to
    the uniform potential bit-for-bit.
    """
    if phi == 0.0:
        out = np.sin((2.0 * np.pi / q) * r)
        out[r == 0] = 0.0
        out[2 * r == q] = 0.0
        out[4 * r == q] = 1.0
        out[4 * r == 3 * q] = -1.0
        return out
    return np.sin((2.0 * np.pi / q) * r + phi)


def potential_values(spec: PotentialSpec, L: int) -> np.ndarray:
    """Site potentials mu_l for l = 1..L as a float array of length L."""
    if L < 1:
        raise ValueError(f"L must be >= 1, got {L}")
    sites = np.arange(1, L + 1, dtype=np.int64)
    if isinstance(spec, Uniform):
        return np.full(L, float(spec.mu))
    if isinstance(spec, Harper):
        residues = (sites * spec.p) % spec.q
        return spec.mu + spec.V * _sin_two_pi_frac(residues, spec.q, spec.phi)
    if isinstance(spec, AubryAndre):
        return spec.mu + spec.V * np.sin(2.0 * np.pi * spec.omega * sites + spec.phi)
    if isinstance(spec, Anderson):
        rng = np.random.default_rng(int(spec.seed))
        return spec.mu + rng.uniform(-spec.V, spec.V, size=L)
    raise TypeError(f"unknown potential spec {type(spec).__name__}")


def pairing_coefficient(l: int, L: int, alpha: float, boundary: Boundary) -> float:
    """Dimensionless pairing amplitude d_l**(-alpha) at site distance l.

    The distance is d_l = l on an open chain and d_l = min(l, L - l) on a
    closed one.  ``alpha = NEAREST_NEIGHBOR`` selects the Kronecker delta
    delta_{l,1} regardless of boundary.
    """
    if not 1 <= l <= L - 1:
        raise ValueError(f"distance l must satisfy 1 <= l <= L-1, got l={l}, L={L}")
    if math.isinf(alpha):
        return 1.0 if l == 1 else 0.0
    d = l if boundary is Boundary.OPEN else min(l, L - l)
    return float(d) ** (-alpha)


def build_couplings(chain: ChainSpec) -> CouplingMatrices:
    """Assemble the quadratic-form matrices A and B for a chain.

    A carries -mu_l on the diagonal and -J/2 on every hopping bond; B carries
    +Delta/2 * d_l**(-alpha) above the diagonal, antisymmetrized.  On a closed
    chain every hopping or pairing term whose site index wraps past L picks up
    a factor -1 (fermion antiperiodicity a_{L+1} = -a_1).
    """
    L, J, Delta = chain.L, chain.J, chain.Delta
    closed = chain.boundary is Boundary.CLOSED_ANTIPERIODIC

    A = np.zeros((L, L))
    np.fill_diagonal(A, -potential_values(chain.potential, L))
    if L >= 2 and J != 0.0:
        i = np.arange(L - 1)
        A[i, i + 1] += -0.5 * J
        A[i + 1, i] += -0.5 * J
        if closed:
            A[L - 1, 0] += 0.5 * J  # wrap bond, antiperiodic sign
            A[0, L - 1] += 0.5 * J

    B = np.zeros((L, L))
    if Delta != 0.0:
        for l in range(1, L):
            c = pairing_coefficient(l, L, chain.alpha, chain.boundary)
            if c == 0.0:
                continue
            v = 0.5 * Delta * c
            m = np.arange(L - l)
            B[m, m + l] += v
            B[m + l, m] -= v
            if closed:
                m_wrap = np.arange(L - l, L)
                j_wrap = m_wrap + l - L
                B[m_wrap, j_wrap] -= v  # wrapped pairing, antiperiodic sign
                B[j_wrap, m_wrap] += v

    return CouplingMatrices(A=A, B=B, boundary=chain.boundary)


# --- declarative configuration (YAML key-value document) -------------------

_POTENTIAL_KINDS = ("uniform", "harper", "aubry_andre", "anderson")
_POTENTIAL_KEYS = ("kind", "mu", "V", "p", "q", "omega", "phi", "seed")
_CHAIN_KEYS = ("L", "J", "Delta", "alpha", "boundary", "potential")


def _alpha_from_config(value) -> float:
    if isinstance(value, str):
        token = value.strip().lower()
        if token == "inf":
            return NEAREST_NEIGHBOR
        try:
            value = float(token)
        except ValueError:
            raise ConfigError("alpha", f"expected a number or 'inf', got {token!r}") from None
    alpha = float(value)
    if math.isnan(alpha) or alpha < 0:
        raise ConfigError("alpha", f"must be >= 0 or 'inf', got {value!r}")
    return alpha


def _potential_from_dict(d: dict) -> PotentialSpec:
    unknown = set(d) - set(_POTENTIAL_KEYS)
    if unknown:
        raise ConfigError(f"potential.{sorted(unknown)[0]}", "unknown key")
    kind = d.get("kind")
    if kind not in _POTENTIAL_KINDS:
        raise ConfigError("potential.kind", f"expected one of {_POTENTIAL_KINDS}, got {kind!r}")
    mu = float(d.get("mu", 0.0))
    try:
        if kind == "uniform":
            return Uniform(mu=mu)
        if kind == "harper":
            return Harper(mu=mu, V=float(d["V"]), p=int(d["p"]), q=int(d["q"]),
                          phi=float(d.get("phi", 0.0)))
        if kind == "aubry_andre":
            omega = d.get("omega", GOLDEN_RATIO_INVERSE)
            return AubryAndre(mu=mu, V=float(d["V"]), omega=float(omega),
                              phi=float(d.get("phi", 0.0)))
        return Anderson(mu=mu, V=float(d["V"]), seed=int(d["seed"]))
    except KeyError as exc:
        raise ConfigError(f"potential.{exc.args[0]}", "required key missing") from None
    except ValueError as exc:
        raise ConfigError("potential", str(exc)) from None


def chain_from_dict(doc: dict) -> ChainSpec:
    """Build a ChainSpec from a parsed config document.

    Accepts nested form (a ``potential:`` mapping) or flat dotted keys
    (``potential.kind`` etc.).  Unknown keys are rejected by name.
    """
    d = dict(doc)
    potential = dict(d.pop("potential", {}) or {})
    for key in list(d):
        if key.startswith("potential."):
            potential[key.split(".", 1)[1]] = d.pop(key)
    unknown = set(d) - set(_CHAIN_KEYS)
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown key")
    for key in ("L", "J", "Delta"):
        if key not in d:
            raise ConfigError(key, "required key missing")
    boundary_token = d.get("boundary", "open")
    try:
        boundary = Boundary(boundary_token)
    except ValueError:
        raise ConfigError("boundary", f"expected 'open' or 'closed', got {boundary_token!r}") from None
    try:
        return ChainSpec(
            L=int(d["L"]),
            J=float(d["J"]),
            Delta=float(d["Delta"]),
            alpha=_alpha_from_config(d.get("alpha", NEAREST_NEIGHBOR)),
            boundary=boundary,
            potential=_potential_from_dict(potential),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("chain", str(exc)) from None


def chain_to_dict(chain: ChainSpec) -> dict:
    """Serialize a ChainSpec to the declarative key-value document form."""
    pot = chain.potential
    pd: dict = {"mu": pot.mu}
    if isinstance(pot, Uniform):
        pd["kind"] = "uniform"
    elif isinstance(pot, Harper):
        pd.update(kind="harper", V=pot.V, p=pot.p, q=pot.q, phi=pot.phi)
    elif isinstance(pot, AubryAndre):
        pd.update(kind="aubry_andre", V=pot.V, omega=pot.omega, phi=pot.phi)
    elif isinstance(pot, Anderson):
        pd.update(kind="anderson", V=pot.V, seed=int(pot.seed))
    pd = {"kind": pd.pop("kind"), **pd}
    return {
        "L": chain.L,
        "J": chain.J,
        "Delta": chain.Delta,
        "alpha": "inf" if math.isinf(chain.alpha) else chain.alpha,
        "boundary": chain.boundary.value,
        "potential": pd,
    }


def load_chain(path: str) -> ChainSpec:
    import yaml

    with open(path, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    if not isinstance(doc, dict):
        raise ConfigError("<document>", "config must be a key-value mapping")
    return chain_from_dict(doc)


def save_chain(chain: ChainSpec, path: str) -> None:
    import yaml

    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(chain_to_dict(chain), fh, sort_keys=False)
