"""Topological indicators: transfer-matrix invariant, Berry winding, Pfaffian signs.

Three complementary Z2 diagnostics:

* ``transfer_matrix_invariant`` works for any site-resolved potential but only
  for nearest-neighbour pairing; it classifies the decay of the zero-energy
  boundary recursion (Lyapunov growth of the transfer-matrix product).
* ``berry_winding`` works for homogeneous chains at any pairing range; it is
  the Brillouin-zone winding of the two-band Bloch vector.
* ``pfaffian_sign`` gives the momentum-space Pfaffian signs at the
  self-conjugate momenta k = 0, pi; for long-range pairing (alpha < 1) the
  k = 0 sign is ill-defined and only the k = pi sign remains usable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

#: |ln lambda_2| below this is reported as critical/undecided, not 0 or 1.
UNDECIDED_BAND = 1e-6


class UndecidedInvariantError(RuntimeError):
    """Transfer-matrix growth too close to zero to classify the phase."""

    def __init__(self, log_lambda: float):
        self.log_lambda = log_lambda
        super().__init__(
            f"|ln lambda_2| = {abs(log_lambda):.3e} is inside the critical band"
        )


class GapClosureError(RuntimeError):
    """A momentum-space gap closure makes the requested index ill-defined."""


@dataclass(frozen=True)
class TopoResult:
    """Bundle of topological indicators for one configuration.

    ``berry_winding`` carries the closed-boundary shift +1/2 already applied
    when alpha < 1, so it reads 1 in the phase with (massive) edge modes and
    0 in the trivial one for every pairing range.  Entries are None where the
    corresponding index is not defined (finite-alpha transfer matrix,
    zeta at alpha < 1, critical points).
    """

    nu: Optional[int]
    berry_winding: Optional[float]
    zeta: Optional[int]
    zeta_tilde: Optional[int]


def transfer_matrix_log_growth(mu_values, Delta: float, J: float) -> float:
    """ln |lambda_2| of the boundary-mode transfer-matrix product.

    The single-step matrix in the couplings of the chain Hamiltonian
    (hopping J/2, pairing Delta/2, potential mu_j) is

        D_j = [[2 mu_j / (Delta + J), (Delta - J) / (Delta + J)], [1, 0]]

    The product over j = 1..L is accumulated with per-step Frobenius
    rescaling, tracking the sum of log scales, so the growth rate survives
    far beyond the naive overflow length.
    """
    mu_values = np.asarray(mu_values, dtype=float)
    if mu_values.ndim != 1 or mu_values.size < 1:
        raise ValueError("mu_values must be a non-empty vector")
    denom = Delta + J
    if denom == 0.0:
        raise ValueError("transfer matrix undefined for Delta + J = 0")
    off = (Delta - J) / denom
    P = np.eye(2)
    log_scale = 0.0
    for mu in mu_values:
        D = np.array([[2.0 * mu / denom, off], [1.0, 0.0]])
        P = D @ P
        norm = math.sqrt(float((P * P).sum()))
        if norm == 0.0:
            # exactly nilpotent product (e.g. Delta = J with mu_j = 0):
            # both eigenvalues vanish, maximal decay
            return -math.inf
        P /= norm
        log_scale += math.log(norm)
    lam_max = float(np.abs(np.linalg.eigvals(P)).max())
    if lam_max == 0.0:
        return -math.inf
    return float(math.log(lam_max) + log_scale)


def transfer_matrix_invariant(mu_values, Delta: float, J: float,
                              undecided_band: float = UNDECIDED_BAND) -> int:
    """Z2 invariant nu = (1 - sgn ln|lambda_2|) / 2 for nearest-neighbour chains.

    Returns 1 (topological, both boundary solutions decay) or 0 (trivial).
    Raises UndecidedInvariantError when the growth rate sits inside the
    critical band instead of forcing a side.
    """
    g = transfer_matrix_log_growth(mu_values, Delta, J)
    if abs(g) < undecided_band:
        raise UndecidedInvariantError(g)
    return 0 if g > 0 else 1


def pairing_fourier(k, alpha: float, cutoff: int) -> np.ndarray:
    """f_alpha(k) = sum_{l=1}^{cutoff} sin(k l) / l^alpha (sin k for alpha = inf)."""
    k = np.atleast_1d(np.asarray(k, dtype=float))
    if math.isinf(alpha):
        return np.sin(k)
    ls = np.arange(1, cutoff + 1, dtype=float)
    weights = ls ** (-alpha)
    return np.sin(np.outer(k, ls)) @ weights


def berry_winding(J: float, Delta: float, mu: float, alpha: float,
                  n_k: int = 2048) -> float:
    """Winding (i/pi) closed-integral <u_k | d_k u_k> of the lower Bloch band.

    The two-band Bloch Hamiltonian of the homogeneous chain has kinetic
    component -J cos k - mu and pairing component Delta f_alpha(k) with the
    finite-sum Fourier kernel truncated at n_k terms.  The winding is
    accumulated link by link on a grid offset by half a step so that k = 0
    is never sampled; for alpha < 1 the link crossing k = 0 is excluded
    (the kernel is singular there and contributes exactly a half winding,
    which the closed-boundary convention adds back as +1/2), while for
    alpha >= 1 the loop is closed and the result is an integer.
    """
    if n_k < 64 or n_k % 2:
        raise ValueError(f"n_k must be even and >= 64, got {n_k}")
    k = (np.arange(n_k) + 0.5) * (2.0 * np.pi / n_k)
    d_z = -J * np.cos(k) - mu
    d_y = Delta * pairing_fourier(k, alpha, cutoff=n_k)
    if float(np.hypot(d_z, d_y).min()) < 1e-8:
        raise GapClosureError("Bloch gap closes on the momentum grid; winding undefined")
    theta = np.arctan2(d_y, d_z)
    steps = np.diff(theta)
    if alpha >= 1.0 or math.isinf(alpha):
        steps = np.append(steps, theta[0] - theta[-1])
    steps = (steps + np.pi) % (2.0 * np.pi) - np.pi
    return float(-steps.sum() / (2.0 * np.pi))


def pfaffian_sign(J: float, Delta: float, mu: float,
                  alpha: float) -> tuple[Optional[int], int]:
    """Pfaffian signs (zeta, zeta_tilde) at the self-conjugate momenta.

    The pairing kernel vanishes at k = 0 and k = pi, so the Pfaffian signs
    reduce to the signs of the kinetic terms there: zeta = sign[(mu + J)
    (mu - J)] and zeta_tilde = sign Pf M(pi) = sign(J - mu).  For alpha < 1
    the k = 0 matrix is singular and zeta is None.
    """
    eps_0 = -(J + mu)
    eps_pi = J - mu
    scale = max(1.0, abs(J), abs(mu))
    if min(abs(eps_0), abs(eps_pi)) < 1e-12 * scale:
        raise GapClosureError("kinetic term vanishes at a self-conjugate momentum")
    zeta_tilde = 1 if eps_pi > 0 else -1
    zeta: Optional[int] = None
    if alpha >= 1.0 or math.isinf(alpha):
        zeta = 1 if eps_0 * eps_pi > 0 else -1
    return zeta, zeta_tilde


def topo_result(J: float, Delta: float, mu: float, alpha: float,
                L: int = 200, n_k: int = 2048) -> TopoResult:
    """All indicators for a homogeneous chain; None where undefined."""
    nu: Optional[int] = None
    if math.isinf(alpha):
        try:
            nu = transfer_matrix_invariant(np.full(L, mu), Delta, J)
        except (UndecidedInvariantError, ValueError):
            nu = None
    winding: Optional[float] = None
    try:
        winding = berry_winding(J, Delta, mu, alpha, n_k=n_k)
        if alpha < 1.0:
            winding += 0.5
    except GapClosureError:
        winding = None
    try:
        zeta, zeta_tilde = pfaffian_sign(J, Delta, mu, alpha)
    except GapClosureError:
        zeta, zeta_tilde = None, None
    return TopoResult(nu=nu, berry_winding=winding, zeta=zeta, zeta_tilde=zeta_tilde)
