import math

import numpy as np
import pytest

from kitaevsim.bdg import (BdgSolution, diagonalize, edge_localization_width,
                           ground_state_energy, mass_gap, solve_chain)
from kitaevsim.model import (Anderson, AubryAndre, Boundary, ChainSpec,
                             CouplingMatrices, Harper, NEAREST_NEIGHBOR,
                             Uniform, build_couplings)


def test_decoupled_sites():
    mu = 0.8
    coup = CouplingMatrices(A=-mu * np.eye(3), B=np.zeros((3, 3)))
    sol = diagonalize(coup)
    assert np.allclose(sol.energies, mu)
    # occupied sites: G is the identity up to degenerate-mode sign freedom
    assert np.allclose(np.abs(sol.g), np.eye(3), atol=1e-12)
    assert np.allclose(sol.g @ sol.g.T, np.eye(3), atol=1e-12)


def test_non_finite_input_rejected():
    A = np.zeros((2, 2))
    A[0, 0] = np.nan
    with pytest.raises(ValueError):
        diagonalize(CouplingMatrices(A=A, B=np.zeros((2, 2))))


def _momentum_spectrum(L, J, Delta, mu, alpha):
    """Two-band closed-chain spectrum on the antiperiodic momentum grid.

    Independent of the real-space construction: kinetic -mu - J cos k and
    pairing Delta * sum_l sin(k l) / d_l^alpha with the shorter-arc distance.
    """
    k = (2 * np.arange(L) + 1) * np.pi / L
    eps = -mu - J * np.cos(k)
    pair = np.zeros_like(k)
    for l in range(1, L):
        if math.isinf(alpha):
            c = 1.0 if l == 1 else 0.0
        else:
            c = min(l, L - l) ** (-alpha)
        pair += c * np.sin(k * l)
    return np.sort(np.hypot(eps, Delta * pair))


@pytest.mark.parametrize("alpha", [NEAREST_NEIGHBOR, 1.5, 0.5])
def test_closed_homogeneous_matches_momentum_oracle(alpha):
    chain = ChainSpec(L=64, J=1.0, Delta=0.25, alpha=alpha,
                      boundary=Boundary.CLOSED_ANTIPERIODIC,
                      potential=Uniform(mu=0.5))
    sol = solve_chain(chain)
    expected = _momentum_spectrum(64, 1.0, 0.25, 0.5, alpha)
    assert np.abs(np.sort(sol.energies) - expected).max() < 1e-9


def test_correlation_matrix_matches_fock_oracle():
    from kitaevsim.oracle import exact_correlation_matrix, exact_ground_state

    rng = np.random.default_rng(21)
    for _ in range(4):
        chain = ChainSpec(
            L=6, J=1.0, Delta=float(rng.uniform(0.5, 1.5)),
            alpha=float(rng.uniform(0.5, 3.0)),
            boundary=Boundary.OPEN if rng.random() < 0.5 else Boundary.CLOSED_ANTIPERIODIC,
            potential=Anderson(mu=float(rng.uniform(-0.5, 0.5)), V=0.4,
                               seed=int(rng.integers(0, 2**32))))
        sol = solve_chain(chain)
        if sol.energies[0] < 0.05:
            continue
        _, gs = exact_ground_state(chain)
        assert np.abs(sol.g - exact_correlation_matrix(gs)).max() < 1e-10


def _random_spec(rng, L):
    pots = [
        Uniform(mu=float(rng.uniform(-2, 2))),
        Harper(mu=float(rng.uniform(-1, 1)), V=float(rng.uniform(0, 2)),
               p=1, q=int(rng.integers(2, 9)), phi=float(rng.uniform(0, 6.28))),
        AubryAndre(mu=float(rng.uniform(-1, 1)), V=float(rng.uniform(0, 2))),
        Anderson(mu=float(rng.uniform(-1, 1)), V=float(rng.uniform(0, 2)),
                 seed=int(rng.integers(0, 2**32))),
    ]
    return ChainSpec(L=L, J=1.0, Delta=float(rng.uniform(-1.5, 1.5)),
                     alpha=NEAREST_NEIGHBOR if rng.random() < 0.3 else float(rng.uniform(0, 3)),
                     boundary=Boundary.OPEN if rng.random() < 0.5 else Boundary.CLOSED_ANTIPERIODIC,
                     potential=pots[rng.integers(0, len(pots))])


def test_orthogonality_and_reconstruction_invariants():
    rng = np.random.default_rng(5)
    eye = np.eye(50)
    for _ in range(100):
        chain = _random_spec(rng, 50)
        coup = build_couplings(chain)
        sol = diagonalize(coup)
        assert sol.energies.min() >= -1e-12
        assert np.abs(sol.phi @ sol.phi.T - eye).max() < 1e-10
        assert np.abs(sol.psi @ sol.psi.T - eye).max() < 1e-10
        assert np.abs(sol.g @ sol.g.T - eye).max() < 1e-10
        M = coup.A + coup.B
        rebuilt = sol.phi.T @ np.diag(sol.energies) @ sol.psi
        scale = max(np.abs(M).max(), 1e-30)
        assert np.abs(rebuilt - M).max() / scale < 1e-9


def test_quasiparticle_spectrum_reproduces_many_body_gaps():
    from kitaevsim.oracle import exact_spectrum

    rng = np.random.default_rng(17)
    for count in range(20):
        L = (4, 6, 8)[count % 3]
        chain = _random_spec(rng, L)
        coup = build_couplings(chain)
        sol = diagonalize(coup)
        energies = [ground_state_energy(coup, sol)]
        for lam in sol.energies:
            energies += [e + lam for e in energies]
        assert np.abs(np.sort(energies) - exact_spectrum(chain)).max() < 1e-9


def test_duplicate_run_determinism():
    chain = ChainSpec(L=40, J=1.0, Delta=0.7, alpha=1.2, boundary=Boundary.OPEN,
                      potential=AubryAndre(mu=0.3, V=0.8, phi=1.0))
    a = solve_chain(chain)
    b = solve_chain(chain)
    for x, y in ((a.energies, b.energies), (a.phi, b.phi), (a.psi, b.psi), (a.g, b.g)):
        assert x.tobytes() == y.tobytes()


def test_mass_gap_is_smallest_energy():
    sol = BdgSolution(energies=np.array([0.001, 0.7, 1.2]),
                      phi=np.eye(3), psi=np.eye(3), g=-np.eye(3))
    assert mass_gap(sol) == pytest.approx(0.001)


def test_mass_gap_closes_on_critical_line():
    gaps = []
    for L in (100, 200, 400):
        chain = ChainSpec(L=L, J=1.0, Delta=0.25, alpha=NEAREST_NEIGHBOR,
                          boundary=Boundary.CLOSED_ANTIPERIODIC,
                          potential=Uniform(mu=1.0))
        gaps.append(mass_gap(solve_chain(chain)))
    assert gaps[1] < 0.05
    assert gaps[0] > gaps[1] > gaps[2]


def test_mass_gap_saturates_in_long_range_phase():
    gaps = []
    for L in (50, 100, 200, 400):
        chain = ChainSpec(L=L, J=1.0, Delta=1.0, alpha=0.5,
                          boundary=Boundary.CLOSED_ANTIPERIODIC,
                          potential=Uniform(mu=0.5))
        gaps.append(mass_gap(solve_chain(chain)))
    assert gaps[-1] > 0.1
    assert abs(gaps[-1] - gaps[-2]) < 0.01 * gaps[-1]


def _solution_with_profile(profile):
    L = len(profile)
    phi = np.zeros((L, L))
    psi = np.zeros((L, L))
    phi[0] = np.sqrt(profile)
    psi[0] = np.sqrt(profile)
    return BdgSolution(energies=np.zeros(L), phi=phi, psi=psi,
                       g=np.eye(L), boundary=Boundary.OPEN)


def test_elw_perfectly_localized_edge_mode():
    L = 40
    profile = np.zeros(L)
    profile[0] = profile[-1] = 0.5
    res = edge_localization_width(_solution_with_profile(profile), C=0.45)
    assert res.ell_left == res.ell_right == 1
    assert res.delta_ell == 2
    assert res.normalized_width == pytest.approx(2 / L)


def test_elw_uniform_profile():
    for L in (40, 200):
        res = edge_localization_width(_solution_with_profile(np.full(L, 1.0 / L)), C=0.45)
        expected = math.ceil(0.45 * L)
        assert res.ell_left == res.ell_right == expected
        assert res.normalized_width == pytest.approx(2 * expected / L)


def test_elw_majorana_phase_is_narrow():
    chain = ChainSpec(L=200, J=1.0, Delta=0.25, alpha=NEAREST_NEIGHBOR,
                      boundary=Boundary.OPEN, potential=Uniform(mu=0.5))
    res = edge_localization_width(solve_chain(chain), C=0.45)
    assert res.normalized_width < 0.1


def test_elw_rejects_closed_chains_and_bad_threshold():
    chain = ChainSpec(L=20, J=1.0, Delta=0.25, alpha=NEAREST_NEIGHBOR,
                      boundary=Boundary.CLOSED_ANTIPERIODIC, potential=Uniform(mu=0.5))
    sol = solve_chain(chain)
    with pytest.raises(ValueError):
        edge_localization_width(sol, C=0.45)
    open_sol = solve_chain(chain.with_boundary(Boundary.OPEN))
    with pytest.raises(ValueError):
        edge_localization_width(open_sol, C=0.6)
