import math

import numpy as np
import pytest

from kitaevsim.model import (Anderson, AubryAndre, Boundary, ChainSpec,
                             ConfigError, GOLDEN_RATIO_INVERSE, Harper,
                             NEAREST_NEIGHBOR, Uniform, build_couplings,
                             chain_from_dict, chain_to_dict, load_chain,
                             pairing_coefficient, potential_values, save_chain)


def test_harper_half_frequency_is_exactly_uniform():
    # sin(pi * l) terms must vanish exactly, not to rounding
    vals = potential_values(Harper(mu=0.3, V=5.0, p=1, q=2, phi=0.0), 4)
    assert vals.tolist() == [0.3, 0.3, 0.3, 0.3]


def test_uniform_values():
    assert potential_values(Uniform(mu=-1.0), 3).tolist() == [-1.0, -1.0, -1.0]


def test_anderson_range_and_determinism():
    a = potential_values(Anderson(mu=0.0, V=1.0, seed=42), 200)
    b = potential_values(Anderson(mu=0.0, V=1.0, seed=42), 200)
    assert np.all(np.abs(a) <= 1.0)
    assert a.tobytes() == b.tobytes()
    c = potential_values(Anderson(mu=0.0, V=1.0, seed=43), 200)
    assert a.tobytes() != c.tobytes()


def test_anderson_zero_strength_reduces_to_uniform():
    a = potential_values(Anderson(mu=0.7, V=0.0, seed=5), 64)
    u = potential_values(Uniform(mu=0.7), 64)
    assert a.tobytes() == u.tobytes()


def test_harper_periodicity_in_p():
    base = Harper(mu=0.1, V=0.9, p=3, q=7, phi=0.4)
    shifted = Harper(mu=0.1, V=0.9, p=10, q=7, phi=0.4)
    a = potential_values(base, 50)
    b = potential_values(shifted, 50)
    assert a.tobytes() == b.tobytes()


@pytest.mark.parametrize("p,q", [(0, 1), (1, 2), (1, 1)])
def test_harper_trivial_frequencies_reduce_to_uniform(p, q):
    vals = potential_values(Harper(mu=-0.4, V=3.0, p=p, q=q, phi=0.0), 33)
    assert vals.tolist() == [-0.4] * 33


def test_harper_validation():
    with pytest.raises(ValueError):
        Harper(mu=0.0, V=1.0, p=2, q=4)  # not coprime
    with pytest.raises(ValueError):
        Harper(mu=0.0, V=1.0, p=-1, q=4)  # negative p
    with pytest.raises(ValueError):
        Anderson(mu=0.0, V=1.0, seed=2**64)


def test_aubry_andre_default_frequency():
    assert AubryAndre(mu=0.0, V=1.0).omega == GOLDEN_RATIO_INVERSE
    vals = potential_values(AubryAndre(mu=0.2, V=0.5, phi=0.1), 5)
    sites = np.arange(1, 6)
    expected = 0.2 + 0.5 * np.sin(2 * np.pi * GOLDEN_RATIO_INVERSE * sites + 0.1)
    assert np.allclose(vals, expected, atol=0, rtol=0)


def test_pairing_coefficient_examples():
    assert pairing_coefficient(3, 10, 1.0, Boundary.OPEN) == pytest.approx(1 / 3)
    assert pairing_coefficient(7, 10, 2.0, Boundary.CLOSED_ANTIPERIODIC) == pytest.approx(1 / 9)
    assert pairing_coefficient(2, 10, NEAREST_NEIGHBOR, Boundary.OPEN) == 0.0
    assert pairing_coefficient(1, 10, NEAREST_NEIGHBOR, Boundary.OPEN) == 1.0
    assert pairing_coefficient(5, 9, 0.0, Boundary.OPEN) == 1.0


def test_pairing_coefficient_range_contract():
    with pytest.raises(ValueError):
        pairing_coefficient(0, 10, 1.0, Boundary.OPEN)
    with pytest.raises(ValueError):
        pairing_coefficient(10, 10, 1.0, Boundary.OPEN)


def test_build_couplings_two_site_hopping():
    chain = ChainSpec(L=2, J=1.0, Delta=0.0, alpha=NEAREST_NEIGHBOR,
                      boundary=Boundary.OPEN, potential=Uniform(mu=0.0))
    coup = build_couplings(chain)
    assert coup.A.tolist() == [[0.0, -0.5], [-0.5, 0.0]]
    assert coup.B.tolist() == [[0.0, 0.0], [0.0, 0.0]]


def test_build_couplings_two_site_pairing():
    chain = ChainSpec(L=2, J=0.0, Delta=1.0, alpha=2.5,
                      boundary=Boundary.OPEN, potential=Uniform(mu=0.0))
    coup = build_couplings(chain)
    assert coup.B.tolist() == [[0.0, 0.5], [-0.5, 0.0]]
    assert coup.A.tolist() == [[0.0, 0.0], [0.0, 0.0]]


def _random_chain(rng, L):
    kind = rng.integers(0, 4)
    mu = float(rng.uniform(-2, 2))
    if kind == 0:
        pot = Uniform(mu=mu)
    elif kind == 1:
        pot = Harper(mu=mu, V=float(rng.uniform(0, 2)), p=1, q=int(rng.integers(2, 9)),
                     phi=float(rng.uniform(0, 2 * np.pi)))
    elif kind == 2:
        pot = AubryAndre(mu=mu, V=float(rng.uniform(0, 2)))
    else:
        pot = Anderson(mu=mu, V=float(rng.uniform(0, 2)), seed=int(rng.integers(0, 2**32)))
    alpha = NEAREST_NEIGHBOR if rng.random() < 0.3 else float(rng.uniform(0, 4))
    boundary = Boundary.OPEN if rng.random() < 0.5 else Boundary.CLOSED_ANTIPERIODIC
    return ChainSpec(L=L, J=float(rng.uniform(0.1, 2)), Delta=float(rng.uniform(-2, 2)),
                     alpha=alpha, boundary=boundary, potential=pot)


def test_coupling_symmetry_is_entry_exact():
    rng = np.random.default_rng(11)
    for _ in range(25):
        coup = build_couplings(_random_chain(rng, int(rng.integers(2, 40))))
        assert np.array_equal(coup.A, coup.A.T)
        assert np.array_equal(coup.B, -coup.B.T)


def test_nearest_neighbor_equals_large_alpha_limit():
    # open chains: the shorter-arc distance of a closed chain keeps the
    # l = L-1 term at distance 1 for every finite alpha, so only the open
    # coefficient converges to the Kronecker delta (see decisions ledger)
    for L in (50, 400):
        base = dict(L=L, J=1.0, Delta=0.8, boundary=Boundary.OPEN,
                    potential=Uniform(mu=0.3))
        b_nn = build_couplings(ChainSpec(alpha=NEAREST_NEIGHBOR, **base)).B
        b_60 = build_couplings(ChainSpec(alpha=60.0, **base)).B
        assert np.abs(b_nn - b_60).max() < 1e-15 * 0.8


def test_closed_couplings_match_fock_oracle_spectrum():
    # literal term-by-term expansion on 2^6 states, spectrum to 1e-10
    from kitaevsim.bdg import diagonalize, ground_state_energy
    from kitaevsim.oracle import exact_spectrum

    chain = ChainSpec(L=6, J=1.0, Delta=1.0, alpha=1.0,
                      boundary=Boundary.CLOSED_ANTIPERIODIC,
                      potential=Uniform(mu=0.5))
    coup = build_couplings(chain)
    sol = diagonalize(coup)
    e0 = ground_state_energy(coup, sol)
    quadratic = [e0]
    for lam in sol.energies:
        quadratic += [e + lam for e in quadratic]
    assert np.abs(np.sort(quadratic) - exact_spectrum(chain)).max() < 1e-10


def test_chain_spec_validation():
    with pytest.raises(ValueError):
        ChainSpec(L=0, J=1.0, Delta=0.0, alpha=1.0, boundary=Boundary.OPEN,
                  potential=Uniform())
    with pytest.raises(ValueError):
        ChainSpec(L=1, J=1.0, Delta=0.0, alpha=1.0,
                  boundary=Boundary.CLOSED_ANTIPERIODIC, potential=Uniform())
    with pytest.raises(ValueError):
        ChainSpec(L=4, J=-1.0, Delta=0.0, alpha=1.0, boundary=Boundary.OPEN,
                  potential=Uniform())
    with pytest.raises(ValueError):
        ChainSpec(L=4, J=1.0, Delta=0.0, alpha=-0.5, boundary=Boundary.OPEN,
                  potential=Uniform())


def test_config_round_trip(tmp_path):
    chain = ChainSpec(L=128, J=1.0, Delta=0.25, alpha=NEAREST_NEIGHBOR,
                      boundary=Boundary.CLOSED_ANTIPERIODIC,
                      potential=Harper(mu=0.1, V=0.5, p=3, q=8, phi=0.25))
    path = tmp_path / "chain.yaml"
    save_chain(chain, str(path))
    text = path.read_text()
    for token in ("L:", "J:", "Delta:", "alpha: inf", "boundary: closed",
                  "kind: harper"):
        assert token in text
    assert load_chain(str(path)) == chain


def test_config_flat_dotted_keys():
    doc = {"L": 16, "J": 1.0, "Delta": 0.5, "alpha": 2.0, "boundary": "open",
           "potential.kind": "anderson", "potential.mu": 0.0,
           "potential.V": 1.0, "potential.seed": 7}
    chain = chain_from_dict(doc)
    assert chain.potential == Anderson(mu=0.0, V=1.0, seed=7)


def test_config_errors_name_the_offending_key():
    with pytest.raises(ConfigError) as err:
        chain_from_dict({"L": 8, "J": 1.0, "Delta": 0.1, "Jx": 2.0})
    assert "Jx" in str(err.value)
    with pytest.raises(ConfigError) as err:
        chain_from_dict({"L": 8, "J": 1.0, "Delta": 0.1,
                         "potential": {"kind": "harper", "V": 1.0, "q": 4}})
    assert "potential.p" in str(err.value)
    with pytest.raises(ConfigError) as err:
        chain_from_dict({"J": 1.0, "Delta": 0.1})
    assert "'L'" in str(err.value)
    with pytest.raises(ConfigError) as err:
        chain_from_dict({"L": 8, "J": 1.0, "Delta": 0.1, "alpha": "huge"})
    assert "alpha" in str(err.value)


def test_alpha_inf_round_trips_through_dict():
    chain = ChainSpec(L=8, J=1.0, Delta=0.3, alpha=NEAREST_NEIGHBOR,
                      boundary=Boundary.OPEN, potential=Uniform(mu=0.0))
    doc = chain_to_dict(chain)
    assert doc["alpha"] == "inf"
    assert math.isinf(chain_from_dict(doc).alpha)
