"""Variable-range Kitaev chain simulator.

Exact solutions of 1-D spinless-fermion chains with power-law p-wave pairing
and inhomogeneous chemical potentials (commensurate, quasiperiodic, random):
quasiparticle spectra, string-correlator quantum Fisher information and its
size scaling, topological indicators, and reproducible phase-diagram sweeps.
"""

__version__ = "0.1.0"

from .bdg import (BdgSolution, ElwResult, diagonalize, edge_localization_width,
                  ground_state_energy, mass_gap, solve_chain)
from .entanglement import (QfiChannel, QfiResult, ScalingResult, chain_qfi,
                           qfi_channel, qfi_channel_detailed, rho_x, rho_y,
                           scaling_exponent)
from .model import (Anderson, AubryAndre, Boundary, ChainSpec, ConfigError,
                    CouplingMatrices, GOLDEN_RATIO_INVERSE, Harper,
                    NEAREST_NEIGHBOR, Uniform, build_couplings, chain_from_dict,
                    chain_to_dict, load_chain, pairing_coefficient,
                    potential_values, save_chain)
from .sweep import (SweepAxis, SweepPlan, SweepRecord, build_preset,
                    disorder_average, run_plan, run_sweep)
from .topology import (GapClosureError, TopoResult, UndecidedInvariantError,
                       berry_winding, pfaffian_sign, topo_result,
                       transfer_matrix_invariant, transfer_matrix_log_growth)

__all__ = [
    "__version__",
    "Anderson", "AubryAndre", "BdgSolution", "Boundary", "ChainSpec",
    "ConfigError", "CouplingMatrices", "ElwResult", "GOLDEN_RATIO_INVERSE",
    "GapClosureError", "Harper", "NEAREST_NEIGHBOR", "QfiChannel", "QfiResult",
    "ScalingResult", "SweepAxis", "SweepPlan", "SweepRecord", "TopoResult",
    "Uniform", "UndecidedInvariantError",
    "berry_winding", "build_couplings", "build_preset", "chain_from_dict",
    "chain_qfi", "chain_to_dict", "diagonalize", "disorder_average",
    "edge_localization_width", "ground_state_energy", "load_chain", "mass_gap",
    "pairing_coefficient", "pfaffian_sign", "potential_values", "qfi_channel",
    "qfi_channel_detailed", "rho_x", "rho_y", "run_plan", "run_sweep",
    "save_chain", "scaling_exponent", "solve_chain", "topo_result",
    "transfer_matrix_invariant", "transfer_matrix_log_growth",
]
