"""Effective-potential workbench for two coupled fields.

Builds a discretized two-field problem, projects the coupling onto
coupled channels, assembles the energy-dependent effective potential,
enumerates every root of its rational characteristic function,
reconstructs the entangled compound states, groups them into
realizations with the three probability rules, and simulates the
chaotic realization-switching beat process.
"""

__version__ = "0.1.0"

from .model import (Grid, ModeBasis, CouplingSpec, ProblemSpec,
                    CouplingMatrices, build_problem, hamiltonian_g,
                    free_modes, gaussian_bump_basis, given_mode_basis,
                    project_coupling)
from .truncated import (TruncatedSolution, build_truncated, diagonalize_sym,
                        solve_truncated)
from .effective import (EffectivePotential, assemble_ep, eval_ep,
                        characteristic, ep_well_alignment, recurse_ep,
                        ep_from_poles, schur_ep)
from .spectrum import (SpectrumResult, CountRecord, linearize_ep, find_roots,
                       count_accounting, scan_roots)
from .assembly import (AssembledState, DensityField, reconstruct_state,
                       reconstruct_all, density, participation_ratio,
                       schmidt_rank, complexity_measure)
from .realizations import (RealizationSet, RealizationGroup, MixedDensity,
                           group_realizations, probabilities, born_match,
                           mix_density, realization_densities,
                           default_pr_threshold)
from .beat import BeatEvent, BeatTrajectory, simulate_beat, empirical_freqs
from .oracle import (ComparisonReport, direct_spectrum, compare_spectra,
                     build_full_operator)
from .pipeline import PipelineResult, solve_problem, mean_intermediate_density
from .errors import (ConfigError, NumericalError, PoleProximityError,
                     VerificationError)

__all__ = [
    "Grid", "ModeBasis", "CouplingSpec", "ProblemSpec", "CouplingMatrices",
    "build_problem", "hamiltonian_g", "free_modes", "gaussian_bump_basis",
    "given_mode_basis", "project_coupling",
    "TruncatedSolution", "build_truncated", "diagonalize_sym",
    "solve_truncated",
    "EffectivePotential", "assemble_ep", "eval_ep", "characteristic",
    "ep_well_alignment", "recurse_ep", "ep_from_poles", "schur_ep",
    "SpectrumResult", "CountRecord", "linearize_ep", "find_roots",
    "count_accounting", "scan_roots",
    "AssembledState", "DensityField", "reconstruct_state", "reconstruct_all",
    "density", "participation_ratio", "schmidt_rank", "complexity_measure",
    "RealizationSet", "RealizationGroup", "MixedDensity",
    "group_realizations", "probabilities", "born_match", "mix_density",
    "realization_densities", "default_pr_threshold",
    "BeatEvent", "BeatTrajectory", "simulate_beat", "empirical_freqs",
    "ComparisonReport", "direct_spectrum", "compare_spectra",
    "build_full_operator",
    "PipelineResult", "solve_problem", "mean_intermediate_density",
    "ConfigError", "NumericalError", "PoleProximityError",
    "VerificationError",
]
