"""End-to-end pipeline: project, truncate, assemble, solve, group."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .assembly import density, reconstruct_all
from .effective import EffectivePotential, assemble_ep
from .errors import NumericalError
from .model import CouplingMatrices, ProblemSpec, project_coupling
from .realizations import RealizationSet, group_realizations
from .spectrum import SpectrumResult, find_roots
from .truncated import TruncatedSolution, solve_truncated


@dataclass(frozen=True)
class PipelineResult:
    spec: ProblemSpec
    v: CouplingMatrices
    trunc: TruncatedSolution
    ep: EffectivePotential
    sr: SpectrumResult
    states: tuple
    rs: RealizationSet


def solve_problem(spec: ProblemSpec,
                  pr_threshold: float | None = None) -> PipelineResult:
    """Run the full chain from a problem spec to grouped realizations."""
    v = project_coupling(spec.modes, spec.coupling, spec.xi_grid)
    trunc = solve_truncated(spec, v)
    ep = assemble_ep(trunc, v, spec)
    sr = find_roots(ep)
    states = reconstruct_all(sr, trunc, v, spec.modes, spec.xi_grid)
    rs = group_realizations(states, pr_threshold)
    return PipelineResult(spec=spec, v=v, trunc=trunc, ep=ep, sr=sr,
                          states=states, rs=rs)


def mean_intermediate_density(result: PipelineResult) -> np.ndarray:
    """Mean xi-density over the intermediate states (for the Born rule).

    Returned as a density with respect to the grid weights, unit
    total mass.
    """
    members = result.rs.intermediate
    if not members:
        raise NumericalError(
            "probabilities: born mode needs a nonempty intermediate "
            "realization to average over")
    w = result.spec.xi_grid.weights
    acc = np.zeros(result.spec.n_g)
    for idx in members:
        acc += density(result.states[idx]).marginal_xi / w
    acc /= len(members)
    total = float(np.sum(w * acc))
    return acc / total
