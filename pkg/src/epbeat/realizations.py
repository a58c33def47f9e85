"""Grouping of eigenstates into realizations and probability rules.

States localized in xi (low participation ratio) are grouped by the
grid point where their density peaks - the center of reduction; the
delocalized remainder forms the intermediate (transitional)
realization through which the system passes between reductions.
Probabilities follow three rules: uniform 1/N over realizations,
grouped N_j / sum N_j by member count, and the generalized Born rule
proportional to the intermediate density's mass near each center
(nearest-center cells of the xi grid).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .assembly import density, participation_ratio
from .errors import ConfigError, NumericalError
from .model import Grid

PROBABILITY_MODES = ("uniform", "grouped", "born")


@dataclass(frozen=True)
class RealizationGroup:
    center_index: int
    center_coord: float
    members: tuple


@dataclass(frozen=True)
class RealizationSet:
    """Partition of states into regular groups plus the intermediate set.

    alphas maps probability mode -> weight tuple over the regular
    groups (or over the single intermediate realization when no state
    is localized). Instances are immutable; attaching Born weights
    returns a new instance.
    """

    groups: tuple
    intermediate: tuple
    n_realizations: int
    xi_grid: Grid
    pr_threshold: float
    alphas: dict

    @property
    def group_counts(self) -> tuple:
        return tuple(len(g.members) for g in self.groups)

    @property
    def centers(self) -> tuple:
        return tuple(g.center_index for g in self.groups)

    def cells(self) -> np.ndarray:
        """Nearest-center cell index of every grid point (ties go to
        the lower-index center). One cell covering everything when no
        regular group exists."""
        if not self.groups:
            return np.zeros(self.xi_grid.n, dtype=int)
        centers = np.array([g.center_coord for g in self.groups])
        dist = np.abs(self.xi_grid.points[:, None] - centers[None, :])
        return np.argmin(dist, axis=1)

    def with_born(self, intermediate_density: np.ndarray) -> "RealizationSet":
        """New set with Born-rule weights attached."""
        alpha = probabilities(self, "born", intermediate_density)
        alphas = dict(self.alphas)
        alphas["born"] = alpha
        return replace(self, alphas=alphas)

    def to_dict(self) -> dict:
        return {
            "n_realizations": self.n_realizations,
            "pr_threshold": float(self.pr_threshold),
            "groups": [
                {"center_index": g.center_index,
                 "center_coord": float(g.center_coord),
                 "members": list(g.members)} for g in self.groups],
            "intermediate": list(self.intermediate),
            "alphas": {mode: [float(a) for a in alpha]
                       for mode, alpha in sorted(self.alphas.items())},
        }


@dataclass(frozen=True)
class MixedDensity:
    """Probability-weighted mixture of per-realization densities."""

    rho_ex: np.ndarray
    mode: str


def default_pr_threshold(n_g: int) -> float:
    """N_g / 3, clipped into the open interval (1, N_g)."""
    return min(max(n_g / 3.0, 1.0 + 1e-6), n_g - 1e-6)


def group_realizations(states, pr_threshold: float | None = None):
    """Group states by center of reduction; delocalized ones go to the
    intermediate set.

    A state is localized when the participation ratio of its xi
    marginal falls below the threshold. If nothing is localized the
    intermediate set is itself the single realization.
    """
    states = tuple(states)
    if not states:
        raise ConfigError("group_realizations: empty state list")
    xi_grid = states[0].xi_grid
    n_g = xi_grid.n
    tau = default_pr_threshold(n_g) if pr_threshold is None else float(pr_threshold)
    if not 1.0 < tau < n_g:
        raise ConfigError(
            f"pr_threshold: must lie strictly between 1 and N_g={n_g}, "
            f"got {tau!r}")
    by_center: dict[int, list] = {}
    intermediate = []
    for idx, state in enumerate(states):
        marginal = density(state).marginal_xi
        # normalize so grouping depends only on the density's shape,
        # invariant under any common rescaling of the amplitudes
        marginal = marginal / marginal.sum()
        pr = participation_ratio(marginal)
        if pr >= tau:
            intermediate.append(idx)
        else:
            center = int(np.argmax(marginal))
            by_center.setdefault(center, []).append(idx)
    groups = tuple(
        RealizationGroup(center_index=c,
                         center_coord=float(xi_grid.points[c]),
                         members=tuple(by_center[c]))
        for c in sorted(by_center))
    n_realizations = len(groups) if groups else 1
    rs = RealizationSet(groups=groups, intermediate=tuple(intermediate),
                        n_realizations=n_realizations, xi_grid=xi_grid,
                        pr_threshold=tau, alphas={})
    alphas = {"uniform": probabilities(rs, "uniform"),
              "grouped": probabilities(rs, "grouped")}
    return replace(rs, alphas=alphas)


def _cell_masses(rs: RealizationSet, values: np.ndarray) -> np.ndarray:
    """Quadrature mass of a xi-density inside each center's cell."""
    cells = rs.cells()
    w = rs.xi_grid.weights
    n_cells = len(rs.groups) if rs.groups else 1
    masses = np.zeros(n_cells)
    np.add.at(masses, cells, w * values)
    return masses


def probabilities(rs: RealizationSet, mode: str,
                  intermediate_density: np.ndarray | None = None) -> tuple:
    """Realization weights under one of the three rules.

    uniform: alpha_j = 1/N over the regular groups. grouped:
    alpha_j = N_j / sum N_j by member count. born: alpha_j
    proportional to the cell mass of the supplied intermediate density
    (a density over xi, integrated with the grid weights).
    """
    if mode not in PROBABILITY_MODES:
        raise ConfigError(f"prob_mode: unknown mode {mode!r}")
    n_groups = len(rs.groups)
    if n_groups == 0:
        return (1.0,)
    if mode == "uniform":
        return tuple(1.0 / n_groups for _ in range(n_groups))
    if mode == "grouped":
        counts = np.array(rs.group_counts, dtype=float)
        return tuple(counts / counts.sum())
    if intermediate_density is None:
        raise ConfigError("probabilities: born mode requires a density")
    values = np.asarray(intermediate_density, dtype=float)
    if values.shape != (rs.xi_grid.n,):
        raise ConfigError("probabilities: density length must equal grid size")
    if np.any(values < -1e-12):
        raise ConfigError("probabilities: density must be nonnegative")
    masses = _cell_masses(rs, values)
    total = masses.sum()
    if total <= 0:
        raise NumericalError("probabilities: intermediate density has no mass")
    return tuple(masses / total)


def born_match(rs: RealizationSet, psi0_intermediate: np.ndarray):
    """Match an intermediate-state amplitude to realization weights.

    The matching coefficient of cell j carries the cell's intensity
    mass, C_j = s_j sqrt(sum_{cell j} w |psi0|^2) with s_j the sign of
    the cell's mean amplitude, so |C_j|^2 reproduces exactly the
    Born-mode weights for the density |psi0|^2. A homogeneous
    amplitude over equal cells gives equal |C_j|^2.
    """
    psi = np.asarray(psi0_intermediate, dtype=float)
    if psi.shape != (rs.xi_grid.n,):
        raise ConfigError("born_match: state length must equal grid size")
    w = rs.xi_grid.weights
    total = float(np.sum(w * psi * psi))
    if abs(total - 1.0) > 1e-6:
        raise ConfigError(
            f"born_match: state has weighted norm {total!r}, expected 1")
    masses = _cell_masses(rs, psi * psi)
    if np.all(masses == 0.0):
        raise NumericalError("born_match: all matching coefficients vanish")
    cells = rs.cells()
    n_cells = len(rs.groups) if rs.groups else 1
    mean_amp = np.zeros(n_cells)
    np.add.at(mean_amp, cells, w * psi)
    c = np.sign(np.where(mean_amp == 0.0, 1.0, mean_amp)) * np.sqrt(masses)
    alpha = masses / masses.sum()
    return tuple(float(x) for x in c), tuple(float(a) for a in alpha)


def mix_density(rs: RealizationSet, states, mode: str) -> MixedDensity:
    """Expectation density: alpha-weighted mean of group densities.

    rho_j is the mean density over the members of group j; the
    intermediate set never enters the regular mixture. Requires the
    weights for the requested mode to be attached to the set.
    """
    if mode not in rs.alphas:
        raise ConfigError(
            f"mix_density: probabilities not computed for mode {mode!r}")
    alpha = rs.alphas[mode]
    states = tuple(states)
    group_densities = realization_densities(rs, states)
    rho = np.zeros_like(group_densities[0])
    for a, rho_j in zip(alpha, group_densities):
        rho += a * rho_j
    return MixedDensity(rho_ex=rho, mode=mode)


def realization_densities(rs: RealizationSet, states) -> tuple:
    """Mean density per realization, in group order.

    Falls back to the intermediate members when no regular group
    exists (the intermediate is then the single realization).
    """
    states = tuple(states)
    member_sets = [g.members for g in rs.groups] if rs.groups \
        else [rs.intermediate]
    out = []
    for members in member_sets:
        acc = None
        for idx in members:
            rho = density(states[idx]).rho
            acc = rho if acc is None else acc + rho
        out.append(acc / len(members))
    return tuple(out)
