"""Assembly and evaluation of the energy-dependent effective potential.

Eliminating the truncated sector from the block operator

    [[h0, B], [B^T, L]]

leaves an N_g x N_g operator h0 + B (eta I - L)^{-1} B^T acting on the
mode-0 channel alone. With L = Q diag(p) Q^T this is a static part
plus rank-1 pole terms,

    V_eff(eta) = h0 + sum_k w_k w_k^T / (eta - p_k),   w_k = B q_k,

so the compound eigenvalues are the roots of the characteristic
function F(eta) = det[V_eff(eta) - eta I]. Poles closer than a merge
tolerance are combined, their residues summed into a single block of
rank >= 1. The same construction applies recursively: the truncated
system is itself a block problem whose lowest block can play the
mode-0 role, which yields the level-2 potential of the hierarchy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import ldl

from .errors import ConfigError, NumericalError, PoleProximityError
from .model import CouplingMatrices, ProblemSpec, hamiltonian_g
from .truncated import TruncatedSolution, build_truncated, diagonalize_sym

POLE_MERGE_FACTOR = 1e-8
POLE_GUARD_FACTOR = 1e-9
RESIDUE_RANK_TOL = 1e-10
DECOUPLED_FACTOR = 1e-13


def _gershgorin_bounds(m: np.ndarray) -> tuple[float, float]:
    radius = np.sum(np.abs(m), axis=1) - np.abs(np.diagonal(m))
    return (float(np.min(np.diagonal(m) - radius)),
            float(np.max(np.diagonal(m) + radius)))


@dataclass(frozen=True)
class EffectivePotential:
    """Static part plus pole/residue-factor terms of V_eff(eta).

    residue_factors[k] is an (N_g, r_k) matrix W_k with
    R_k = W_k W_k^T; r_k = 1 for simple poles, larger after merging.
    raw_pole_count is the pole count before merging and n_channels the
    number of eliminated channels, both kept for count accounting.
    hg_diag is the bare grid-operator diagonal, needed to isolate the
    interaction well profile; eps0 converts roots to total energies.
    """

    h0: np.ndarray
    poles: np.ndarray
    residue_factors: tuple
    pole_merge_tol: float
    raw_pole_count: int
    n_channels: int
    hg_diag: np.ndarray
    eps0: float = 0.0

    @property
    def n_g(self) -> int:
        return self.h0.shape[0]

    @property
    def span(self) -> float:
        """Spectral span estimate used to scale pole guards."""
        lo, hi = _gershgorin_bounds(self.h0)
        if self.poles.size:
            lo = min(lo, float(self.poles[0]))
            hi = max(hi, float(self.poles[-1]))
        return max(hi - lo, 1.0)

    @property
    def pole_guard(self) -> float:
        return POLE_GUARD_FACTOR * self.span

    def ranks(self) -> np.ndarray:
        return np.array([w.shape[1] for w in self.residue_factors], dtype=int)

    def residue_matrix(self, k: int) -> np.ndarray:
        w = self.residue_factors[k]
        return w @ w.T

    def to_dict(self) -> dict:
        """JSON-ready dump of poles and residue factors."""
        return {
            "poles": [float(p) for p in self.poles],
            "ranks": [int(r) for r in self.ranks()],
            "residue_factors": [[[float(x) for x in row] for row in w]
                                for w in self.residue_factors],
            "raw_pole_count": self.raw_pole_count,
            "n_channels": self.n_channels,
            "eps0": float(self.eps0),
        }


def _merge_poles(poles: np.ndarray, vectors: np.ndarray, tol: float,
                 n_g: int) -> tuple[np.ndarray, tuple]:
    """Cluster poles within tol and sum their rank-1 residues.

    Returns sorted distinct pole values and per-pole residue factors;
    a merged cluster's factor comes from the eigendecomposition of the
    summed residue matrix, truncated at the numerical rank.
    """
    order = np.argsort(poles, kind="stable")
    poles = poles[order]
    vectors = vectors[:, order]
    merged_poles = []
    factors = []
    start = 0
    while start < poles.size:
        stop = start + 1
        while stop < poles.size and poles[stop] - poles[stop - 1] <= tol:
            stop += 1
        cluster = vectors[:, start:stop]
        if stop - start == 1:
            factor = cluster
        else:
            r = cluster @ cluster.T
            vals, vecs = np.linalg.eigh(r)
            keep = vals > RESIDUE_RANK_TOL * max(vals[-1], 0.0)
            if not np.any(keep):
                factor = np.zeros((n_g, 1))
            else:
                factor = vecs[:, keep] * np.sqrt(vals[keep])
        merged_poles.append(float(np.mean(poles[start:stop])))
        factors.append(factor)
        start = stop
    return np.asarray(merged_poles), tuple(factors)


def schur_ep(h0: np.ndarray, b: np.ndarray, sub: np.ndarray,
             n_channels: int, hg_diag: np.ndarray | None = None,
             eps0: float = 0.0,
             pole_merge_tol: float | None = None) -> EffectivePotential:
    """Effective potential of the block problem [[h0, b], [b^T, sub]].

    Diagonalizes the eliminated block and carries b into pole residue
    vectors. This is the one construction both hierarchy levels use.
    """
    h0 = np.asarray(h0, dtype=float)
    vals, vecs = diagonalize_sym(sub)
    w = b @ vecs  # residue vector per eliminated eigenpair
    if pole_merge_tol is None:
        lo, hi = _gershgorin_bounds(h0)
        lo = min(lo, float(vals[0])) if vals.size else lo
        hi = max(hi, float(vals[-1])) if vals.size else hi
        pole_merge_tol = POLE_MERGE_FACTOR * max(hi - lo, 1.0)
    poles, factors = _merge_poles(vals, w, pole_merge_tol, h0.shape[0])
    if hg_diag is None:
        hg_diag = np.zeros(h0.shape[0])
    return EffectivePotential(
        h0=h0, poles=poles, residue_factors=factors,
        pole_merge_tol=float(pole_merge_tol), raw_pole_count=int(vals.size),
        n_channels=n_channels, hg_diag=np.asarray(hg_diag, dtype=float),
        eps0=float(eps0))


def ep_from_poles(h0: np.ndarray, poles, residue_vectors, n_channels: int,
               hg_diag=None, eps0: float = 0.0,
               pole_merge_tol: float | None = None) -> EffectivePotential:
    """Hand-built potential from explicit poles and rank-1 residue vectors.

    Replicated pole values merge into higher-rank residues, which is
    the route to synthetic full-degree instances.
    """
    h0 = np.atleast_2d(np.asarray(h0, dtype=float))
    poles = np.asarray(poles, dtype=float)
    vectors = np.asarray(residue_vectors, dtype=float)
    if vectors.ndim != 2 or vectors.shape != (h0.shape[0], poles.size):
        raise ConfigError("residue_vectors: shape must be (n_g, n_poles)")
    if pole_merge_tol is None:
        lo, hi = _gershgorin_bounds(h0)
        if poles.size:
            lo, hi = min(lo, poles.min()), max(hi, poles.max())
        pole_merge_tol = POLE_MERGE_FACTOR * max(hi - lo, 1.0)
    merged, factors = _merge_poles(poles, vectors, pole_merge_tol, h0.shape[0])
    if hg_diag is None:
        hg_diag = np.zeros(h0.shape[0])
    return EffectivePotential(
        h0=h0, poles=merged, residue_factors=factors,
        pole_merge_tol=float(pole_merge_tol), raw_pole_count=int(poles.size),
        n_channels=n_channels, hg_diag=np.asarray(hg_diag, dtype=float),
        eps0=float(eps0))


def mode_zero_coupling(v: CouplingMatrices, n_g: int) -> np.ndarray:
    """Coupling block B of mode 0 to the truncated sector.

    B[xi, (n-1)*N_g + xi'] = delta_{xi,xi'} V_0n(xi).
    """
    nb = v.n_modes - 1
    b = np.zeros((n_g, nb * n_g))
    idx = np.arange(n_g)
    for bn in range(nb):
        b[idx, bn * n_g + idx] = v.v[0, bn + 1]
    return b


def assemble_ep(trunc: TruncatedSolution, v: CouplingMatrices,
                spec: ProblemSpec,
                pole_merge_tol: float | None = None) -> EffectivePotential:
    """Effective potential of the full problem from its truncated solution.

    h0 = h_g + diag(V_00); pole positions are the truncated
    eigenvalues (block shifts already absorbed) and residue vectors
    w_k(xi) = sum_{n>=1} V_0n(xi) psi0_k(n, xi).
    """
    n_g = spec.n_g
    if trunc.dim != (spec.n_tot - 1) * n_g:
        raise ConfigError("truncated solution: dimension mismatch with spec")
    hg = hamiltonian_g(spec)
    h0 = hg + np.diag(v.v[0, 0])
    b = mode_zero_coupling(v, n_g)
    w = b @ trunc.eigvecs
    if pole_merge_tol is None:
        lo, hi = _gershgorin_bounds(h0)
        lo = min(lo, float(trunc.eigvals[0]))
        hi = max(hi, float(trunc.eigvals[-1]))
        pole_merge_tol = POLE_MERGE_FACTOR * max(hi - lo, 1.0)
    poles, factors = _merge_poles(trunc.eigvals, w, pole_merge_tol, n_g)
    return EffectivePotential(
        h0=h0, poles=poles, residue_factors=factors,
        pole_merge_tol=float(pole_merge_tol), raw_pole_count=trunc.dim,
        n_channels=spec.n_tot - 1, hg_diag=hg.diagonal().copy(),
        eps0=float(spec.modes.eps[0]))


def eval_ep(ep: EffectivePotential, eta: float) -> np.ndarray:
    """V_eff at a given eta: h0 + sum_k W_k W_k^T / (eta - p_k).

    Raises PoleProximityError within the pole guard of any pole.
    """
    if ep.poles.size:
        gap = np.min(np.abs(eta - ep.poles))
        if gap <= ep.pole_guard:
            raise PoleProximityError(
                f"eta={eta!r} is within {ep.pole_guard:.3e} of a pole")
    out = ep.h0.copy()
    for p, w in zip(ep.poles, ep.residue_factors):
        out += (w @ w.T) / (eta - p)
    return 0.5 * (out + out.T)


def characteristic(ep: EffectivePotential, eta: float) -> float:
    """F(eta) = det[V_eff(eta) - eta I] via symmetric LDL^T factorization.

    The determinant is the product of the 1x1 and 2x2 pivot blocks, so
    its sign survives even when the magnitude is extreme.
    """
    m = eval_ep(ep, eta) - eta * np.eye(ep.n_g)
    if ep.n_g == 1:
        return float(m[0, 0])
    _, d, _ = ldl(m)
    det = 1.0
    i = 0
    n = d.shape[0]
    while i < n:
        if i + 1 < n and d[i + 1, i] != 0.0:
            det *= d[i, i] * d[i + 1, i + 1] - d[i, i + 1] * d[i + 1, i]
            i += 2
        else:
            det *= d[i, i]
            i += 1
    return float(det)


@dataclass(frozen=True)
class WellAlignment:
    """Where the interaction well bottoms out vs. where the state peaks."""

    well_index: int
    density_index: int
    aligned: bool
    profile: np.ndarray


def ep_well_alignment(ep: EffectivePotential, root: float,
                      state: np.ndarray,
                      residual_tol: float = 1e-7) -> WellAlignment:
    """Check that the self-consistent well sits under the state's peak.

    The interaction profile d(xi) = V_eff(root)(xi,xi) - h_g(xi,xi)
    is the well the pole terms dig at this root; alignment holds when
    its argmin and the density argmax differ by at most one cell.
    """
    state = np.asarray(state, dtype=float)
    m = eval_ep(ep, root)
    resid = np.linalg.norm(m @ state - root * state)
    if resid > residual_tol * ep.span * max(np.linalg.norm(state), 1e-300):
        raise NumericalError(
            f"well alignment: root {root!r} fails residual check "
            f"({resid:.3e})")
    profile = m.diagonal() - ep.hg_diag
    well = int(np.argmin(profile))
    peak = int(np.argmax(state ** 2))
    return WellAlignment(well_index=well, density_index=peak,
                         aligned=abs(well - peak) <= 1, profile=profile)


@dataclass(frozen=True)
class HierarchyLevel:
    """One level of the recursive construction."""

    depth: int
    ep: EffectivePotential
    operator: np.ndarray  # the block problem this level reduces


def recurse_ep(spec: ProblemSpec, v: CouplingMatrices,
               depth: int) -> tuple[HierarchyLevel, ...]:
    """Recursive effective potentials down the truncation hierarchy.

    Depth 1 reduces the full problem onto mode 0. Depth 2 additionally
    treats the truncated block system as a fresh problem whose lowest
    block plays the mode-0 role, and reduces onto it; the level-2
    roots then recover the truncated operator's spectrum.
    """
    if depth not in (1, 2):
        raise ConfigError(f"depth unsupported: {depth} (must be 1 or 2)")
    n_g = spec.n_g
    trunc_op = build_truncated(spec, v)
    vals, vecs = diagonalize_sym(trunc_op)
    trunc = TruncatedSolution(
        dim=trunc_op.shape[0], eigvals=vals, eigvecs=vecs,
        shifts=np.asarray(spec.modes.eps[1:] - spec.modes.eps[0]),
        residual_bound=float(
            np.max(np.linalg.norm(trunc_op @ vecs - vecs * vals, axis=0))))
    levels = [HierarchyLevel(
        depth=1, ep=assemble_ep(trunc, v, spec),
        operator=_full_block_operator(spec, v))]
    if depth == 2:
        if spec.n_tot < 3:
            raise ConfigError(
                "depth 2 needs N_tot >= 3: the truncated sector must have "
                "a separable lowest block")
        h0_2 = trunc_op[:n_g, :n_g]
        b_2 = trunc_op[:n_g, n_g:]
        sub_2 = trunc_op[n_g:, n_g:]
        ep2 = schur_ep(h0_2, b_2, sub_2, n_channels=spec.n_tot - 2,
                       hg_diag=hamiltonian_g(spec).diagonal().copy())
        levels.append(HierarchyLevel(depth=2, ep=ep2, operator=trunc_op))
    return tuple(levels)


def _full_block_operator(spec: ProblemSpec, v: CouplingMatrices) -> np.ndarray:
    """Coupled-channel operator in the eta scale (eps_0 subtracted)."""
    n_tot, n_g = spec.n_tot, spec.n_g
    hg = hamiltonian_g(spec)
    eps = spec.modes.eps
    out = np.zeros((n_tot * n_g, n_tot * n_g))
    idx = np.arange(n_g)
    for n in range(n_tot):
        sl = slice(n * n_g, (n + 1) * n_g)
        out[sl, sl] = hg + np.diag(v.v[n, n]) + (eps[n] - eps[0]) * np.eye(n_g)
        for m in range(n + 1, n_tot):
            sm = slice(m * n_g, (m + 1) * n_g)
            out[sl, sm][idx, idx] = v.v[n, m]
            out[sm, sl][idx, idx] = v.v[n, m]
    return out
