"""Discretized two-field problem definition.

One field lives on a 1-D spatial grid (the xi coordinate) and is
governed by a finite-difference operator; the other is carried by a
finite set of modes phi_n(q) with energies eps_n on a quadrature grid
for q. The coupling kernel V(q, xi) is projected onto the mode basis,

    V_nn'(xi) = sum_q w_q phi_n(q) V(q, xi) phi_n'(q),

which eliminates q in favor of the mode index n. Everything here is
real and dimensionless; all containers are immutable after
construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigError

BOUNDARIES = ("dirichlet", "periodic")
COUPLING_KINDS = ("gaussian_attractive", "constant", "custom_sampled")
MODE_KINDS = ("bumps", "given")

DEFAULT_BUMP_WIDTH_FACTOR = 1.5
NORMALIZATION_TOL = 1e-10


def _freeze(a) -> np.ndarray:
    arr = np.asarray(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Grid:
    """Ordered 1-D quadrature grid with trapezoid weights."""

    points: np.ndarray
    weights: np.ndarray
    boundary: str = "dirichlet"

    def __post_init__(self):
        object.__setattr__(self, "points", _freeze(self.points))
        object.__setattr__(self, "weights", _freeze(self.weights))
        if self.points.ndim != 1 or self.points.size < 2:
            raise ConfigError("grid: need at least 2 points")
        if np.any(np.diff(self.points) <= 0):
            raise ConfigError("grid.points: must be strictly increasing")
        if self.weights.shape != self.points.shape:
            raise ConfigError("grid.weights: shape mismatch with points")
        if np.any(self.weights <= 0):
            raise ConfigError("grid.weights: must be positive")
        if self.boundary not in BOUNDARIES:
            raise ConfigError(f"grid.boundary: unknown value {self.boundary!r}")

    @property
    def n(self) -> int:
        return self.points.size

    @property
    def spacing(self) -> float:
        return float(self.points[1] - self.points[0])

    @classmethod
    def uniform(cls, n: int, span: Sequence[float],
                boundary: str = "dirichlet") -> "Grid":
        """Evenly spaced grid over span.

        Dirichlet grids include both endpoints and carry trapezoid
        weights (h/2 at the ends). Periodic grids cover one period
        [a, b) with uniform weights h = (b - a)/n.
        """
        if n < 2:
            raise ConfigError(f"grid.n: need at least 2 points, got {n}")
        a, b = float(span[0]), float(span[1])
        if not b > a:
            raise ConfigError("grid.span: upper bound must exceed lower")
        if boundary == "periodic":
            h = (b - a) / n
            pts = a + h * np.arange(n)
            w = np.full(n, h)
        else:
            pts = np.linspace(a, b, n)
            h = pts[1] - pts[0]
            w = np.full(n, h)
            w[0] = w[-1] = h / 2
        return cls(pts, w, boundary)


@dataclass(frozen=True)
class ModeBasis:
    """Mode energies eps_n and normalized amplitude samples phi_n(q).

    phi is indexed (mode, q-point); each row has unit quadrature norm
    sum_q w_q phi_n(q)^2 = 1. Energies are nondecreasing with eps_0
    the ground value.
    """

    eps: np.ndarray
    phi: np.ndarray
    q_grid: Grid

    def __post_init__(self):
        object.__setattr__(self, "eps", _freeze(self.eps))
        object.__setattr__(self, "phi", _freeze(self.phi))
        if self.eps.ndim != 1 or self.eps.size < 2:
            raise ConfigError("modes.eps: need at least 2 modes")
        if np.any(np.diff(self.eps) < 0):
            raise ConfigError("modes.eps: must be nondecreasing")
        if self.phi.shape != (self.eps.size, self.q_grid.n):
            raise ConfigError("modes.phi: shape must be (n_modes, n_q)")
        norms = self.phi ** 2 @ self.q_grid.weights
        if np.any(np.abs(norms - 1.0) > NORMALIZATION_TOL):
            raise ConfigError("modes.phi: rows must be quadrature-normalized")

    @property
    def n_modes(self) -> int:
        return self.eps.size


@dataclass(frozen=True)
class CouplingSpec:
    """Coupling kernel between the mode field (q) and the grid field (xi).

    gaussian_attractive: V(q, xi) = -g exp(-(q - xi)^2 / (2 sigma^2)),
    nonpositive everywhere. constant: V = -g. custom_sampled: caller
    supplies kernel values on the (q, xi) product grid.
    """

    kind: str
    strength: float = 0.0
    width: float = 1.0
    samples: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in COUPLING_KINDS:
            raise ConfigError(f"coupling.kind: unknown value {self.kind!r}")
        if self.strength < 0:
            raise ConfigError("coupling.g: must be nonnegative")
        if self.kind == "gaussian_attractive" and self.width <= 0:
            raise ConfigError("coupling.sigma: must be positive")
        if self.kind == "custom_sampled":
            if self.samples is None:
                raise ConfigError("coupling.samples: required for custom_sampled")
            object.__setattr__(self, "samples", _freeze(self.samples))
        elif self.samples is not None:
            raise ConfigError("coupling.samples: only valid for custom_sampled")

    def kernel(self, q_points: np.ndarray, xi_points: np.ndarray) -> np.ndarray:
        """Kernel values on the product grid, indexed (q, xi)."""
        q = np.asarray(q_points)[:, None]
        xi = np.asarray(xi_points)[None, :]
        if self.kind == "gaussian_attractive":
            return -self.strength * np.exp(-((q - xi) ** 2) / (2 * self.width ** 2))
        if self.kind == "constant":
            return np.full((q.size, xi.size), -self.strength)
        if self.samples.shape != (q.size, xi.size):
            raise ConfigError(
                f"coupling.samples: shape {self.samples.shape} does not match "
                f"grids ({q.size}, {xi.size})")
        return self.samples


@dataclass(frozen=True)
class ProblemSpec:
    """Full problem instance: grids, modes, coupling, and grid-field operator."""

    xi_grid: Grid
    modes: ModeBasis
    coupling: CouplingSpec
    g_stiffness: float
    g_potential: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "g_potential", _freeze(self.g_potential))
        if self.g_stiffness < 0:
            raise ConfigError("hg.stiffness: must be nonnegative")
        if self.g_potential.shape != (self.xi_grid.n,):
            raise ConfigError("hg.potential: length must equal grid size")

    @property
    def n_g(self) -> int:
        return self.xi_grid.n

    @property
    def n_tot(self) -> int:
        return self.modes.n_modes


@dataclass(frozen=True)
class CouplingMatrices:
    """Projected coupling V_nn'(xi), indexed (n, n', xi-point)."""

    v: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "v", _freeze(self.v))
        if self.v.ndim != 3 or self.v.shape[0] != self.v.shape[1]:
            raise ConfigError("coupling matrices: shape must be (n, n, n_xi)")

    @property
    def n_modes(self) -> int:
        return self.v.shape[0]

    @property
    def n_xi(self) -> int:
        return self.v.shape[2]


def hamiltonian_g(spec: ProblemSpec) -> np.ndarray:
    """Grid-field operator: stiffness * (-d2/dxi2) + diag(potential).

    The Laplacian is the 3-point stencil (2, -1)/h^2 under the grid's
    declared boundary; the result is exactly symmetric.
    """
    n = spec.n_g
    h = spec.xi_grid.spacing
    scale = spec.g_stiffness / (h * h)
    m = np.zeros((n, n))
    idx = np.arange(n)
    m[idx, idx] = 2.0 * scale
    m[idx[:-1], idx[:-1] + 1] = -scale
    m[idx[:-1] + 1, idx[:-1]] = -scale
    if spec.xi_grid.boundary == "periodic":
        m[0, n - 1] = -scale
        m[n - 1, 0] = -scale
    m[idx, idx] += spec.g_potential
    return m


def gaussian_bump_basis(n_modes: int, q_grid: Grid, delta_eps: float,
                        width_factor: float = DEFAULT_BUMP_WIDTH_FACTOR) -> ModeBasis:
    """Overlapping normalized Gaussian bumps at evenly spaced centers.

    Centers sit at the midpoints of n_modes equal subdivisions of the
    q span; the bump width is width_factor times the center spacing,
    wide enough that neighboring modes overlap and cross couplings
    survive projection. Energies are eps_n = n * delta_eps.
    """
    if n_modes < 2:
        raise ConfigError(f"modes.count: need at least 2 modes, got {n_modes}")
    if delta_eps < 0:
        raise ConfigError("modes.delta_eps: must be nonnegative")
    if width_factor <= 0:
        raise ConfigError("modes.width_factor: must be positive")
    q = q_grid.points
    lo, hi = q[0], q[-1]
    spacing = (hi - lo) / n_modes
    centers = lo + spacing * (np.arange(n_modes) + 0.5)
    width = width_factor * spacing
    phi = np.exp(-((q[None, :] - centers[:, None]) ** 2) / (2 * width ** 2))
    norms = np.sqrt(phi ** 2 @ q_grid.weights)
    if np.any(norms == 0):
        raise ConfigError("modes: bump has zero quadrature norm on this grid")
    phi = phi / norms[:, None]
    eps = delta_eps * np.arange(n_modes, dtype=float)
    return ModeBasis(eps, phi, q_grid)


def given_mode_basis(eps: Sequence[float], phi: Sequence[Sequence[float]],
                     q_grid: Grid) -> ModeBasis:
    """Pass-through basis from declared energies and samples.

    Samples are renormalized to unit quadrature norm; an all-zero
    declared mode is unnormalizable and rejected.
    """
    eps = np.asarray(eps, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if phi.ndim != 2 or phi.shape != (eps.size, q_grid.n):
        raise ConfigError("modes.phi: shape must be (n_modes, n_q)")
    norms = np.sqrt(phi ** 2 @ q_grid.weights)
    if np.any(norms == 0):
        raise ConfigError("modes.phi: all-zero mode sample is unnormalizable")
    return ModeBasis(eps, phi / norms[:, None], q_grid)


def free_modes(spec: ProblemSpec) -> ModeBasis:
    """The mode basis of the problem (already built and validated)."""
    return spec.modes


def project_coupling(basis: ModeBasis, coupling: CouplingSpec,
                     xi_grid: Grid) -> CouplingMatrices:
    """Project the kernel onto the mode basis by q-quadrature.

    V_nn'(xi) = sum_q w_q phi_n(q) V(q, xi) phi_n'(q); symmetric in
    (n, n') because the kernel and modes are real.
    """
    kern = coupling.kernel(basis.q_grid.points, xi_grid.points)
    weighted = basis.phi * basis.q_grid.weights[None, :]
    # v[n, n', xi] = sum_q weighted[n, q] kern[q, xi] phi[n', q]
    v = np.einsum("aq,qx,bq->abx", weighted, kern, basis.phi, optimize=True)
    v = 0.5 * (v + v.transpose(1, 0, 2))  # kill roundoff asymmetry
    return CouplingMatrices(v)


# ---------------------------------------------------------------------------
# Config-document parsing


def _check_keys(doc: Mapping, allowed: Sequence[str], path: str) -> None:
    for key in doc:
        if key not in allowed:
            raise ConfigError(f"{path}{key}: unknown key")


def _named_potential(doc: Mapping, grid: Grid) -> np.ndarray:
    kind = doc.get("kind")
    xi = grid.points
    if kind == "zero":
        _check_keys(doc, ("kind",), "hg.potential.")
        return np.zeros(grid.n)
    if kind == "harmonic":
        _check_keys(doc, ("kind", "strength", "center"), "hg.potential.")
        s = float(doc.get("strength", 1.0))
        c = float(doc.get("center", 0.5 * (xi[0] + xi[-1])))
        return s * (xi - c) ** 2
    if kind == "double_well":
        _check_keys(doc, ("kind", "depth", "width", "centers", "detune"),
                    "hg.potential.")
        depth = float(doc.get("depth", 1.0))
        width = float(doc.get("width", 0.1 * (xi[-1] - xi[0])))
        centers = doc.get("centers")
        if centers is None or len(centers) != 2:
            raise ConfigError("hg.potential.centers: need exactly 2 centers")
        detune = float(doc.get("detune", 0.0))
        depths = (depth, depth + detune)
        out = np.zeros(grid.n)
        for c, d in zip(centers, depths):
            out -= d * np.exp(-((xi - float(c)) ** 2) / (2 * width ** 2))
        return out
    raise ConfigError(f"hg.potential.kind: unknown value {kind!r}")


def build_problem(config: Mapping) -> ProblemSpec:
    """Validate a structured config document and build a ProblemSpec.

    Top-level keys: grid, modes, coupling, hg (run is tolerated here
    so one document can drive both the model and the CLI). Unknown
    keys anywhere raise a ConfigError naming the field path.
    """
    _check_keys(config, ("grid", "modes", "coupling", "hg", "run"), "")

    gdoc = config.get("grid", {})
    _check_keys(gdoc, ("n", "span", "boundary"), "grid.")
    n_g = gdoc.get("n")
    if not isinstance(n_g, int) or n_g < 2:
        raise ConfigError(f"grid.n: need an integer >= 2, got {n_g!r}")
    xi_grid = Grid.uniform(n_g, gdoc.get("span", (0.0, 1.0)),
                           gdoc.get("boundary", "dirichlet"))

    mdoc = config.get("modes", {})
    _check_keys(mdoc, ("count", "kind", "delta_eps", "q_n", "q_span",
                       "width_factor", "eps", "phi"), "modes.")
    n_tot = mdoc.get("count")
    if not isinstance(n_tot, int) or n_tot < 2:
        raise ConfigError(f"modes.count: need an integer >= 2, got {n_tot!r}")
    q_grid = Grid.uniform(int(mdoc.get("q_n", 32)),
                          mdoc.get("q_span", (0.0, 1.0)))
    kind = mdoc.get("kind", "bumps")
    if kind == "bumps":
        basis = gaussian_bump_basis(
            n_tot, q_grid, float(mdoc.get("delta_eps", 1.0)),
            float(mdoc.get("width_factor", DEFAULT_BUMP_WIDTH_FACTOR)))
    elif kind == "given":
        if "eps" not in mdoc or "phi" not in mdoc:
            raise ConfigError("modes.eps/modes.phi: required for kind 'given'")
        basis = given_mode_basis(mdoc["eps"], mdoc["phi"], q_grid)
        if basis.n_modes != n_tot:
            raise ConfigError("modes.count: does not match declared eps length")
    else:
        raise ConfigError(f"modes.kind: unknown value {kind!r}")

    cdoc = config.get("coupling", {})
    _check_keys(cdoc, ("kind", "g", "sigma", "samples"), "coupling.")
    ckind = cdoc.get("kind", "gaussian_attractive")
    samples = cdoc.get("samples")
    coupling = CouplingSpec(
        kind=ckind,
        strength=float(cdoc.get("g", 1.0)),
        width=float(cdoc.get("sigma", 1.0)),
        samples=None if samples is None else np.asarray(samples, dtype=float))

    hdoc = config.get("hg", {})
    _check_keys(hdoc, ("stiffness", "potential"), "hg.")
    pot = hdoc.get("potential", {"kind": "zero"})
    if isinstance(pot, Mapping):
        potential = _named_potential(pot, xi_grid)
    else:
        potential = np.asarray(pot, dtype=float)
        if potential.shape != (n_g,):
            raise ConfigError("hg.potential: length must equal grid.n")

    return ProblemSpec(xi_grid=xi_grid, modes=basis, coupling=coupling,
                       g_stiffness=float(hdoc.get("stiffness", 1.0)),
                       g_potential=potential)
