"""Brute-force ground truth: the coupled problem solved head-on.

The full coupled-channel operator over all modes is assembled and
diagonalized directly (LAPACK via numpy), with no reduction to the
effective potential. Whatever the pole machinery produces must agree
with this to working precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError
from .model import CouplingMatrices, ProblemSpec, hamiltonian_g

DIMENSION_CAP = 2000


def build_full_operator(spec: ProblemSpec, v: CouplingMatrices) -> np.ndarray:
    """H[(n,xi),(n',xi')] = delta_nn' (h_g + eps_n I) + delta_xi,xi' V_nn'."""
    n_tot, n_g = spec.n_tot, spec.n_g
    hg = hamiltonian_g(spec)
    out = np.zeros((n_tot * n_g, n_tot * n_g))
    idx = np.arange(n_g)
    for n in range(n_tot):
        sl = slice(n * n_g, (n + 1) * n_g)
        out[sl, sl] = hg + np.diag(v.v[n, n]) + spec.modes.eps[n] * np.eye(n_g)
        for m in range(n + 1, n_tot):
            sm = slice(m * n_g, (m + 1) * n_g)
            out[sl, sm][idx, idx] = v.v[n, m]
            out[sm, sl][idx, idx] = v.v[n, m]
    return out


def direct_spectrum(spec: ProblemSpec, v: CouplingMatrices,
                    dimension_cap: int = DIMENSION_CAP):
    """All eigenpairs of the full operator, energies sorted ascending."""
    dim = spec.n_tot * spec.n_g
    if dim > dimension_cap:
        raise NumericalError(
            f"direct_spectrum: dimension {dim} exceeds cap {dimension_cap}")
    h = build_full_operator(spec, v)
    energies, vectors = np.linalg.eigh(h)
    return energies, vectors


@dataclass(frozen=True)
class ComparisonReport:
    max_abs_dev: float
    max_rel_dev: float
    matched_pairs: int
    unmatched_a: tuple
    unmatched_b: tuple
    passed: bool

    def to_dict(self) -> dict:
        return {
            "max_abs_dev": float(self.max_abs_dev),
            "max_rel_dev": float(self.max_rel_dev),
            "matched_pairs": self.matched_pairs,
            "unmatched_a": [float(x) for x in self.unmatched_a],
            "unmatched_b": [float(x) for x in self.unmatched_b],
            "passed": bool(self.passed),
        }


def compare_spectra(a, b, tol: float) -> ComparisonReport:
    """Greedy nearest matching of two sorted spectra.

    Relative deviation is measured against the overall spectral scale
    max(|a|, |b|) (the natural scale for eigenvalue perturbations);
    passes iff the worst matched deviation clears tol and nothing is
    left unmatched.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    scale = max(np.max(np.abs(a), initial=0.0),
                np.max(np.abs(b), initial=0.0), 1e-300)
    i = j = 0
    devs = []
    unmatched_a, unmatched_b = [], []
    while i < a.size and j < b.size:
        left_a, left_b = a.size - i, b.size - j
        if left_a > left_b and i + 1 < a.size \
                and abs(a[i + 1] - b[j]) < abs(a[i] - b[j]):
            unmatched_a.append(a[i])
            i += 1
            continue
        if left_b > left_a and j + 1 < b.size \
                and abs(a[i] - b[j + 1]) < abs(a[i] - b[j]):
            unmatched_b.append(b[j])
            j += 1
            continue
        devs.append(abs(a[i] - b[j]))
        i += 1
        j += 1
    unmatched_a.extend(a[i:])
    unmatched_b.extend(b[j:])
    max_abs = float(max(devs)) if devs else 0.0
    max_rel = max_abs / scale
    passed = (max_rel <= tol and not unmatched_a and not unmatched_b)
    return ComparisonReport(max_abs_dev=max_abs, max_rel_dev=max_rel,
                            matched_pairs=len(devs),
                            unmatched_a=tuple(unmatched_a),
                            unmatched_b=tuple(unmatched_b),
                            passed=passed)
