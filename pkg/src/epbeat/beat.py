"""Stochastic simulation of the realization-switching beat process.

Each cycle the system passes through the intermediate realization and
reduces to one regular realization, drawn independently with the
fixed weights alpha; one completed reduction-extension cycle is one
time tick. The draw at tick t uses output t of the counter-based
generator, so a trajectory is a pure function of
(realization set, T, seed, mode).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng
from .errors import ConfigError
from .realizations import RealizationSet


@dataclass(frozen=True)
class BeatEvent:
    """One reduction event: which realization emerged, where, and when."""

    tick: int
    realization_id: int
    center_index: int
    center_coord: float


@dataclass(frozen=True)
class BeatTrajectory:
    seed: int
    mode: str
    events: tuple
    empirical: tuple

    @property
    def length(self) -> int:
        return len(self.events)

    def id_sequence(self) -> np.ndarray:
        return np.array([e.realization_id for e in self.events], dtype=int)


def simulate_beat(rs: RealizationSet, t: int, seed: int,
                  mode: str) -> BeatTrajectory:
    """Generate T reduction events with the weights attached for mode.

    When no regular group exists the intermediate realization is the
    only outcome; its events carry the sentinel center index -1 (no
    sharp center of reduction).
    """
    if t < 1:
        raise ConfigError(f"cycles: need T >= 1, got {t}")
    if mode not in rs.alphas:
        raise ConfigError(
            f"simulate_beat: probabilities not computed for mode {mode!r}")
    alpha = np.asarray(rs.alphas[mode], dtype=float)
    if alpha.size == 0:
        raise ConfigError("simulate_beat: empty realization set")
    draws = rng.categorical_block(seed, 0, t, alpha)
    if rs.groups:
        centers = [(g.center_index, g.center_coord) for g in rs.groups]
    else:
        centers = [(-1, float("nan"))]
    events = tuple(
        BeatEvent(tick=i, realization_id=int(j),
                  center_index=centers[j][0], center_coord=centers[j][1])
        for i, j in enumerate(draws))
    counts = np.bincount(draws, minlength=alpha.size)
    empirical = tuple(counts.astype(float) / t)
    return BeatTrajectory(seed=seed, mode=mode, events=events,
                          empirical=empirical)


def empirical_freqs(traj: BeatTrajectory) -> tuple:
    """Visit frequency per realization id, count_j / T."""
    if traj.length == 0:
        raise ConfigError("empirical_freqs: empty trajectory")
    ids = traj.id_sequence()
    counts = np.bincount(ids, minlength=len(traj.empirical))
    return tuple(counts.astype(float) / traj.length)
