"""Brute-force replay of the cut-and-stack steps, for cross-checking.

Every level of the truncation tower gets one label per tracked stage: the
level index inside the copy of that stage's tower it belongs to, or ``-1`` if
it is a spacer added later.  ``T`` acts as ``p -> p + 1``.  Nothing here uses
the offset arithmetic of :mod:`rankone.tower`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

from .errors import InvalidRangeError, OracleScaleError
from .tower import LevelSet, SpacerSchedule

ORACLE_MAX_HEIGHT = 10**6
SPACER = -1


@dataclass(frozen=True)
class FlatTower:
    J: int
    height: int
    labels: dict[int, np.ndarray]

    def label(self, stage: int) -> np.ndarray:
        if stage not in self.labels:
            raise InvalidRangeError(f"stage {stage} was not tracked")
        return self.labels[stage]

    def mask(self, A: LevelSet) -> np.ndarray:
        lab = self.label(A.stage)
        return np.isin(lab, np.asarray(A.levels, dtype=np.int64))

    def positions(self, A: LevelSet) -> list[int]:
        return np.flatnonzero(self.mask(A)).tolist()


def unroll(schedule: SpacerSchedule, J: int, tracked_stages: Iterable[int] | None = None) -> FlatTower:
    """Replay stages ``1..J-1`` level by level, keeping ancestry for ``tracked_stages``."""
    schedule.check_tower(J)
    tracked = sorted(set(tracked_stages)) if tracked_stages is not None else list(range(1, J + 1))
    for t in tracked:
        if not 1 <= t <= J:
            raise InvalidRangeError(f"tracked stage {t} outside 1..{J}")
    if schedule.heights[J - 1] > ORACLE_MAX_HEIGHT:
        raise OracleScaleError(f"h_J = {schedule.heights[J - 1]} above oracle limit {ORACLE_MAX_HEIGHT}")

    # column: list of per-level label tuples, one entry per tracked stage
    tower = [tuple(lvl if t == 1 else SPACER for t in tracked) for lvl in range(schedule.h1 + 1)]
    for i in range(1, J):
        stage = schedule.stages[i - 1]
        spacer = tuple(SPACER for _ in tracked)
        stacked = []
        for col in range(stage.cuts):
            stacked.extend(tower)
            stacked.extend([spacer] * stage.spacers[col])
        tower = [
            tuple(lvl if t == i + 1 else lab for t, lab in zip(tracked, levels))
            for lvl, levels in enumerate(stacked)
        ]

    arr = np.array(tower, dtype=np.int64).reshape(len(tower), len(tracked))
    labels = {t: arr[:, k].copy() for k, t in enumerate(tracked)}
    return FlatTower(J, len(tower) - 1, labels)


def oracle_measure(tower: FlatTower, A: LevelSet) -> Fraction:
    return Fraction(int(tower.mask(A).sum()), tower.height + 1)


def oracle_correlation(tower: FlatTower, m: int, A: LevelSet, B: LevelSet) -> Fraction:
    """``#{p : p in A, p + m in B}`` by direct scan, over ``h_J + 1``."""
    n = tower.height + 1
    if abs(m) > tower.height:
        raise InvalidRangeError(f"|m| = {abs(m)} exceeds h_J = {tower.height}")
    a, b = tower.mask(A), tower.mask(B)
    if m >= 0:
        hits = np.count_nonzero(a[: n - m] & b[m:])
    else:
        hits = np.count_nonzero(a[-m:] & b[: n + m])
    return Fraction(int(hits), n)
