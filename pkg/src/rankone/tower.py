"""Exact bookkeeping for rank-one cutting-and-stacking constructions.

Stage ``j`` cuts the tower of height ``h_j`` (levels ``0..h_j``) into ``r_j``
columns, puts ``s_j(i)`` spacer levels on top of column ``i`` and stacks the
columns left to right.  Tower ``j + 1`` therefore has

    h_{j+1} + 1 = (h_j + 1) * r_j + sum_i s_j(i)

levels.  Stages and towers are numbered from 1; a schedule with ``n`` stages
has towers ``1..n+1``.  All computations treat a chosen tower ``J`` as the
whole probability space: each of its ``h_J + 1`` levels has measure
``1 / (h_J + 1)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .errors import (
    HeightOverflowError,
    InvalidRangeError,
    InvalidStageError,
    ResourceError,
    ScheduleShapeError,
)

MAX_HEIGHT = 2**63 - 1
DEFAULT_OFFSET_BUDGET = 2**26
DEFAULT_BIT_BUDGET = 2**34


@dataclass(frozen=True)
class Stage:
    index: int
    cuts: int
    spacers: tuple[int, ...]

    def __post_init__(self):
        if len(self.spacers) != self.cuts:
            raise ScheduleShapeError(
                f"stage {self.index}: {len(self.spacers)} spacer entries for {self.cuts} cuts"
            )
        if self.cuts < 2:
            raise InvalidStageError(f"stage {self.index}: cuts must be >= 2, got {self.cuts}")
        if any(s < 0 for s in self.spacers):
            raise InvalidStageError(f"stage {self.index}: negative spacer count")

    @property
    def spacer_total(self) -> int:
        return sum(self.spacers)

    def offsets(self, height: int) -> np.ndarray:
        """Start positions of the ``cuts`` column copies inside the next tower."""
        widths = np.asarray(self.spacers, dtype=np.int64) + (height + 1)
        out = np.zeros(self.cuts, dtype=np.int64)
        np.cumsum(widths[:-1], out=out[1:])
        return out


def _next_height(height: int, cuts: int, spacers: Sequence[int]) -> int:
    nxt = (height + 1) * cuts + sum(spacers) - 1
    if nxt > MAX_HEIGHT:
        raise HeightOverflowError(f"tower height {nxt} exceeds 2**63 - 1")
    return nxt


@dataclass(frozen=True)
class SpacerSchedule:
    """Initial height, stages, derived heights and recipe markers.

    ``heights[t - 1]`` is ``h_t`` for towers ``t = 1..len(stages) + 1``.
    ``markers`` pairs a stage index with a special time ``m_j``.
    """

    h1: int = 0
    stages: tuple[Stage, ...] = ()
    heights: tuple[int, ...] = field(default=())
    markers: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if self.h1 < 0:
            raise InvalidStageError("initial height must be >= 0")
        if not self.heights:
            hs = [self.h1]
            for st in self.stages:
                hs.append(_next_height(hs[-1], st.cuts, st.spacers))
            object.__setattr__(self, "heights", tuple(hs))
        if len(self.heights) != len(self.stages) + 1 or self.heights[0] != self.h1:
            raise ScheduleShapeError("heights do not match the stages")
        for k, st in enumerate(self.stages):
            if st.index != k + 1:
                raise ScheduleShapeError(f"stage at position {k} has index {st.index}")
            if self.heights[k + 1] + 1 != (self.heights[k] + 1) * st.cuts + st.spacer_total:
                raise ScheduleShapeError(f"height recursion broken at stage {st.index}")

    @property
    def depth(self) -> int:
        return len(self.stages)

    @property
    def top(self) -> int:
        """Index of the tallest tower."""
        return len(self.stages) + 1

    def height(self, j: int) -> int:
        self.check_tower(j)
        return self.heights[j - 1]

    def stage(self, j: int) -> Stage:
        if not 1 <= j <= len(self.stages):
            raise InvalidRangeError(f"stage {j} outside 1..{len(self.stages)}")
        return self.stages[j - 1]

    def check_tower(self, j: int) -> None:
        if not 1 <= j <= self.top:
            raise InvalidRangeError(f"tower {j} outside 1..{self.top}")

    def marker(self, j: int) -> int:
        for stage, m in self.markers:
            if stage == j:
                return m
        raise KeyError(f"no marker on stage {j}")

    @property
    def marker_stages(self) -> tuple[int, ...]:
        return tuple(j for j, _ in self.markers)

    def with_marker(self, j: int, m: int) -> "SpacerSchedule":
        self.stage(j)
        return SpacerSchedule(self.h1, self.stages, self.heights, self.markers + ((j, int(m)),))

    def to_dict(self) -> dict:
        return {
            "h1": self.h1,
            "stages": [{"index": s.index, "cuts": s.cuts, "spacers": list(s.spacers)} for s in self.stages],
            "heights": list(self.heights),
            "markers": [list(m) for m in self.markers],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SpacerSchedule":
        stages = tuple(Stage(int(s["index"]), int(s["cuts"]), tuple(int(x) for x in s["spacers"])) for s in data["stages"])
        markers = tuple((int(j), int(m)) for j, m in data.get("markers", ()))
        return cls(int(data.get("h1", 0)), stages, (), markers)


def empty_schedule(h1: int = 0) -> SpacerSchedule:
    return SpacerSchedule(h1=h1)


def append_stage(
    schedule: SpacerSchedule, cuts: int, spacers: Iterable[int], marker: int | None = None
) -> SpacerSchedule:
    """Return ``schedule`` extended by one stage; the input is left untouched."""
    spacers = tuple(int(s) for s in spacers)
    index = schedule.depth + 1
    stage = Stage(index, int(cuts), spacers)
    new_h = _next_height(schedule.heights[-1], stage.cuts, spacers)
    markers = schedule.markers + (((index, int(marker)),) if marker is not None else ())
    return SpacerSchedule(schedule.h1, schedule.stages + (stage,), schedule.heights + (new_h,), markers)


def schedule_from_stages(h1: int, stages: Iterable[tuple[int, Sequence[int]]]) -> SpacerSchedule:
    sched = empty_schedule(h1)
    for cuts, spacers in stages:
        sched = append_stage(sched, cuts, spacers)
    return sched


# ---------------------------------------------------------------------------
# occurrences and positions


@dataclass(frozen=True)
class Occurrences:
    from_stage: int
    to_stage: int
    offsets: np.ndarray

    def __len__(self) -> int:
        return int(self.offsets.size)


def _check_range(schedule: SpacerSchedule, j: int, J: int) -> None:
    schedule.check_tower(j)
    schedule.check_tower(J)
    if j > J:
        raise InvalidRangeError(f"from-stage {j} above to-stage {J}")


def occurrence_count(schedule: SpacerSchedule, j: int, J: int) -> int:
    _check_range(schedule, j, J)
    count = 1
    for i in range(j, J):
        count *= schedule.stage(i).cuts
    return count


def occurrences(
    schedule: SpacerSchedule, j: int, J: int, budget: int = DEFAULT_OFFSET_BUDGET
) -> Occurrences:
    """Sorted start positions of the copies of tower ``j`` inside tower ``J``."""
    count = occurrence_count(schedule, j, J)
    if count > budget:
        raise ResourceError(f"occurrences {j}->{J} too many to materialize", count, budget)
    offsets = np.zeros(1, dtype=np.int64)
    for i in range(J - 1, j - 1, -1):
        inner = schedule.stage(i).offsets(schedule.height(i))
        offsets = np.add.outer(offsets, inner).ravel()
    return Occurrences(j, J, offsets)


@dataclass(frozen=True)
class LevelSet:
    """A union of levels ``T^l E_j`` of tower ``stage``."""

    stage: int
    levels: tuple[int, ...]

    def __post_init__(self):
        levels = tuple(sorted({int(x) for x in self.levels}))
        if levels and levels[0] < 0:
            raise InvalidRangeError("levels must be >= 0")
        object.__setattr__(self, "levels", levels)

    @classmethod
    def single(cls, stage: int, level: int) -> "LevelSet":
        return cls(stage, (level,))

    @classmethod
    def interval(cls, stage: int, lo: int, hi: int) -> "LevelSet":
        """Levels ``lo..hi`` inclusive."""
        return cls(stage, tuple(range(lo, hi + 1)))

    @classmethod
    def full(cls, schedule: SpacerSchedule, stage: int) -> "LevelSet":
        return cls(stage, tuple(range(schedule.height(stage) + 1)))

    def __len__(self) -> int:
        return len(self.levels)

    def check(self, schedule: SpacerSchedule) -> None:
        h = schedule.height(self.stage)
        if self.levels and self.levels[-1] > h:
            raise InvalidRangeError(f"level {self.levels[-1]} above h_{self.stage} = {h}")

    def union(self, other: "LevelSet") -> "LevelSet":
        if other.stage != self.stage:
            raise InvalidRangeError("union of level sets from different towers")
        return LevelSet(self.stage, self.levels + other.levels)

    def label(self) -> str:
        lv = self.levels
        if len(lv) > 1 and lv[-1] - lv[0] + 1 == len(lv):
            return f"{self.stage}:{lv[0]}-{lv[-1]}"
        return f"{self.stage}:" + ",".join(map(str, lv))


@dataclass(frozen=True, eq=False)
class PositionSet:
    """Bit-indexed subset of the levels ``0..h_J`` of tower ``to_stage``."""

    to_stage: int
    nbits: int
    words: np.ndarray

    @property
    def count(self) -> int:
        return _kernels.popcount(self.words)

    def positions(self) -> np.ndarray:
        return _kernels.to_positions(self.words)

    def __len__(self) -> int:
        return self.count

    def __eq__(self, other) -> bool:
        if not isinstance(other, PositionSet):
            return NotImplemented
        return self.to_stage == other.to_stage and self.nbits == other.nbits and np.array_equal(self.words, other.words)

    __hash__ = None


def _check_bits(nbits: int, bit_budget: int) -> None:
    if nbits > bit_budget:
        raise ResourceError("position bit vector too long", nbits, bit_budget)


def lift(schedule: SpacerSchedule, words: np.ndarray, j: int, J: int, bit_budget: int = DEFAULT_BIT_BUDGET) -> np.ndarray:
    """Carry a bit set over tower ``j`` up to tower ``J`` one stage at a time."""
    _check_range(schedule, j, J)
    _check_bits(schedule.height(J) + 1, bit_budget)
    for i in range(j, J):
        words = _kernels.tile(words, schedule.stage(i).offsets(schedule.height(i)), schedule.height(i + 1) + 1)
    return words


def positions(
    schedule: SpacerSchedule, A: LevelSet, J: int, bit_budget: int = DEFAULT_BIT_BUDGET
) -> PositionSet:
    """Realize a level set of tower ``A.stage`` inside tower ``J``."""
    _check_range(schedule, A.stage, J)
    A.check(schedule)
    _check_bits(schedule.height(J) + 1, bit_budget)
    base = _kernels.from_positions(A.levels, schedule.height(A.stage) + 1)
    words = lift(schedule, base, A.stage, J, bit_budget)
    return PositionSet(J, schedule.height(J) + 1, words)


def level_measure(schedule: SpacerSchedule, A: LevelSet, J: int) -> Fraction:
    """Measure of ``A`` when tower ``J`` is normalized to total mass 1.

    Computed from the occurrence count without materializing positions.
    """
    _check_range(schedule, A.stage, J)
    A.check(schedule)
    return Fraction(len(A.levels) * occurrence_count(schedule, A.stage, J), schedule.height(J) + 1)


@dataclass(frozen=True)
class SpacerMassRow:
    stage: int
    added: int
    fraction: Fraction
    base_tower_measure: Fraction


def spacer_mass_report(schedule: SpacerSchedule) -> list[SpacerMassRow]:
    """Per stage: share of the next tower taken by the new spacers.

    ``base_tower_measure`` is the running product of ``1 - fraction``, i.e.
    the measure of tower 1 inside the tower just built.
    """
    if not schedule.stages:
        raise InvalidRangeError("schedule has no stages")
    rows = []
    running = Fraction(1)
    for st in schedule.stages:
        added = st.spacer_total
        frac = Fraction(added, schedule.height(st.index + 1) + 1)
        running *= 1 - frac
        rows.append(SpacerMassRow(st.index, added, frac, running))
    return rows
