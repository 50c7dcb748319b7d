from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rankone import (
    LevelSet,
    SpacerSchedule,
    append_stage,
    empty_schedule,
    level_measure,
    occurrences,
    positions,
    spacer_mass_report,
)
from rankone.errors import (
    HeightOverflowError,
    InvalidRangeError,
    InvalidStageError,
    ResourceError,
    ScheduleShapeError,
)
from rankone.oracle import unroll
from rankone.recipes import build_staircase_schedule
from rankone.tower import occurrence_count, schedule_from_stages

from strategies import schedules


# -- append_stage ---------------------------------------------------------


def test_append_stage_examples(tiny):
    assert tiny.heights == (0, 3)
    s = append_stage(empty_schedule(3), 2, [1, 2])
    assert s.height(2) == 10
    with pytest.raises(ScheduleShapeError):
        append_stage(empty_schedule(3), 2, [1, 2, 0])


def test_append_stage_leaves_input_untouched(tiny):
    before = tiny.to_dict()
    append_stage(tiny, 2, [0, 0])
    assert tiny.to_dict() == before


def test_invalid_stages():
    with pytest.raises(InvalidStageError):
        append_stage(empty_schedule(), 1, [0])
    with pytest.raises(InvalidStageError):
        append_stage(empty_schedule(), 2, [0, -1])
    with pytest.raises(InvalidStageError):
        empty_schedule(-1)


def test_height_overflow_is_a_hard_error():
    s = empty_schedule(2**40)
    with pytest.raises(HeightOverflowError):
        append_stage(s, 2**23, [0] * 2**23)


def test_towers_and_stages_are_range_checked(tiny):
    assert tiny.depth == 1 and tiny.top == 2
    with pytest.raises(InvalidRangeError):
        tiny.height(3)
    with pytest.raises(InvalidRangeError):
        tiny.stage(2)
    with pytest.raises(KeyError):
        tiny.marker(1)


def test_schedule_roundtrip_through_dict():
    s = append_stage(append_stage(empty_schedule(1), 3, [0, 2, 1], marker=7), 2, [4, 0])
    t = SpacerSchedule.from_dict(s.to_dict())
    assert t == s
    assert t.marker(1) == 7 and t.marker_stages == (1,)


def test_tampered_heights_rejected(tiny):
    with pytest.raises(ScheduleShapeError):
        SpacerSchedule(tiny.h1, tiny.stages, (0, 4))


@given(schedules(max_depth=6, max_height=10**7))
def test_height_recursion_and_monotonicity(s):
    for st_ in s.stages:
        j = st_.index
        assert s.height(j + 1) + 1 - (s.height(j) + 1) * st_.cuts - sum(st_.spacers) == 0
        assert s.height(j + 1) > s.height(j)


# -- occurrences -----------------------------------------------------------


def test_occurrence_examples(tiny):
    assert occurrences(tiny, 1, 2).offsets.tolist() == [0, 1, 3]
    assert occurrences(tiny, 1, 1).offsets.tolist() == [0]
    with pytest.raises(InvalidRangeError):
        occurrences(tiny, 2, 1)


def test_two_stage_zero_spacers_against_oracle():
    s = schedule_from_stages(4, [(2, [0, 0]), (2, [0, 0])])
    offs = occurrences(s, 1, 3).offsets.tolist()
    assert offs == [0, 5, 10, 15]
    flat = unroll(s, 3)
    assert offs == np.flatnonzero(flat.label(1) == 0).tolist()


def test_occurrence_budget_reports_required_count():
    s = build_staircase_schedule(8, 3)
    with pytest.raises(ResourceError) as err:
        occurrences(s, 1, 4, budget=100)
    assert err.value.required == 512 and err.value.budget == 100


@given(schedules())
def test_occurrence_invariants(s):
    J = s.top
    for j in range(1, J + 1):
        o = occurrences(s, j, J).offsets
        assert len(o) == occurrence_count(s, j, J) == int(np.prod([s.stage(i).cuts for i in range(j, J)]))
        assert o[0] == 0 and np.all(np.diff(o) > 0)
        assert o[-1] + s.height(j) <= s.height(J)


# -- positions and measures --------------------------------------------------


def test_position_examples(tiny):
    assert positions(tiny, LevelSet.single(1, 0), 2).positions().tolist() == [0, 1, 3]
    s = schedule_from_stages(3, [(2, [4, 0])])
    assert occurrences(s, 1, 2).offsets.tolist() == [0, 8]
    assert positions(s, LevelSet(1, (0, 2)), 2).positions().tolist() == [0, 2, 8, 10]
    s2 = schedule_from_stages(3, [(2, [7, 0])])
    assert positions(s2, LevelSet(1, (0, 2)), 2).positions().tolist() == [0, 2, 11, 13]


def test_level_set_checks(tiny):
    with pytest.raises(InvalidRangeError):
        LevelSet(1, (-1,))
    with pytest.raises(InvalidRangeError):
        positions(tiny, LevelSet.single(1, 1), 2)
    assert LevelSet(2, (3, 1, 1)).levels == (1, 3)
    assert LevelSet.interval(2, 0, 3).label() == "2:0-3"
    with pytest.raises(InvalidRangeError):
        LevelSet.single(1, 0).union(LevelSet.single(2, 0))


def test_measure_examples(tiny):
    assert level_measure(tiny, LevelSet.full(tiny, 2), 2) == 1
    assert level_measure(tiny, LevelSet.single(1, 0), 2) == Fraction(3, 4)
    # each of the r cut pieces of E_j carries mu(E_j) / r
    s = build_staircase_schedule([3, 2], 2, h1=1)
    base = level_measure(s, LevelSet.single(1, 0), 3)
    piece = level_measure(s, LevelSet.single(2, 0), 3)  # the first column's base
    assert piece == base / 3


@given(schedules(), st.data())
def test_position_counts_nesting_and_additivity(s, data):
    J = s.top
    j = data.draw(st.integers(1, J))
    h = s.height(j)
    levels = data.draw(st.lists(st.integers(0, h), min_size=1, max_size=6, unique=True))
    A = LevelSet(j, tuple(levels))
    P = positions(s, A, J)
    assert P.count == len(A.levels) * occurrence_count(s, j, J)
    want = sorted(o + l for o in occurrences(s, j, J).offsets.tolist() for l in A.levels)
    assert P.positions().tolist() == want
    # nesting: j -> j' -> J equals j -> J
    jp = data.draw(st.integers(j, J))
    mid = positions(s, A, jp).positions()
    via = sorted(o + p for o in occurrences(s, jp, J).offsets.tolist() for p in mid.tolist())
    assert via == want
    # additivity over disjoint level sets
    rest = tuple(x for x in range(h + 1) if x not in A.levels)
    if rest:
        B = LevelSet(j, rest)
        total = level_measure(s, A, J) + level_measure(s, B, J)
        assert total == level_measure(s, A.union(B), J) == level_measure(s, LevelSet.full(s, j), J)


@given(schedules())
def test_positions_match_oracle(s):
    J = s.top
    flat = unroll(s, J)
    for j in range(1, J + 1):
        A = LevelSet.interval(j, 0, min(2, s.height(j)))
        assert positions(s, A, J).positions().tolist() == flat.positions(A)
        assert level_measure(s, A, J) == Fraction(len(flat.positions(A)), s.height(J) + 1)


# -- spacer mass --------------------------------------------------------------


def test_spacer_mass_examples(tiny):
    rows = spacer_mass_report(tiny)
    assert rows[0].fraction == Fraction(1, 4) and rows[0].base_tower_measure == Fraction(3, 4)
    zero = schedule_from_stages(0, [(2, [0, 0]), (3, [0, 0, 0])])
    assert all(r.fraction == 0 and r.base_tower_measure == 1 for r in spacer_mass_report(zero))
    with pytest.raises(InvalidRangeError):
        spacer_mass_report(empty_schedule())


def test_spacer_mass_base_measure_matches_level_measure():
    s = build_staircase_schedule([2, 3, 4], 3, h1=0)
    rows = spacer_mass_report(s)
    assert rows[-1].base_tower_measure == level_measure(s, LevelSet.full(s, 1), s.top)


def test_staircase_spacer_fractions_shrink():
    # r_j = j + 1 staircase: new-spacer share falls stage after stage and the sum stays bounded
    s = build_staircase_schedule([j + 1 for j in range(1, 11)], 10, h1=0)
    fr = [float(r.fraction) for r in spacer_mass_report(s)]
    assert all(b < a for a, b in zip(fr[1:], fr[2:]))
    assert sum(fr) < 2.0
    assert spacer_mass_report(s)[-1].base_tower_measure > 0
