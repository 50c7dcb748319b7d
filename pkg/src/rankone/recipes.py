"""Spacer generators: Ornstein stochastic, staircase, (N, s) and (n, a, b) recipes.

Special times are expressed in terms of column width.  A column of tower ``j``
is ``h_j + 1`` levels tall, so a run of ``L`` columns whose spacers average
exactly ``H`` spans ``(h_j + 1 + H) * L`` levels; that is the time at which
``T`` carries each such column onto the column ``L`` places further right.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Sequence

import numpy as np

from .errors import ParameterError
from .tower import SpacerSchedule, append_stage, empty_schedule


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for ``(seed, *key)``; identical inputs give identical streams."""
    if not 0 <= int(seed) < 2**64:
        raise ParameterError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key)))


def _rational(x, name: str) -> Fraction:
    if isinstance(x, Rational):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(repr(x))
    if isinstance(x, str):
        return Fraction(x)
    raise ParameterError(f"{name} must be rational, got {x!r}")


@dataclass(frozen=True)
class SpecialTime:
    """``m = (h + 1 + H) * L`` for a stage of height ``h``."""

    H: int
    L: int = 1

    def __call__(self, h: int) -> int:
        return (h + 1 + self.H) * self.L


# ---------------------------------------------------------------------------
# Ornstein


@dataclass(frozen=True)
class OrnsteinParams:
    H_j: int
    r_j: int
    seed: int = 0

    def __post_init__(self):
        if self.H_j < 1:
            raise ParameterError(f"Ornstein mean spacer H_j must be >= 1, got {self.H_j}")
        if self.r_j < 2:
            raise ParameterError(f"Ornstein cut count r_j must be >= 2, got {self.r_j}")


def ornstein_draws(H: int, r: int, rng: np.random.Generator, cyclic: bool = False) -> np.ndarray:
    """Uniform draws ``a(1..r+1)`` on ``{0..H}``; ``cyclic`` ties ``a(r+1)`` to ``a(1)``."""
    a = rng.integers(0, H, size=r + 1, endpoint=True, dtype=np.int64)
    if cyclic:
        a[r] = a[0]
    return a


def spacers_from_draws(H: int, a) -> np.ndarray:
    a = np.asarray(a, dtype=np.int64)
    return H + a[:-1] - a[1:]


def ornstein_spacers(p: OrnsteinParams, *stream_key: int) -> list[int]:
    a = ornstein_draws(p.H_j, p.r_j, stream(p.seed, *stream_key))
    return spacers_from_draws(p.H_j, a).tolist()


def ornstein_params_draws(p: OrnsteinParams, *stream_key: int) -> np.ndarray:
    """The draws behind :func:`ornstein_spacers` for the same params and key."""
    return ornstein_draws(p.H_j, p.r_j, stream(p.seed, *stream_key))


# ---------------------------------------------------------------------------
# staircase


def staircase_spacers(r: int) -> list[int]:
    if r < 2:
        raise ParameterError(f"staircase needs r >= 2, got {r}")
    return list(range(1, r + 1))


# ---------------------------------------------------------------------------
# (N, s) construction


@dataclass(frozen=True)
class NsParams:
    N: int
    s: int
    L_j: int
    H_j: int
    epsilon: Fraction = Fraction(1, 2)
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "epsilon", _rational(self.epsilon, "epsilon"))
        if self.N < 1:
            raise ParameterError(f"N must be >= 1, got {self.N}")
        if not 1 <= self.s <= self.N:
            raise ParameterError(f"s must satisfy 1 <= s <= N, got s={self.s}, N={self.N}")
        if not 0 < self.epsilon < 1:
            raise ParameterError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.L_j < 1:
            raise ParameterError(f"L_j must be >= 1, got {self.L_j}")
        if self.H_j < 1:
            raise ParameterError(f"H_j must be >= 1, got {self.H_j}")
        if self.N == 1:
            raise ParameterError("N = 1 leaves no block k != s")

    @property
    def ks(self) -> tuple[int, ...]:
        return tuple(k for k in range(1, self.N + 1) if k != self.s)

    def filler_length(self, k: int) -> int:
        return int(k * self.L_j / self.epsilon)

    @property
    def cuts(self) -> int:
        return sum(2 * k * self.L_j + self.filler_length(k) for k in self.ks)


@dataclass(frozen=True)
class Block:
    name: str
    start: int
    length: int


@dataclass(frozen=True)
class RecipeStage:
    """A generated spacer vector with its layout and special-time rule."""

    spacers: tuple[int, ...]
    rule: SpecialTime
    blocks: tuple[Block, ...] = field(default=())

    @property
    def cuts(self) -> int:
        return len(self.spacers)

    def block(self, name: str) -> tuple[int, ...]:
        for b in self.blocks:
            if b.name == name:
                return self.spacers[b.start : b.start + b.length]
        raise KeyError(name)


def ns_spacers(p: NsParams, stage: int = 0) -> RecipeStage:
    """Concatenate ``Sk, Sk, Ak`` for every ``k != s`` in increasing order.

    Both copies of ``Sk`` carry the same draws and sum to exactly ``k L H``;
    ``Ak`` is an independent Ornstein array of length ``floor(k L / epsilon)``.
    Block ``s`` is left out.
    """
    out: list[int] = []
    blocks: list[Block] = []
    for k in p.ks:
        n = k * p.L_j
        sk = spacers_from_draws(p.H_j, ornstein_draws(p.H_j, n, stream(p.seed, stage, k, 0), cyclic=True)).tolist()
        ak_len = p.filler_length(k)
        ak = spacers_from_draws(p.H_j, ornstein_draws(p.H_j, ak_len, stream(p.seed, stage, k, 1))).tolist()
        for name, arr in ((f"S{k}", sk), (f"S{k}", sk), (f"A{k}", ak)):
            blocks.append(Block(name, len(out), len(arr)))
            out.extend(arr)
    return RecipeStage(tuple(out), SpecialTime(p.H_j, p.L_j), tuple(blocks))


def build_ns_schedule(
    p: NsParams,
    depth: int,
    h1: int = 0,
    H_from_height: bool = True,
) -> SpacerSchedule:
    """Stack ``depth`` (N, s) stages, each with a marker ``m_j``.

    With ``H_from_height`` the mean spacer of stage ``j`` is
    ``max(p.H_j, h_{j-1})`` (the height one stage down), so the Ornstein
    spread outgrows every earlier tower; otherwise ``p.H_j`` is used throughout.
    """
    if depth < 1:
        raise ParameterError("depth must be >= 1")
    sched = empty_schedule(h1)
    for j in range(1, depth + 1):
        H = p.H_j
        if H_from_height and j >= 2:
            H = max(p.H_j, sched.height(j - 1))
        stage_p = NsParams(p.N, p.s, p.L_j, H, p.epsilon, p.seed)
        rec = ns_spacers(stage_p, stage=j)
        sched = append_stage(sched, rec.cuts, rec.spacers, marker=rec.rule(sched.height(j)))
    return sched


# ---------------------------------------------------------------------------
# (n, a, b) construction


@dataclass(frozen=True)
class NabParams:
    n: int
    a: Fraction
    b: Fraction
    r_j: int
    H_j: int = 1

    def __post_init__(self):
        object.__setattr__(self, "a", _rational(self.a, "a"))
        object.__setattr__(self, "b", _rational(self.b, "b"))
        if self.n < 2:
            raise ParameterError(f"n must be > 1, got {self.n}")
        if self.a <= 0 or self.b <= 0:
            raise ParameterError("a and b must be positive")
        if self.a + self.b >= 1:
            raise ParameterError("a + b must be < 1 so that c = 1 - a - b > 0")
        if self.n * self.H_j < 1:
            raise ParameterError("n * H_j must be >= 1")

    @property
    def c(self) -> Fraction:
        return 1 - self.a - self.b

    def boundaries(self, r: int | None = None) -> tuple[int, int]:
        """Last index of the a-part and of the b-part (1-based)."""
        r = self.r_j if r is None else r
        a_end = int(self.a * r)
        b_end = int((self.a + self.b) * r)
        if a_end < 1:
            raise ParameterError(f"a-part is empty (floor(a r) = {a_end})")
        if b_end <= a_end:
            raise ParameterError("b-part is empty")
        if b_end >= r:
            raise ParameterError("c-part is empty")
        return a_end, b_end


def nab_spacers(p: NabParams, relative: bool = False) -> RecipeStage:
    """Flat a-part, polynomial b-part, staircase c-part.

    In the b-part the long spacer ``n H - 1`` sits at indices divisible by
    ``n``; ``relative`` counts from the a/b boundary instead of from 1.
    """
    a_end, b_end = p.boundaries()
    out = []
    for i in range(1, p.r_j + 1):
        if i <= a_end:
            out.append(p.H_j)
        elif i <= b_end:
            idx = i - a_end if relative else i
            out.append(p.n * p.H_j - 1 if idx % p.n == 0 else 0)
        else:
            out.append(i)
    blocks = (Block("a", 0, a_end), Block("b", a_end, b_end - a_end), Block("c", b_end, p.r_j - b_end))
    return RecipeStage(tuple(out), SpecialTime(p.H_j), blocks)


def build_nab_schedule(
    p: NabParams,
    depth: int,
    h1: int = 1,
    staircase_cuts: int | Sequence[int] | None = None,
    lead: int = 1,
    relative: bool = False,
) -> SpacerSchedule:
    """``lead`` staircase stages, then (n, a, b) and staircase stages alternately.

    An (n, a, b) stage ``j`` uses ``H_j = h_{j-1}``, the height before the
    preceding staircase stage, and carries the marker ``m_j = h_j + 1 + H_j``.
    ``staircase_cuts`` gives ``r`` for the staircase stages in order, the last
    value repeating; an int applies to all of them (default ``p.r_j``).
    """
    if depth < 2:
        raise ParameterError("depth must be >= 2")
    if h1 < 1:
        raise ParameterError("h1 must be >= 1 so that the first (n, a, b) stage has H >= 1")
    if lead < 1:
        raise ParameterError("lead must be >= 1: an (n, a, b) stage needs a staircase stage below it")
    if staircase_cuts is None:
        stair_rs = [p.r_j]
    elif isinstance(staircase_cuts, int):
        stair_rs = [staircase_cuts]
    else:
        stair_rs = [int(r) for r in staircase_cuts]
        if not stair_rs:
            raise ParameterError("staircase_cuts must not be empty")
    sched = empty_schedule(h1)
    n_stair = 0
    for j in range(1, depth + 1):
        if j <= lead or (j - lead) % 2 == 0:
            r = stair_rs[min(n_stair, len(stair_rs) - 1)]
            n_stair += 1
            sched = append_stage(sched, r, staircase_spacers(r))
        else:
            stage_p = NabParams(p.n, p.a, p.b, p.r_j, sched.height(j - 1))
            rec = nab_spacers(stage_p, relative=relative)
            sched = append_stage(sched, rec.cuts, rec.spacers, marker=rec.rule(sched.height(j)))
    return sched


# ---------------------------------------------------------------------------
# plain families


def build_staircase_schedule(cuts, depth: int, h1: int = 0) -> SpacerSchedule:
    """Pure staircase; ``cuts`` is one ``r`` for every stage or a per-stage list."""
    rs = [cuts] * depth if isinstance(cuts, int) else list(cuts)
    if len(rs) != depth:
        raise ParameterError(f"{len(rs)} cut counts for depth {depth}")
    sched = empty_schedule(h1)
    for r in rs:
        sched = append_stage(sched, r, staircase_spacers(r))
    return sched


def build_ornstein_schedule(
    H: int, r: int, depth: int, seed: int = 0, h1: int = 0, H_from_height: bool = False
) -> SpacerSchedule:
    """Ornstein spacers at every stage, one independent stream per stage."""
    sched = empty_schedule(h1)
    for j in range(1, depth + 1):
        Hj = max(H, sched.height(j - 1)) if H_from_height and j >= 2 else H
        sp = ornstein_spacers(OrnsteinParams(Hj, r, seed), j)
        sched = append_stage(sched, r, sp)
    return sched
