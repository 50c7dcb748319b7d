"""Exact correlations and empirical weak limits on a truncated tower.

For a truncation tower ``J`` and level sets ``A``, ``B`` the basic quantity is

    mu(T^m A & B) = #{p in A : p + m in B} / (h_J + 1),

computed by a shift-and-popcount over the bit vectors of ``A`` and ``B``.
Points whose image leaves ``0..h_J`` are dropped, never wrapped; at most
``|m|`` of them exist, which is the reported error bound.
"""

from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

from . import _kernels
from .errors import DegenerateFamilyError, InvalidRangeError, OutOfWindowError
from .tower import (
    DEFAULT_BIT_BUDGET,
    LevelSet,
    SpacerSchedule,
    _check_bits,
    level_measure,
    lift,
)

# Same-tower pairs with at most this many level combinations go through the
# occurrence autocorrelation instead of full position sets.
AUTOCORR_PAIR_LIMIT = 256


@dataclass(frozen=True)
class CorrelationQuery:
    m: int
    A: LevelSet
    B: LevelSet
    J: int


@dataclass(frozen=True)
class Correlation:
    m: int
    count: int
    denominator: int

    @property
    def value(self) -> Fraction:
        return Fraction(self.count, self.denominator)

    @property
    def error_bound(self) -> Fraction:
        return Fraction(abs(self.m), self.denominator)

    def __float__(self) -> float:
        return self.count / self.denominator


class CorrelationEngine:
    """Caches bit vectors and occurrence autocorrelations for one ``(schedule, J)``.

    Safe to share between threads; every cached value is a pure function of
    its key, so concurrent fills are harmless.
    """

    def __init__(self, schedule: SpacerSchedule, J: int, bit_budget: int = DEFAULT_BIT_BUDGET):
        schedule.check_tower(J)
        self.schedule = schedule
        self.J = J
        self.hJ = schedule.height(J)
        self.nbits = self.hJ + 1
        self.bit_budget = bit_budget
        self._bits: dict[LevelSet, np.ndarray] = {}
        self._lags: dict[tuple[int, int], int] = {}
        self._lock = threading.Lock()

    # -- position sets -----------------------------------------------------

    def bits(self, A: LevelSet) -> np.ndarray:
        got = self._bits.get(A)
        if got is not None:
            return got
        if A.stage > self.J:
            raise InvalidRangeError(f"level set on tower {A.stage} above truncation {self.J}")
        A.check(self.schedule)
        _check_bits(self.nbits, self.bit_budget)
        base = _kernels.from_positions(A.levels, self.schedule.height(A.stage) + 1)
        words = lift(self.schedule, base, A.stage, self.J, self.bit_budget)
        with self._lock:
            self._bits.setdefault(A, words)
        return words

    def occurrence_bits(self, j: int) -> np.ndarray:
        return self.bits(LevelSet.single(j, 0))

    def measure(self, A: LevelSet) -> Fraction:
        return level_measure(self.schedule, A, self.J)

    def autocorrelation(self, j: int, lags: Iterable[int]) -> dict[int, int]:
        """``#{o in O : o + d in O}`` for the copies ``O`` of tower ``j`` inside ``J``."""
        want = sorted({abs(int(d)) for d in lags})
        missing = [d for d in want if (j, d) not in self._lags]
        if missing:
            occ = self.occurrence_bits(j)
            counts = _kernels.count_lags(occ, occ, np.asarray(missing, dtype=np.int64))
            with self._lock:
                for d, c in zip(missing, counts):
                    self._lags[(j, d)] = int(c)
        return {d: self._lags[(j, d)] for d in want}

    # -- correlations ------------------------------------------------------

    def _check_window(self, m: int) -> None:
        if abs(m) > self.hJ:
            raise OutOfWindowError(f"|m| = {abs(m)} exceeds h_J = {self.hJ}")

    def count(self, m: int, A: LevelSet, B: LevelSet) -> int:
        m = int(m)
        self._check_window(m)
        if A.stage == B.stage and 0 < len(A) * len(B) <= AUTOCORR_PAIR_LIMIT:
            A.check(self.schedule)
            B.check(self.schedule)
            ds = [m + la - lb for la in A.levels for lb in B.levels]
            table = self.autocorrelation(A.stage, ds)
            return sum(table[abs(d)] for d in ds)
        if not len(A) or not len(B):
            return 0
        a, b = self.bits(A), self.bits(B)
        if m >= 0:
            return _kernels.count_shifted_and(a, b, m)
        return _kernels.count_shifted_and(b, a, -m)

    def count_bits(self, m: int, A: LevelSet, B: LevelSet) -> int:
        """Same as :meth:`count` but always through full position sets."""
        m = int(m)
        self._check_window(m)
        a, b = self.bits(A), self.bits(B)
        if m >= 0:
            return _kernels.count_shifted_and(a, b, m)
        return _kernels.count_shifted_and(b, a, -m)

    def correlation(self, m: int, A: LevelSet, B: LevelSet) -> Correlation:
        return Correlation(int(m), self.count(m, A, B), self.nbits)

    def centered(self, m: int, A: LevelSet, B: LevelSet) -> float:
        """``<T^m 1_A, 1_B> - mu(A) mu(B)`` as a float."""
        val = self.correlation(m, A, B).value - self.measure(A) * self.measure(B)
        return float(val)

    def prefix_count(self, A: LevelSet, x: int) -> int:
        """Number of positions of ``A`` strictly below ``x``."""
        x = max(0, min(int(x), self.nbits))
        words = self.bits(A)
        q, r = divmod(x, 64)
        total = _kernels.popcount(words[:q])
        if r:
            total += int(np.bitwise_count(words[q] & np.uint64((1 << r) - 1)))
        return total

    def windowed_centered(self, m: int, A: LevelSet, B: LevelSet) -> Fraction:
        """Correlation of the centered indicators restricted to the window.

        Equals ``(1/N) sum_p x_p y_{p+m}`` with ``x = 1_A - mu(A)`` and
        ``y = 1_B - mu(B)`` over ``p, p + m in 0..h_J``; a positive-definite
        function of ``m`` for ``A = B``.
        """
        m = int(m)
        self._check_window(m)
        N = self.nbits
        ma, mb = self.measure(A), self.measure(B)
        raw = self.count(m, A, B)
        if m >= 0:
            a_in = self.prefix_count(A, N - m)
            b_in = self._total(B) - self.prefix_count(B, m)
        else:
            a_in = self._total(A) - self.prefix_count(A, -m)
            b_in = self.prefix_count(B, N + m)
        return (raw - mb * a_in - ma * b_in + ma * mb * (N - abs(m))) / N

    def _total(self, A: LevelSet) -> int:
        return int(self.measure(A) * self.nbits)


def correlation(schedule: SpacerSchedule, q: CorrelationQuery, engine: CorrelationEngine | None = None) -> Correlation:
    engine = engine or CorrelationEngine(schedule, q.J)
    return engine.correlation(q.m, q.A, q.B)


# ---------------------------------------------------------------------------
# tables


@dataclass(frozen=True)
class CorrelationRow:
    m: int
    pair_id: int
    count: int
    denominator: int

    @property
    def value(self) -> Fraction:
        return Fraction(self.count, self.denominator)

    @property
    def error_bound(self) -> Fraction:
        return Fraction(abs(self.m), self.denominator)


@dataclass
class CorrelationTable:
    schedule: SpacerSchedule
    J: int
    pairs: list[tuple[LevelSet, LevelSet]]
    rows: list[CorrelationRow] = field(default_factory=list)
    engine: CorrelationEngine | None = None

    def __post_init__(self):
        if self.engine is None:
            self.engine = CorrelationEngine(self.schedule, self.J)

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def ms(self) -> list[int]:
        seen: dict[int, None] = {}
        for row in self.rows:
            seen.setdefault(row.m, None)
        return list(seen)

    def at(self, m: int) -> list[CorrelationRow]:
        return [row for row in self.rows if row.m == m]


def _map(fn, items: Sequence, threads: int) -> list:
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def correlation_profile(
    schedule: SpacerSchedule,
    J: int,
    ms: Iterable[int],
    pairs: Sequence[tuple[LevelSet, LevelSet]],
    engine: CorrelationEngine | None = None,
    threads: int = 1,
) -> CorrelationTable:
    """Correlations for every ``(m, pair)``, ordered by ``m`` then pair index."""
    table = CorrelationTable(schedule, J, list(pairs), engine=engine)
    eng = table.engine
    jobs = [(int(m), k) for m in ms for k in range(len(table.pairs))]

    def one(job):
        m, k = job
        A, B = table.pairs[k]
        return CorrelationRow(m, k, eng.count(m, A, B), eng.nbits)

    table.rows = _map(one, jobs, threads)
    return table


def single_level_pairs(schedule: SpacerSchedule, j: int, cap: int = 4096, seed: int = 0) -> list[tuple[LevelSet, LevelSet]]:
    """All ``(level, level)`` pairs of tower ``j``, subsampled to ``cap`` deterministically."""
    h = schedule.height(j)
    total = (h + 1) ** 2
    if total <= cap:
        idx = np.arange(total)
    else:
        idx = np.sort(np.random.default_rng(seed).choice(total, size=cap, replace=False))
    return [(LevelSet.single(j, int(i) // (h + 1)), LevelSet.single(j, int(i) % (h + 1))) for i in idx]


# ---------------------------------------------------------------------------
# weak-limit fits


@dataclass(frozen=True)
class WeakLimitFit:
    """Coefficients over ``{T^k : |k| <= K_max} + {Theta}``.

    ``residual`` is the RMS misfit over the pair family; ``relative_residual``
    divides it by the RMS of the observed values.
    """

    m: int
    J: int
    shift_coefficients: dict[int, float]
    theta_coefficient: float
    residual: float
    n_pairs: int
    relative_residual: float = 0.0

    def coefficient(self, label) -> float:
        if label == "theta":
            return self.theta_coefficient
        return self.shift_coefficients[int(label)]

    @property
    def labels(self) -> list[str]:
        return [f"T^{k}" for k in self.shift_coefficients] + ["Theta"]


def basis_labels(K_max: int) -> list[str]:
    return [f"T^{k}" for k in range(-K_max, K_max + 1)] + ["Theta"]


def design_matrix(table: CorrelationTable, K_max: int) -> np.ndarray:
    """One row per pair: ``mu(T^k A & B)`` for ``|k| <= K_max`` then ``mu(A) mu(B)``."""
    eng = table.engine
    X = np.empty((len(table.pairs), 2 * K_max + 2))
    for r, (A, B) in enumerate(table.pairs):
        for c, k in enumerate(range(-K_max, K_max + 1)):
            X[r, c] = eng.count(k, A, B) / eng.nbits
        X[r, -1] = float(eng.measure(A) * eng.measure(B))
    return X


def solve_least_squares(X: np.ndarray, y: np.ndarray, labels: Sequence[str], rtol: float = 1e-10) -> np.ndarray:
    """Normal equations with a pivoted-QR rank check and an SVD fallback."""
    n, p = X.shape
    if n < p:
        raise DegenerateFamilyError(f"{n} pairs for {p} basis elements", list(labels))
    _, R, piv = scipy.linalg.qr(X, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    rank = int(np.sum(diag > rtol * diag[0])) if diag.size and diag[0] > 0 else 0
    if rank < p:
        raise DegenerateFamilyError("rank-deficient pair family", [labels[i] for i in sorted(piv[rank:])])
    try:
        cho = scipy.linalg.cho_factor(X.T @ X)
        coef = scipy.linalg.cho_solve(cho, X.T @ y)
    except np.linalg.LinAlgError:
        coef = np.linalg.lstsq(X, y, rcond=None)[0]
    # one refinement step recovers the accuracy lost by squaring the condition number
    coef = coef + np.linalg.lstsq(X, y - X @ coef, rcond=None)[0]
    return coef


def fit_weak_limit(table: CorrelationTable, K_max: int = 2, m: int | None = None) -> WeakLimitFit:
    """Least-squares fit of one ``m``-slice onto ``{T^k : |k| <= K_max} + {Theta}``."""
    ms = table.ms
    if m is None:
        if len(ms) != 1:
            raise ValueError(f"table holds {len(ms)} values of m; pass m explicitly")
        m = ms[0]
    rows = {row.pair_id: row for row in table.at(m)}
    if len(rows) != len(table.pairs):
        raise ValueError(f"table lacks rows for some pairs at m={m}")
    y = np.array([float(rows[k].value) for k in range(len(table.pairs))])
    return fit_design(design_matrix(table, K_max), y, K_max, m=int(m), J=table.J)


def fit_design(X: np.ndarray, y: np.ndarray, K_max: int, m: int = 0, J: int = 0) -> WeakLimitFit:
    """Fit observed values ``y`` against a design from :func:`design_matrix`."""
    coef = solve_least_squares(X, y, basis_labels(K_max))
    resid = X @ coef - y
    rms = float(np.sqrt(np.mean(resid**2)))
    scale = float(np.sqrt(np.mean(y**2)))
    shifts = {k: float(c) for k, c in zip(range(-K_max, K_max + 1), coef[:-1])}
    return WeakLimitFit(
        m=m,
        J=J,
        shift_coefficients=shifts,
        theta_coefficient=float(coef[-1]),
        residual=rms,
        n_pairs=len(y),
        relative_residual=rms / scale if scale else 0.0,
    )


# ---------------------------------------------------------------------------
# mixing


@dataclass(frozen=True)
class MixingRow:
    m: int
    sup_deviation: float
    min_ratio: float


def mixing_profile(table: CorrelationTable) -> list[MixingRow]:
    """Per ``m``: worst ``|mu(T^m A & B) - mu(A) mu(B)|`` and the smallest ratio to the product."""
    eng = table.engine
    products = [eng.measure(A) * eng.measure(B) for A, B in table.pairs]
    out = []
    for m in table.ms:
        dev = Fraction(0)
        ratio = None
        for row in table.at(m):
            prod = products[row.pair_id]
            dev = max(dev, abs(row.value - prod))
            if prod > 0:
                q = row.value / prod
                ratio = q if ratio is None else min(ratio, q)
        out.append(MixingRow(m, float(dev), float(ratio) if ratio is not None else float("nan")))
    return out


# ---------------------------------------------------------------------------
# tensor products


@dataclass(frozen=True)
class TensorQuery:
    exponents: tuple[int, ...]
    m: int
    pairs: tuple[tuple[LevelSet, LevelSet], ...]

    def __post_init__(self):
        object.__setattr__(self, "exponents", tuple(int(k) for k in self.exponents))
        object.__setattr__(self, "pairs", tuple(self.pairs))
        if not self.exponents:
            raise ValueError("tensor query needs at least one factor")
        if len(set(self.exponents)) != len(self.exponents):
            raise ValueError(f"exponents must be distinct, got {self.exponents}")
        if len(self.pairs) != len(self.exponents):
            raise ValueError("one (A, B) pair per exponent is required")


@dataclass(frozen=True)
class TensorResult:
    value: float
    factors: tuple[float, ...]
    error_bounds: tuple[Fraction, ...]


def tensor_correlation(q: TensorQuery, schedule: SpacerSchedule, J: int, engine: CorrelationEngine | None = None) -> TensorResult:
    """``prod_i <T^{k_i m} f_i, g_i>`` with centered indicators ``f_i``, ``g_i``."""
    eng = engine or CorrelationEngine(schedule, J)
    factors, bounds = [], []
    for i, (k, (A, B)) in enumerate(zip(q.exponents, q.pairs)):
        n = k * q.m
        if abs(n) > eng.hJ:
            raise OutOfWindowError(f"factor {i} (exponent {k}): |{n}| exceeds h_J = {eng.hJ}")
        factors.append(eng.centered(n, A, B))
        bounds.append(Fraction(abs(n), eng.nbits))
    return TensorResult(float(np.prod(factors)), tuple(factors), tuple(bounds))


# ---------------------------------------------------------------------------
# averaging kernel


@dataclass(frozen=True)
class TriangularKernel:
    """Weights ``c(n) = numerators[n + H] / denominator`` on ``|n| <= H``.

    Kept as integers over the common denominator ``(H + 1)^2`` so sums and
    symmetry checks are exact without building a fraction per weight.
    """

    H: int
    numerators: np.ndarray
    denominator: int

    def weight(self, n: int) -> Fraction:
        if abs(n) > self.H:
            return Fraction(0)
        return Fraction(int(self.numerators[n + self.H]), self.denominator)

    @property
    def weights(self) -> dict[int, Fraction]:
        return {n: self.weight(n) for n in range(-self.H, self.H + 1)}

    def __iter__(self):
        return iter(self.weights.items())


def triangular_kernel(H: int) -> TriangularKernel:
    """Weights ``(H + 1 - |n|) / (H + 1)^2`` on ``|n| <= H``."""
    if H < 0:
        raise ValueError("H must be >= 0")
    n = np.arange(-H, H + 1, dtype=np.int64)
    return TriangularKernel(H, H + 1 - np.abs(n), (H + 1) ** 2)


def kernel_smoothed_prediction(
    kernel: TriangularKernel, A: LevelSet, B: LevelSet, schedule: SpacerSchedule, J: int, engine: CorrelationEngine | None = None
) -> Fraction:
    """``sum_n c(n) mu(T^n A & B)``; tends to ``mu(A) mu(B)`` when the averaging mixes."""
    eng = engine or CorrelationEngine(schedule, J)
    if kernel.H > eng.hJ:
        raise OutOfWindowError(f"kernel half-width {kernel.H} exceeds h_J = {eng.hJ}")
    total = sum(int(w) * eng.count(n, A, B) for n, w in zip(range(-kernel.H, kernel.H + 1), kernel.numerators))
    return Fraction(total, kernel.denominator * eng.nbits)


# ---------------------------------------------------------------------------
# cyclicity probe


@dataclass(frozen=True)
class ProbeResult:
    gram: np.ndarray
    min_eigenvalue: float
    rank: int
    eigenvalues: np.ndarray


def cyclicity_probe(
    schedule: SpacerSchedule,
    J: int,
    exponents: Sequence[int],
    f: LevelSet,
    M: int,
    step: int,
    engine: CorrelationEngine | None = None,
    tol: float = 1e-9,
) -> ProbeResult:
    """Gram matrix of ``U^{p step} F`` for ``F`` the tensor power of the centered ``1_f``.

    ``U = T^{k_1} x ... x T^{k_d}``.  Entries are products of window-centered
    correlations, so ``G`` is exactly positive semidefinite before rounding.
    Rank counts eigenvalues above ``tol`` times the largest one.
    """
    eng = engine or CorrelationEngine(schedule, J)
    ks = [int(k) for k in exponents]
    if M < 1 or step < 1:
        raise ValueError("M and step must be >= 1")
    reach = (M - 1) * step * max(ks)
    if reach > eng.hJ:
        raise OutOfWindowError(f"probe reaches {reach} > h_J = {eng.hJ}")
    rho = {}
    for d in range(M):
        rho[d] = float(np.prod([float(eng.windowed_centered(k * d * step, f, f)) for k in ks]))
    G = np.array([[rho[abs(p - q)] for q in range(M)] for p in range(M)])
    eig = np.linalg.eigvalsh(G)
    top = float(eig[-1]) if eig.size else 0.0
    rank = int(np.sum(eig > tol * top)) if top > 0 else 0
    return ProbeResult(G, float(eig[0]), rank, eig)
