"""Bit-vector kernels for position sets.

A position set over ``{0, ..., n-1}`` is stored as a little-endian array of
``uint64`` words: position ``p`` is bit ``p & 63`` of word ``p >> 6``.  Bits
at or beyond ``n`` are always zero.

Two implementations share one interface: numba-compiled loops (default) and a
vectorized pure-numpy path.  Set ``RANKONE_PURE_NUMPY=1`` before import to
force the numpy path; both are exact and must agree bit for bit.
"""

from __future__ import annotations

import os
from types import SimpleNamespace

import numpy as np

WORD = 64
_U64 = np.uint64


def n_words(nbits: int) -> int:
    return (int(nbits) + WORD - 1) // WORD


def empty(nbits: int) -> np.ndarray:
    return np.zeros(n_words(nbits), dtype=_U64)


def from_positions(positions, nbits: int) -> np.ndarray:
    pos = np.asarray(positions, dtype=np.int64)
    words = empty(nbits)
    if pos.size:
        if pos.min() < 0 or pos.max() >= nbits:
            raise ValueError("position outside the bit range")
        np.bitwise_or.at(words, pos >> 6, np.left_shift(_U64(1), (pos & 63).astype(_U64)))
    return words


def to_positions(words: np.ndarray) -> np.ndarray:
    bits = np.unpackbits(words.view(np.uint8), bitorder="little")
    return np.flatnonzero(bits).astype(np.int64)


# ---------------------------------------------------------------------------
# numpy path


def _np_shifted_down(b: np.ndarray, d: int, length: int) -> np.ndarray:
    """Words of ``b >> d`` (bit p of the result is bit p + d of b), truncated to ``length`` words."""
    q, r = divmod(int(d), WORD)
    out = np.zeros(length, dtype=_U64)
    lo = b[q : q + length]
    out[: lo.size] = lo >> _U64(r)
    if r:
        hi = b[q + 1 : q + 1 + length]
        out[: hi.size] |= hi << _U64(WORD - r)
    return out


def _np_count_shifted_and(a: np.ndarray, b: np.ndarray, d: int) -> int:
    if d < 0:
        raise ValueError("lag must be non-negative")
    if d >= b.size * WORD:
        return 0
    shifted = _np_shifted_down(b, d, a.size)
    return int(np.bitwise_count(a & shifted).sum(dtype=np.int64))


def _np_count_lags(a: np.ndarray, b: np.ndarray, lags: np.ndarray) -> np.ndarray:
    return np.array([_np_count_shifted_and(a, b, int(d)) for d in lags], dtype=np.int64)


def _np_or_shifted(dst: np.ndarray, src: np.ndarray, offset: int) -> None:
    q, r = divmod(int(offset), WORD)
    n = min(src.size, dst.size - q)
    if n <= 0:
        return
    dst[q : q + n] |= src[:n] << _U64(r)
    if r:
        m = min(src.size, dst.size - q - 1)
        if m > 0:
            dst[q + 1 : q + 1 + m] |= src[:m] >> _U64(WORD - r)


def _np_tile(src: np.ndarray, offsets: np.ndarray, dst_nbits: int) -> np.ndarray:
    dst = empty(dst_nbits)
    for off in offsets:
        _np_or_shifted(dst, src, int(off))
    return dst


def _np_popcount(words: np.ndarray) -> int:
    return int(np.bitwise_count(words).sum(dtype=np.int64))


numpy_kernels = SimpleNamespace(
    name="numpy",
    count_shifted_and=_np_count_shifted_and,
    count_lags=_np_count_lags,
    tile=_np_tile,
    popcount=_np_popcount,
)


# ---------------------------------------------------------------------------
# numba path


def _build_numba_kernels() -> SimpleNamespace | None:
    try:
        from numba import njit, types
        from numba.extending import intrinsic
    except ImportError:  # pragma: no cover - numba is a declared dependency
        return None

    @intrinsic
    def ctpop(typingctx, x):
        sig = types.uint64(types.uint64)

        def codegen(context, builder, signature, args):
            return builder.ctpop(args[0])

        return sig, codegen

    @njit(cache=True, nogil=True)
    def popcount(words):
        total = 0
        for i in range(words.size):
            total += ctpop(words[i])
        return total

    @njit(cache=True, nogil=True)
    def count_shifted_and_raw(a, b, d):
        nb_ = b.size
        q = d >> 6
        r = np.uint64(d & 63)
        rc = np.uint64(64) - r
        total = 0
        n = a.size
        if q >= nb_:
            return 0
        if n > nb_ - q:
            n = nb_ - q
        if r == 0:
            for w in range(n):
                total += ctpop(a[w] & b[w + q])
        else:
            for w in range(n):
                x = b[w + q] >> r
                if w + q + 1 < nb_:
                    x |= b[w + q + 1] << rc
                total += ctpop(a[w] & x)
        return total

    @njit(cache=True, nogil=True)
    def count_lags_raw(a, b, lags):
        out = np.empty(lags.size, dtype=np.int64)
        for i in range(lags.size):
            out[i] = count_shifted_and_raw(a, b, lags[i])
        return out

    @njit(cache=True, nogil=True)
    def tile_raw(src, offsets, dst):
        nd = dst.size
        ns = src.size
        for k in range(offsets.size):
            off = offsets[k]
            q = off >> 6
            r = np.uint64(off & 63)
            rc = np.uint64(64) - r
            for w in range(ns):
                t = q + w
                if t >= nd:
                    break
                v = src[w]
                dst[t] |= v << r
                if r != 0 and t + 1 < nd:
                    dst[t + 1] |= v >> rc
        return dst

    def count_shifted_and(a, b, d):
        if d < 0:
            raise ValueError("lag must be non-negative")
        return int(count_shifted_and_raw(a, b, np.int64(d)))

    def count_lags(a, b, lags):
        lags = np.ascontiguousarray(lags, dtype=np.int64)
        if lags.size and lags.min() < 0:
            raise ValueError("lag must be non-negative")
        return count_lags_raw(a, b, lags)

    def tile(src, offsets, dst_nbits):
        return tile_raw(src, np.ascontiguousarray(offsets, dtype=np.int64), empty(dst_nbits))

    def popcount_(words):
        return int(popcount(words))

    return SimpleNamespace(
        name="numba",
        count_shifted_and=count_shifted_and,
        count_lags=count_lags,
        tile=tile,
        popcount=popcount_,
    )


def _pure_numpy_requested() -> bool:
    return os.environ.get("RANKONE_PURE_NUMPY", "").strip().lower() in {"1", "true", "yes", "on"}


numba_kernels = None if _pure_numpy_requested() else _build_numba_kernels()
active = numba_kernels or numpy_kernels


def backend() -> str:
    return active.name


def count_shifted_and(a: np.ndarray, b: np.ndarray, d: int) -> int:
    """Number of positions p with bit p set in ``a`` and bit p + d set in ``b`` (d >= 0)."""
    return active.count_shifted_and(a, b, int(d))


def count_lags(a: np.ndarray, b: np.ndarray, lags) -> np.ndarray:
    return active.count_lags(a, b, np.asarray(lags, dtype=np.int64))


def tile(src: np.ndarray, offsets, dst_nbits: int) -> np.ndarray:
    """OR copies of ``src`` placed at every bit offset into a fresh set of ``dst_nbits`` bits."""
    return active.tile(src, np.asarray(offsets, dtype=np.int64), int(dst_nbits))


def popcount(words: np.ndarray) -> int:
    return active.popcount(words)
