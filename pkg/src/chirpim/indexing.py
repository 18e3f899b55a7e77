"""Bit <-> index mapping under a cyclic minimum-separation constraint.

A frame activates L of M circular positions. Writing s_q for the number of
unused positions between cyclically adjacent active indices (s_L wraps
around), the separation constraint requires s_q >= delta for every q. The
functions here count the constrained index sequences, rank/unrank them with
an exact bijection, and convert information bits to and from (indices, PSK
integers). Counts and ranks use Python integers throughout, so full-scale
configurations (thousands of positions) do not overflow.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np


def compositions_count(parts: int, delta: int, total: int) -> int:
    """Number of compositions of ``total`` into ``parts`` parts, each >= delta.

    Substituting s_q' = s_q - delta reduces to weak compositions:
    C(total - parts*delta + parts - 1, parts - 1) when total >= parts*delta,
    else 0.
    """
    if parts < 1 or delta < 0 or total < 0:
        raise ValueError("need parts >= 1, delta >= 0, total >= 0")
    if total < parts * delta:
        return 0
    return comb(total - parts * delta + parts - 1, parts - 1)


def index_count(length: int, delta: int, m: int) -> int:
    """Number of strictly increasing index sequences of given ``length`` in
    [0, m) whose cyclic gaps are all >= delta.

    Closed form (m/length) * C(m - length*delta - 1, length - 1) for
    m >= length*(delta+1), else 0. For length == 1 the count is m (every
    single index is valid as long as its wrap-around gap m-1 >= delta).
    """
    if length < 1 or delta < 0 or m < 1:
        raise ValueError("need length >= 1, delta >= 0, m >= 1")
    if length == 1:
        return m if m >= delta + 1 else 0
    if m < length * (delta + 1):
        return 0
    total = m * comb(m - length * delta - 1, length - 1)
    assert total % length == 0
    return total // length


def delta_no_loss(m: int, length: int) -> int:
    """Largest separation delta that keeps floor(log2(count)) at the
    unconstrained value floor(log2(C(m, length)))."""
    if length < 2 or m < 2 * length:
        raise ValueError("need length >= 2 and m >= 2*length")
    target = comb(m, length).bit_length() - 1
    lo, hi = 0, m // length  # count is 0 beyond m/length - 1
    while lo < hi:
        mid = (lo + hi + 1) // 2
        count = index_count(length, mid, m)
        if count > 0 and count.bit_length() - 1 == target:
            lo = mid
        else:
            hi = mid - 1
    return lo


def rank_to_gaps(rank: int, total: int, parts: int, delta: int) -> tuple[int, ...]:
    """Gap vector (s_1..s_parts) of the given 1-based rank.

    Ranks order the compositions by the last part first: the last gap s_P is
    the smallest x >= delta whose cumulative count sum_{r=delta..x}
    compositions_count(parts-1, delta, total-r) reaches the rank, and the
    remainder recurses on the leading parts. With one part left the gap is
    forced to the remaining total.
    """
    count = compositions_count(parts, delta, total)
    if not 1 <= rank <= count:
        raise ValueError(f"rank {rank} outside 1..{count}")
    gaps: list[int] = []
    while parts > 1:
        x, acc = delta, 0
        while True:
            c = compositions_count(parts - 1, delta, total - x)
            if acc + c >= rank:
                break
            acc += c
            x += 1
        gaps.append(x)
        rank -= acc
        total -= x
        parts -= 1
    gaps.append(total)
    return tuple(reversed(gaps))


def gaps_to_rank(gaps, total: int, parts: int, delta: int) -> int:
    """Inverse of :func:`rank_to_gaps`."""
    gaps = tuple(int(g) for g in gaps)
    if len(gaps) != parts:
        raise ValueError(f"expected {parts} gaps, got {len(gaps)}")
    if sum(gaps) != total:
        raise ValueError(f"gaps sum to {sum(gaps)}, expected {total}")
    if any(g < delta for g in gaps):
        raise ValueError(f"gap below the separation {delta}: {gaps}")
    rank = 1
    remaining = total
    for level in range(parts, 1, -1):
        last = gaps[level - 1]
        rank += sum(compositions_count(level - 1, delta, remaining - r)
                    for r in range(delta, last))
        remaining -= last
    return rank


def _block_size(i0: int, m: int, length: int, delta: int) -> int:
    """Number of valid sequences whose first index equals i0."""
    return compositions_count(length, delta, m - length + min(0, delta - i0))


def rank_to_indices(rank: int, m: int, length: int, delta: int) -> tuple[int, ...]:
    """Index sequence of the given 1-based rank.

    The first index i_0 is located by accumulating per-i_0 block sizes; the
    within-block remainder is unranked into gaps (over a reduced total of
    m - length + delta - i_0 once i_0 >= delta, since the wrap-around gap
    then absorbs i_0 - delta extra slack), and the indices are rebuilt as
    i_l = i_0 + sum_{j<=l} (1 + s_j).
    """
    count = index_count(length, delta, m)
    if not 1 <= rank <= count:
        raise ValueError(f"rank {rank} outside 1..{count}")
    i0, acc = 0, 0
    while True:
        block = _block_size(i0, m, length, delta)
        if acc + block >= rank:
            break
        acc += block
        i0 += 1
    within = rank - acc
    total = m - length if i0 < delta else m - length + delta - i0
    gaps = rank_to_gaps(within, total, length, delta)
    indices = [i0]
    for j in range(length - 1):
        indices.append(indices[-1] + 1 + gaps[j])
    return tuple(indices)


def indices_to_rank(indices, m: int, length: int, delta: int) -> int:
    """Inverse of :func:`rank_to_indices`. Raises naming the violated gap
    when the sequence does not satisfy the separation constraint."""
    idx = tuple(int(i) for i in indices)
    if len(idx) != length:
        raise ValueError(f"expected {length} indices, got {len(idx)}")
    if any(not 0 <= i < m for i in idx):
        raise ValueError(f"indices outside [0, {m}): {idx}")
    if any(idx[q] <= idx[q - 1] for q in range(1, length)):
        raise ValueError(f"indices must be strictly increasing: {idx}")
    gaps = [idx[q] - idx[q - 1] - 1 for q in range(1, length)]
    wrap = m - 1 - idx[-1] + idx[0]
    for q, g in enumerate(gaps + [wrap], start=1):
        if g < delta:
            raise ValueError(f"cyclic gap s_{q}={g} violates separation {delta}")
    i0 = idx[0]
    if i0 < delta:
        total, gap_vec = m - length, gaps + [wrap]
    else:
        total, gap_vec = m - length + delta - i0, gaps + [wrap - i0 + delta]
    within = gaps_to_rank(gap_vec, total, length, delta)
    before = sum(_block_size(a, m, length, delta) for a in range(i0))
    return before + within


@dataclass(frozen=True)
class IndexWord:
    """One frame's selection: active indices, PSK integers, and the
    configuration (m positions, h-ary phases, separation delta)."""

    indices: tuple[int, ...]
    psk: tuple[int, ...]
    m: int
    h: int
    delta: int = 0

    def __post_init__(self):
        length = len(self.indices)
        if len(self.psk) != length:
            raise ValueError("indices and psk must have equal length")
        if any(not 0 <= z < self.h for z in self.psk):
            raise ValueError(f"psk values outside [0, {self.h})")
        # re-validates ordering, range, and every cyclic gap
        indices_to_rank(self.indices, self.m, length, self.delta)

    @property
    def length(self) -> int:
        return len(self.indices)

    @property
    def rank(self) -> int:
        return indices_to_rank(self.indices, self.m, self.length, self.delta)


class BitCapacity(tuple):
    """(index_bits, psk_bits, total) carried by one frame."""

    __slots__ = ()

    def __new__(cls, index_bits: int, psk_bits: int):
        return super().__new__(cls, (index_bits, psk_bits, index_bits + psk_bits))

    @property
    def index_bits(self):
        return self[0]

    @property
    def psk_bits(self):
        return self[1]

    @property
    def total(self):
        return self[2]


def bit_capacity(m: int, length: int, h: int, delta: int = 0) -> BitCapacity:
    """Information bits per frame: floor(log2(index count)) on the index
    selection plus length*log2(h) on the PSK symbols."""
    if h < 1 or h & (h - 1):
        raise ValueError(f"h={h} must be a power of two")
    count = index_count(length, delta, m)
    if count < 1:
        raise ValueError(f"no valid index sequence for m={m}, length={length}, delta={delta}")
    return BitCapacity(count.bit_length() - 1, length * (h.bit_length() - 1))


def bits_to_int(bits) -> int:
    """MSB-first binary to integer."""
    value = 0
    for b in bits:
        value = (value << 1) | int(b)
    return value


def int_to_bits(value: int, width: int) -> np.ndarray:
    """Integer to MSB-first binary of fixed width."""
    if value < 0 or value >> width:
        raise ValueError(f"{value} does not fit in {width} bits")
    return np.array([(value >> (width - 1 - i)) & 1 for i in range(width)], dtype=np.uint8)


def bits_to_word(bits, m: int, length: int, h: int, delta: int = 0) -> IndexWord:
    """Map information bits to an :class:`IndexWord`.

    The leading index bits convert to a 1-based rank (value + 1) and unrank
    into indices; the remaining bits split into log2(h)-sized groups, one
    PSK integer per active index, natural binary order.
    """
    cap = bit_capacity(m, length, h, delta)
    bits = np.asarray(bits).ravel()
    if len(bits) != cap.total:
        raise ValueError(f"expected {cap.total} bits, got {len(bits)}")
    rank = bits_to_int(bits[: cap.index_bits]) + 1
    indices = rank_to_indices(rank, m, length, delta)
    bits_per_psk = h.bit_length() - 1
    psk = tuple(
        bits_to_int(bits[cap.index_bits + i * bits_per_psk:
                         cap.index_bits + (i + 1) * bits_per_psk])
        for i in range(length)
    )
    return IndexWord(indices=indices, psk=psk, m=m, h=h, delta=delta)


def word_to_bits(word: IndexWord) -> np.ndarray:
    """Inverse of :func:`bits_to_word`. The word's rank must fit in the
    index-bit budget (ranks above 2**index_bits are never emitted by the
    encoder)."""
    cap = bit_capacity(word.m, word.length, word.h, word.delta)
    rank = word.rank
    if rank - 1 >> cap.index_bits:
        raise ValueError(f"rank {rank} is outside the {cap.index_bits}-bit codebook")
    bits_per_psk = word.h.bit_length() - 1
    parts = [int_to_bits(rank - 1, cap.index_bits)]
    parts += [int_to_bits(z, bits_per_psk) for z in word.psk]
    return np.concatenate([p for p in parts if len(p)]) if cap.total else np.zeros(0, np.uint8)
