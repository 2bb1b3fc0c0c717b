"""Multi-user pilot machinery: orthogonal tone allocation and binary codebooks.

Orthogonal pre-allocation hands each of K UEs a disjoint set of M tones.
Aggressive reuse instead assigns every UE in a group the same L pilot
dimensions together with a binary on/off column: each column carries
``L'`` ones (transmit) and ``l`` zeros (keep silent).  A base station
observing the group's per-dimension energy pattern can then tell apart
"no UE", "exactly this UE", and "two or more UEs", because distinct
l-zero columns never combine into another column's pattern.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numpy as np

from .channel import OfdmParams


class CapacityExceededError(ValueError):
    """More users requested than the code or tone budget supports."""


@dataclass
class PilotAllocation:
    """Disjoint per-UE tone sets."""

    sequences: list


def allocate_orthogonal(
    K: int, params: OfdmParams, rng: np.random.Generator
) -> PilotAllocation:
    """Sequentially draw K disjoint M-tone sets from the WT subcarriers.

    Each UE picks its tones uniformly from whatever remains, mirroring a
    decentralized pseudo-random assignment.
    """
    wt, m = params.bandwidth_time_product, params.pilot_count
    if K * m > wt:
        raise CapacityExceededError(
            f"{K} users x {m} tones exceed the {wt} available subcarriers"
        )
    remaining = np.arange(wt)
    sequences = []
    for _ in range(K):
        picked = rng.choice(remaining.size, size=m, replace=False)
        sequences.append(np.sort(remaining[picked]))
        remaining = np.delete(remaining, picked)
    return PilotAllocation(sequences=sequences)


def capacity(L_prime: int, l: int) -> int:
    """Largest user count a code with L' ones and l zeros per column can host."""
    return math.comb(L_prime + l, l)


def choose_l(K: int, L_prime: int) -> int:
    """Smallest zero count l >= 1 whose capacity C(L'+l, l) reaches K users."""
    if K < 1 or L_prime < 1:
        raise ValueError("K and L_prime must be positive")
    l = 1
    while capacity(L_prime, l) < K:
        l += 1
    return l


@dataclass
class PilotCodebook:
    """L x K binary matrix; column k is UE k's on/off pattern."""

    ones_per_column: int
    zeros_per_column: int
    columns: np.ndarray

    @property
    def dimension(self) -> int:
        return self.ones_per_column + self.zeros_per_column

    @property
    def user_count(self) -> int:
        return self.columns.shape[1]

    def zero_set(self, k: int) -> frozenset:
        return frozenset(np.flatnonzero(self.columns[:, k] == 0).tolist())


def build_codebook(K: int, L_prime: int, l: int) -> PilotCodebook:
    """First K zero-patterns in reverse colexicographic order.

    For l = 1 and K = L this puts column i's single zero in row L-1-i,
    the anti-diagonal pattern; larger l extends the same ordering over all
    l-subsets of rows.
    """
    if L_prime < 1 or l < 1:
        raise ValueError("L_prime and l must be positive")
    if K < 0:
        raise ValueError("K must be nonnegative")
    cap = capacity(L_prime, l)
    if K > cap:
        raise CapacityExceededError(f"K={K} exceeds capacity C({L_prime + l},{l})={cap}")
    L = L_prime + l
    zero_sets = sorted(combinations(range(L), l), key=lambda s: s[::-1], reverse=True)
    columns = np.ones((L, K), dtype=np.uint8)
    for k in range(K):
        columns[list(zero_sets[k]), k] = 0
    return PilotCodebook(ones_per_column=L_prime, zeros_per_column=l, columns=columns)


@dataclass(frozen=True)
class DecodeOutcome:
    kind: str  # empty | identified | collision | invalid
    ue_index: int | None = None


def superpose(active_ues, book: PilotCodebook) -> np.ndarray:
    """Componentwise OR of the active columns (ideal energy detection)."""
    pattern = np.zeros(book.dimension, dtype=np.uint8)
    for k in active_ues:
        pattern |= book.columns[:, k]
    return pattern


def decode_energy_vector(observed, book: PilotCodebook) -> DecodeOutcome:
    """Classify an observed high/low energy pattern.

    All dimensions low means no UE transmitted; exactly l lows matching a
    column identifies that UE; fewer than l lows can only arise from
    overlapping transmissions, a collision.  Any other pattern (including
    l lows matching no column) is reported invalid — with imperfect
    detection the three clean outcomes are not exhaustive.
    """
    observed = np.asarray(observed, dtype=np.uint8)
    if observed.shape != (book.dimension,):
        raise ValueError(
            f"observed vector has length {observed.size}, expected {book.dimension}"
        )
    zeros = frozenset(np.flatnonzero(observed == 0).tolist())
    if len(zeros) == book.dimension:
        return DecodeOutcome(kind="empty")
    if len(zeros) == book.zeros_per_column:
        for k in range(book.user_count):
            if book.zero_set(k) == zeros:
                return DecodeOutcome(kind="identified", ue_index=k)
        return DecodeOutcome(kind="invalid")
    if len(zeros) < book.zeros_per_column:
        return DecodeOutcome(kind="collision")
    return DecodeOutcome(kind="invalid")


def code_efficiency(L_prime: int, l: int) -> Fraction:
    """Fraction of pilot dimensions actually used for training: L'/(L'+l)."""
    if L_prime < 1 or l < 1:
        raise ValueError("L_prime and l must be positive")
    return Fraction(L_prime, L_prime + l)


def write_codebook(book: PilotCodebook, stream) -> None:
    """Plain-text export: header ``L K L_prime l``, then one 0/1 row per line."""
    stream.write(
        f"{book.dimension} {book.user_count} {book.ones_per_column} "
        f"{book.zeros_per_column}\n"
    )
    for row in book.columns:
        stream.write("".join(str(int(v)) for v in row) + "\n")


def read_codebook(stream) -> PilotCodebook:
    """Parse the `write_codebook` format, validating per-column weights."""
    header = stream.readline().split()
    if len(header) != 4:
        raise ValueError("codebook header must hold: L K L_prime l")
    L, K, L_prime, l = (int(v) for v in header)
    if L != L_prime + l:
        raise ValueError("header dimension L does not equal L_prime + l")
    rows = []
    for _ in range(L):
        line = stream.readline().strip()
        if len(line) != K or set(line) - {"0", "1"}:
            raise ValueError("codebook rows must be 0/1 strings of length K")
        rows.append([int(ch) for ch in line])
    columns = np.array(rows, dtype=np.uint8).reshape(L, K)
    if K and not (columns.sum(axis=0) == L_prime).all():
        raise ValueError("every column must carry exactly L_prime ones")
    return PilotCodebook(ones_per_column=L_prime, zeros_per_column=l, columns=columns)
