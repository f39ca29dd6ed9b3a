"""Sequence side of the correspondence: van der Corput and Halton values,
the level-k interval partitions, the digit-based subtile membership
oracle, and local discrepancies.

Counting never touches geometric boundaries: membership in a level-k
subtile is decided entirely from digit strings, which is exact where a
point-in-fractal test would be boundary-fragile.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from mbonacci import numeration
from mbonacci.numeration import (
    MBonacciSystem,
    digit_matrix,
    encode,
    ones_run_from,
    trailing_ones_before,
)
from mbonacci.rauzy import SubtileAddress, build_cloud
from mbonacci.spectral import TorusPoint, contraction_matrix, torus_reduce

DEFAULT_LEVEL_CAP = 10

_REFERENCE_DEPTH = 2048


def vdc(sys: MBonacciSystem, n: int) -> float:
    """Digit-mirrored value sum(eps_j * phi^-(j+1)) in [0, 1)."""
    e = encode(sys, n)
    total = 0.0
    for j in range(len(e.digits) - 1, -1, -1):
        if e.digits[j]:
            total += sys.phi_neg_powers[j]
    return total


def vdc_values(sys: MBonacciSystem, ns) -> np.ndarray:
    """Vectorised van der Corput values for many indices."""
    digits = digit_matrix(sys, ns)
    powers = np.array(sys.phi_neg_powers[: digits.shape[1]])
    return digits.astype(np.float64) @ powers


@dataclass(frozen=True)
class HaltonConfig:
    """Component systems with pairwise distinct m, plus optional offsets."""

    systems: tuple[MBonacciSystem, ...]
    offsets: tuple[TorusPoint, ...] | None = None

    def __post_init__(self) -> None:
        ms = [s.m for s in self.systems]
        if not ms:
            raise ValueError("at least one system required")
        if len(set(ms)) != len(ms):
            raise ValueError(f"m values must be pairwise distinct, got {ms}")
        if any(m < 2 for m in ms):
            raise ValueError("all m must be >= 2")
        if self.offsets is not None and len(self.offsets) != len(self.systems):
            raise ValueError("offsets length must match systems")

    @property
    def dims(self) -> int:
        return len(self.systems)


def halton(cfg: HaltonConfig, n: int) -> np.ndarray:
    """Component-wise van der Corput vector for one index."""
    return np.array([vdc(s, n) for s in cfg.systems])


def halton_points(cfg: HaltonConfig, count: int) -> np.ndarray:
    """(count, s) array of the first `count` Halton vectors."""
    ns = np.arange(count, dtype=np.int64)
    return np.stack([vdc_values(s, ns) for s in cfg.systems], axis=1)


@dataclass(frozen=True)
class CkInterval:
    """Level-k interval assigned to an index n.

    mu is the base-phi value of the reversed top-k digit block; r the
    trailing-ones run just below position k.  The interval is
    [mu, mu + phi^r - sum_{i<r} phi^i) scaled by phi^-k.
    """

    n: int
    k: int
    mu: float
    r: int
    left: float
    right: float

    @property
    def length(self) -> float:
        return self.right - self.left

    def contains(self, x: float, guard: float = 0.0) -> bool:
        return self.left - guard <= x < self.right + guard


def interval_for(sys: MBonacciSystem, n: int, k: int) -> CkInterval:
    if k < 0:
        raise ValueError("k must be >= 0")
    e = encode(sys, n)
    phi = sys.phi_float
    pos = [1.0]
    for _ in range(k):
        pos.append(pos[-1] * phi)
    mu = 0.0
    for j in range(k):
        if e.digit(k - 1 - j):
            mu += pos[j]
    r = trailing_ones_before(e, k)
    width = pos[r] - sum(pos[i] for i in range(r))
    scale = sys.neg_power(k) if k else 1.0
    return CkInterval(n=n, k=k, mu=mu, r=r, left=mu * scale, right=(mu + width) * scale)


def partition_Ck(sys: MBonacciSystem, k: int) -> list[CkInterval]:
    """All F_k level-k intervals, sorted by left endpoint."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if k >= len(sys.basis):
        raise ValueError("k beyond cached basis range")
    count = sys.basis[k] if k else 1
    if count - 1 >= sys.basis[-1]:
        raise ValueError("F_k exceeds system coverage; rebuild with larger max_n")
    intervals = [interval_for(sys, n, k) for n in range(count)]
    intervals.sort(key=lambda iv: iv.left)
    return intervals


@lru_cache(maxsize=8)
def _reference_point(m: int) -> tuple[float, ...]:
    """Fixed interior point of the letter-1 subtile, in unreduced lattice
    coordinates: the first label-1 cloud point at or after the middle of a
    fixed-depth cloud."""
    cloud = build_cloud(m, _REFERENCE_DEPTH)
    i = _REFERENCE_DEPTH // 2
    while cloud.labels[i] != 1:
        i += 1
    return tuple(float(c) for c in cloud.unreduced[i])


def default_offset(sys: MBonacciSystem, k: int, N: int) -> TorusPoint:
    """Deterministic interior offset for boundary-free counting.

    With L the level covering N - 1 and M = max(k, L), the offset is the
    M-fold contraction of a fixed interior reference point of the letter-1
    subtile, so it shrinks like phi^-M and never depends on runtime state.
    """
    if k < 1 or N < 1:
        raise ValueError("k and N must be >= 1")
    L = bisect_right(sys.basis, N - 1)
    M = max(k, L)
    mat = np.linalg.matrix_power(contraction_matrix(sys.m, sys.phi_float), M)
    return torus_reduce(mat @ np.array(_reference_point(sys.m)))


def membership_oracle(sys: MBonacciSystem, n: int, addr: SubtileAddress) -> bool:
    """Exact combinatorial test for level-k subtile membership.

    True iff the first k digits of n match the address and the all-ones
    run starting at position k has length letter - 1.  Every n matches
    exactly one address per level, so these memberships partition the
    index range.
    """
    e = encode(sys, n)
    k = addr.level
    if any(e.digit(j) != addr.digits[j] for j in range(k)):
        return False
    return ones_run_from(e, k) + 1 == addr.letter


def level_addresses(m: int, k: int) -> list[SubtileAddress]:
    """All valid level-k addresses: admissible k-digit strings, each with
    terminal letters 1..m-r."""
    if k < 0:
        raise ValueError("k must be >= 0")
    strings: list[tuple[tuple[int, ...], int]] = [((), 0)]
    for _ in range(k):
        nxt: list[tuple[tuple[int, ...], int]] = []
        for s, run in strings:
            nxt.append((s + (0,), 0))
            if run < m - 1:
                nxt.append((s + (1,), run + 1))
        strings = nxt
    out: list[SubtileAddress] = []
    for s, run in strings:
        for letter in range(1, m - run + 1):
            out.append(SubtileAddress(m=m, level=k, digits=s, letter=letter,
                                      trailing_ones=run))
    return out


def membership_counts(sys: MBonacciSystem, k: int, N: int) -> dict[tuple[tuple[int, ...], int], int]:
    """Counts of n < N per level-k address, via bulk digit extraction."""
    m = sys.m
    width = max(bisect_right(sys.basis, max(N - 1, 0)), k + m)
    digits = digit_matrix(sys, np.arange(N, dtype=np.int64), width=width)
    weights = (1 << np.arange(k)).astype(np.int64)
    keys = digits[:, :k].astype(np.int64) @ weights if k else np.zeros(N, dtype=np.int64)
    tail = digits[:, k:k + m]
    t = np.argmax(tail == 0, axis=1)
    letters = t.astype(np.int64) + 1
    combined = np.bincount(keys * m + (letters - 1), minlength=(1 << k) * m)
    counts: dict[tuple[tuple[int, ...], int], int] = {}
    for addr in level_addresses(m, k):
        key = sum(d << j for j, d in enumerate(addr.digits))
        counts[(addr.digits, addr.letter)] = int(combined[key * m + addr.letter - 1])
    return counts


def local_discrepancy(sys: MBonacciSystem, k: int, N: int, cap: int = DEFAULT_LEVEL_CAP) -> float:
    """Worst deviation, over level-k addresses, of the empirical index
    frequency from the subtile measure phi^-(k + letter)."""
    if k > cap:
        raise ValueError(f"k={k} above the enumeration cap {cap}")
    if N < 1:
        raise ValueError("N must be >= 1")
    counts = membership_counts(sys, k, N)
    delta = 0.0
    for (_, letter), cnt in counts.items():
        lam = sys.neg_power(k + letter)
        delta = max(delta, abs(cnt / N - lam))
    return delta
