"""Exact integer arithmetic for the m-bonacci number system.

The basis starts with powers of two (F_0 .. F_{m-1} = 1, 2, ..., 2^{m-1})
and continues with sums of the previous m terms.  Every natural number has
a unique greedy expansion over this basis whose binary digit string never
contains m consecutive ones.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass

import mpmath
import numpy as np

DEFAULT_PRECISION = 1e-30

# 60 significant bits beyond a float64 mantissa.
_MIN_WORK_BITS = 113

# Hard cap on basis length; loud failure beats a runaway allocation.
_MAX_BASIS_TERMS = 512


def work_bits(precision: float) -> int:
    """Binary working precision needed to certify a residual tolerance."""
    if precision <= 0.0:
        raise ValueError("precision must be positive")
    return max(_MIN_WORK_BITS, int(-math.log2(precision)) + 20)


def basis_prefix(m: int, count: int) -> list[int]:
    """First `count` basis terms as exact integers."""
    if m < 2:
        raise ValueError(f"m must be >= 2, got {m}")
    if count < 1:
        raise ValueError("count must be >= 1")
    if count > _MAX_BASIS_TERMS:
        raise ValueError(f"basis of {count} terms exceeds the configured cap")
    terms: list[int] = []
    for k in range(count):
        if k < m:
            terms.append(1 << k)
        else:
            terms.append(sum(terms[k - m:k]))
    return terms


@dataclass(frozen=True, eq=False)
class MBonacciSystem:
    """Numeration context: basis terms, dominant root, cached root powers.

    Immutable after construction; all operations on it are pure functions.
    `phi` is an mpmath value carrying the extended-precision root,
    `phi_float` its float64 rounding.  `neg_power_parts[j]` holds a
    (hi, lo) float64 pair with hi + lo = phi**-(j+1) to roughly 106 bits,
    used by the vectorised fractional-part helpers.
    """

    m: int
    basis: tuple[int, ...]
    phi: mpmath.mpf
    phi_float: float
    phi_neg_powers: tuple[float, ...]
    neg_power_parts: np.ndarray
    precision: float

    def coverage(self) -> int:
        """Largest n this system can expand (exclusive bound is basis[-1])."""
        return self.basis[-1] - 1

    def neg_power(self, j: int) -> float:
        """phi**-j as float64 (j >= 1)."""
        if not 1 <= j <= len(self.phi_neg_powers):
            raise ValueError(f"power {j} beyond the cached range 1..{len(self.phi_neg_powers)}")
        return self.phi_neg_powers[j - 1]

    def pos_power(self, j: int) -> float:
        """phi**j as float64 (j >= 0)."""
        return float(self.phi_float ** j) if j else 1.0


@dataclass(frozen=True)
class Expansion:
    """Greedy digit string, little-endian with trailing zeros trimmed."""

    digits: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(d not in (0, 1) for d in self.digits):
            raise ValueError("digits must be 0 or 1")
        if self.digits and self.digits[-1] == 0:
            raise ValueError("trailing zeros must be trimmed")

    def digit(self, j: int) -> int:
        """Digit at position j, zero beyond the stored length."""
        return self.digits[j] if 0 <= j < len(self.digits) else 0


def make_system(m: int, max_n: int, precision: float = DEFAULT_PRECISION) -> MBonacciSystem:
    """Build the numeration context covering expansions of 0..max_n."""
    if m < 2:
        raise ValueError(f"m must be >= 2, got {m}")
    if max_n < 1:
        raise ValueError("max_n must be >= 1")
    from mbonacci.spectral import dominant_root  # local import keeps the module graph acyclic

    terms = [1]
    k = 1
    while terms[-1] <= max_n:
        if k >= _MAX_BASIS_TERMS:
            raise ValueError("basis overflow: max_n beyond the configured term cap")
        terms = basis_prefix(m, k + 1)
        k += 1
    # slack terms so root powers exist well past the digit range
    terms = basis_prefix(m, len(terms) + m + 2)

    phi = dominant_root(m, precision)
    bits = work_bits(precision)
    npowers = max(len(terms), 48)
    with mpmath.workprec(bits):
        inv = 1 / phi
        negs: list[float] = []
        parts = np.empty((npowers, 2), dtype=np.float64)
        p = mpmath.mpf(1)
        for j in range(npowers):
            p = p * inv
            hi = float(p)
            lo = float(p - mpmath.mpf(hi))
            negs.append(hi)
            parts[j, 0] = hi
            parts[j, 1] = lo
        residual = abs(phi ** m - sum(phi ** j for j in range(m)))
        if residual > precision:
            raise RuntimeError(f"root residual {residual} exceeds precision {precision}")
    parts.setflags(write=False)
    return MBonacciSystem(
        m=m,
        basis=tuple(terms),
        phi=phi,
        phi_float=float(phi),
        phi_neg_powers=tuple(negs),
        neg_power_parts=parts,
        precision=precision,
    )


def encode(sys: MBonacciSystem, n: int) -> Expansion:
    """Greedy expansion of n: repeatedly subtract the largest basis term."""
    if n < 0:
        raise ValueError("n must be a natural number")
    if n >= sys.basis[-1]:
        raise ValueError(f"n={n} exceeds basis coverage (largest term {sys.basis[-1]})")
    width = bisect_right(sys.basis, n)
    digits = [0] * width
    rem = n
    for j in range(width - 1, -1, -1):
        if sys.basis[j] <= rem:
            digits[j] = 1
            rem -= sys.basis[j]
    assert rem == 0
    while digits and digits[-1] == 0:
        digits.pop()
    return Expansion(tuple(digits))


def decode(sys: MBonacciSystem, e: Expansion) -> int:
    """Value of an admissible digit string: dot product with the basis."""
    if len(e.digits) > len(sys.basis):
        raise ValueError("digit string longer than the cached basis")
    if not is_admissible(sys.m, e.digits):
        raise ValueError(f"inadmissible digit string for m={sys.m}: {e.digits}")
    return sum(f for d, f in zip(e.digits, sys.basis) if d)


def is_admissible(m: int, digits) -> bool:
    """True iff the binary string has no run of m consecutive ones."""
    run = 0
    for d in digits:
        if d not in (0, 1):
            raise ValueError(f"non-binary digit {d!r}")
        run = run + 1 if d else 0
        if run >= m:
            return False
    return True


def trailing_ones_before(e: Expansion, k: int) -> int:
    """Length r of the maximal all-ones run in positions k-1, k-2, ...

    Digits at negative index count as zero, so r = 0 whenever k = 0 or
    the digit at k-1 is zero.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    r = 0
    j = k - 1
    while j >= 0 and e.digit(j) == 1:
        r += 1
        j -= 1
    return r


def ones_run_from(e: Expansion, k: int) -> int:
    """Length of the all-ones run starting at position k (possibly zero)."""
    t = 0
    j = k
    while e.digit(j) == 1:
        t += 1
        j += 1
    return t


# ---------------------------------------------------------------------------
# bulk paths (vectorised; used by measurement runs over large n ranges)
# ---------------------------------------------------------------------------

def digit_matrix(sys: MBonacciSystem, ns, width: int | None = None) -> np.ndarray:
    """Greedy digit strings for many n at once.

    `ns` is an int array (or a count, meaning arange).  Returns a uint8
    matrix whose row i holds the little-endian digits of ns[i]; columns
    beyond each expansion are zero.
    """
    if np.ndim(ns) == 0:
        ns = np.arange(int(ns), dtype=np.int64)
    else:
        ns = np.asarray(ns, dtype=np.int64)
    if ns.size and (ns.min() < 0 or ns.max() >= sys.basis[-1]):
        raise ValueError("n out of basis coverage")
    need = bisect_right(sys.basis, int(ns.max())) if ns.size else 0
    if width is None:
        width = need
    elif width < need:
        raise ValueError(f"width {width} too small, need {need}")
    # columns beyond `need` are zero padding, so width may exceed the basis
    digits = np.zeros((ns.size, width), dtype=np.uint8)
    rem = ns.copy()
    for j in range(need - 1, -1, -1):
        f = sys.basis[j]
        take = rem >= f
        digits[take, j] = 1
        rem[take] -= f
    return digits


def decode_matrix(sys: MBonacciSystem, digits: np.ndarray) -> np.ndarray:
    """Values of many digit strings at once (inverse of digit_matrix)."""
    width = digits.shape[1]
    if width > len(sys.basis):
        if digits[:, len(sys.basis):].any():
            raise ValueError("digit columns beyond the cached basis must be zero")
        width = len(sys.basis)
    basis = np.array(sys.basis[:width], dtype=np.int64)
    return digits[:, :width].astype(np.int64) @ basis


def longest_one_run(digits: np.ndarray) -> np.ndarray:
    """Per-row maximum run length of consecutive ones."""
    n, width = digits.shape
    run = np.zeros(n, dtype=np.int32)
    best = np.zeros(n, dtype=np.int32)
    for j in range(width):
        col = digits[:, j].astype(np.int32)
        run = (run + 1) * col
        np.maximum(best, run, out=best)
    return best
