"""Linear-algebraic backbone: dominant root, incidence matrix, eigendata,
and the lattice-coordinate form of the contracting projection.

All geometry downstream lives in coordinates with respect to the lattice
basis pi(e_1 - e_2), ..., pi(e_1 - e_m) of the contracting hyperplane,
where pi projects R^m along the expanding eigenvector.  In these
coordinates the lattice is Z^{m-1}, so reduction mod the lattice is an
ordinary fractional part and the digit-to-rotation correspondence becomes
the rotation by (phi^-2, ..., phi^-m) on the standard torus.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath
import numpy as np

from mbonacci.numeration import DEFAULT_PRECISION, work_bits

_DEKKER = float(2 ** 27 + 1)

# exact integer-times-float products in the helpers below need n < 2^26
MAX_PRECISE_INDEX = 1 << 26


def dominant_root(m: int, precision: float = DEFAULT_PRECISION, max_iter: int = 200) -> mpmath.mpf:
    """Root of x^m = x^{m-1} + ... + x + 1 in (1, 2).

    Bisection brackets the root, Newton refines it at extended working
    precision.  Raises if the residual does not reach `precision` within
    the iteration cap.
    """
    if m < 2:
        raise ValueError(f"m must be >= 2, got {m}")
    bits = work_bits(precision)
    with mpmath.workprec(bits):

        def f(x):
            return x ** m - sum(x ** j for j in range(m))

        def fprime(x):
            return m * x ** (m - 1) - sum(j * x ** (j - 1) for j in range(1, m))

        lo, hi = mpmath.mpf(1), mpmath.mpf(2)
        for _ in range(60):
            mid = (lo + hi) / 2
            if f(mid) < 0:
                lo = mid
            else:
                hi = mid
        x = (lo + hi) / 2
        for _ in range(max_iter):
            if abs(f(x)) <= precision:
                return +x
            x = x - f(x) / fprime(x)
        raise RuntimeError(
            f"dominant_root(m={m}) did not reach residual {precision}; "
            "precision is likely set below the working range"
        )


def substitution_images(m: int) -> tuple[tuple[int, ...], ...]:
    """Images of letters 1..m: i -> (1, i+1) for i < m, m -> (1,)."""
    if m < 2:
        raise ValueError(f"m must be >= 2, got {m}")
    return tuple((1, i + 1) if i < m else (1,) for i in range(1, m + 1))


def incidence_matrix(m: int) -> np.ndarray:
    """Letter-count matrix: entry (i, j) counts letter i+1 in the image of j+1."""
    images = substitution_images(m)
    mat = np.zeros((m, m), dtype=np.int64)
    for j, word in enumerate(images):
        for letter in word:
            mat[letter - 1, j] += 1
    return mat


@dataclass(frozen=True, eq=False)
class SubstitutionData:
    m: int
    images: tuple[tuple[int, ...], ...]
    incidence: np.ndarray


def substitution_data(m: int) -> SubstitutionData:
    return SubstitutionData(m=m, images=substitution_images(m), incidence=incidence_matrix(m))


@dataclass(frozen=True, eq=False)
class SpectralData:
    """Dominant eigendata of the incidence matrix.

    `right` is sum-normalised, which makes its entries exactly
    phi^-1, ..., phi^-m; `left` is scaled so its first entry is 1.
    `rotation_vector` is (phi^-2, ..., phi^-m).
    """

    m: int
    phi: float
    right: np.ndarray
    left: np.ndarray
    rotation_vector: np.ndarray


def spectral_data(m: int, precision: float = DEFAULT_PRECISION) -> SpectralData:
    phi = dominant_root(m, precision)
    bits = work_bits(precision)
    with mpmath.workprec(bits):
        right = np.array([float(phi ** -i) for i in range(1, m + 1)])
        left = [mpmath.mpf(1)]
        for _ in range(m - 1):
            left.append(phi * left[-1] - 1)
        left_f = np.array([float(x) for x in left])
        rot = np.array([float(phi ** -i) for i in range(2, m + 1)])
    return SpectralData(m=m, phi=float(phi), right=right, left=left_f, rotation_vector=rot)


def ambient_projection(m: int, precision: float = DEFAULT_PRECISION) -> np.ndarray:
    """Matrix of the projection of R^m along the expanding eigenvector
    onto the contracting hyperplane: P = I - u v^T / (v . u)."""
    data = spectral_data(m, precision)
    u, v = data.right, data.left
    return np.eye(m) - np.outer(u, v) / float(v @ u)


@dataclass(frozen=True)
class TorusPoint:
    """Point of the (m-1)-torus in lattice-basis coordinates, each in [0, 1)."""

    coords: tuple[float, ...]

    def __post_init__(self) -> None:
        if any(not (0.0 <= c < 1.0) for c in self.coords):
            raise ValueError(f"coordinates must lie in [0,1): {self.coords}")

    def array(self) -> np.ndarray:
        return np.array(self.coords)

    @property
    def dim(self) -> int:
        return len(self.coords)


def torus_reduce(c) -> TorusPoint:
    """Reduce real coordinates mod 1; a value landing exactly on 1.0 maps to 0.0."""
    arr = np.asarray(c, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValueError("coordinates must be finite")
    frac = arr - np.floor(arr)
    frac[frac >= 1.0] = 0.0
    return TorusPoint(tuple(float(x) for x in frac))


def reduce_array(coords: np.ndarray) -> np.ndarray:
    """Vectorised torus reduction for a (N, d) coordinate array."""
    frac = coords - np.floor(coords)
    frac[frac >= 1.0] = 0.0
    return frac


def torus_distance(a, b) -> float:
    """Max-metric distance on the torus (coordinates wrapped mod 1)."""
    pa = a.array() if isinstance(a, TorusPoint) else np.asarray(a, dtype=np.float64)
    pb = b.array() if isinstance(b, TorusPoint) else np.asarray(b, dtype=np.float64)
    d = np.abs(pa - pb) % 1.0
    return float(np.max(np.minimum(d, 1.0 - d))) if d.size else 0.0


def lattice_coords(m: int, phi, x):
    """Coordinates of the projected integer vector x in the lattice basis.

    Writing pi for the projection along the expanding eigenvector and
    b_{i-1} = pi(e_1 - e_i), the identity pi(e_1) = sum_i phi^-i b_{i-1}
    (i = 2..m) combines with pi(e_i) = pi(e_1) - b_{i-1} and linearity to
    give coordinate i-1 of pi(x) as (sum_j x_j) phi^-i - x_i.  No linear
    system is solved per point.

    `phi` may be a float (returns a float64 array) or an mpmath value
    (returns a list of mpmath values at the ambient working precision).
    """
    x = list(x)
    if len(x) != m:
        raise ValueError(f"x must have length m={m}")
    total = sum(x)
    if isinstance(phi, mpmath.mpf):
        return [total * phi ** -i - x[i - 1] for i in range(2, m + 1)]
    phi = float(phi)
    powers = np.array([phi ** -i for i in range(2, m + 1)])
    return total * powers - np.array(x[1:], dtype=np.float64)


def contraction_matrix(m: int, phi: float) -> np.ndarray:
    """Action of the incidence matrix on the contracting hyperplane,
    written in lattice-basis coordinates.

    The incidence matrix sends b_{i-1} = pi(e_1 - e_i) to pi(e_2 - e_{i+1})
    = b_i - b_1 for i < m, and b_{m-1} to pi(e_2) = pi(e_1) - b_1, with
    pi(e_1) expanded via lattice_coords.  The result contracts by phi^-1
    up to a bounded change of basis.
    """
    mat = np.zeros((m - 1, m - 1))
    for i in range(2, m):
        mat[0, i - 2] = -1.0
        mat[i - 1, i - 2] = 1.0
    e1 = lattice_coords(m, phi, [1] + [0] * (m - 1))
    mat[:, m - 2] = e1
    mat[0, m - 2] -= 1.0
    return mat


def rotation_point(systems, n: int, offsets=None) -> TorusPoint:
    """Concatenated rotation orbit point: frac(n * (phi^-2..phi^-m) + offset)
    per system, each block evaluated from n directly at extended precision."""
    if n < 0:
        raise ValueError("n must be a natural number")
    if offsets is None:
        offsets = [None] * len(systems)
    if len(offsets) != len(systems):
        raise ValueError("offsets length must match systems")
    out: list[float] = []
    for sys_i, off in zip(systems, offsets):
        off_coords = (0.0,) * (sys_i.m - 1) if off is None else tuple(off.coords)
        if len(off_coords) != sys_i.m - 1:
            raise ValueError("offset dimension mismatch")
        bits = work_bits(sys_i.precision)
        with mpmath.workprec(bits):
            for i, o in zip(range(2, sys_i.m + 1), off_coords):
                v = mpmath.frac(n * sys_i.phi ** -i + o)
                f = float(v)
                out.append(0.0 if f >= 1.0 else f)
    return TorusPoint(tuple(out))


# ---------------------------------------------------------------------------
# split-arithmetic helpers for bulk orbits: frac(n * alpha) and
# n * alpha - integer, accurate to a few float64 ulps for n < 2^26
# ---------------------------------------------------------------------------

def _split(hi: float) -> tuple[float, float]:
    t = hi * _DEKKER
    hi1 = t - (t - hi)
    return hi1, hi - hi1


def precise_frac_multiples(ns: np.ndarray, hi: float, lo: float, offset: float = 0.0) -> np.ndarray:
    """frac(n * (hi + lo) + offset) for an int array n < 2^26.

    hi is split so both partial products are exact; only the final
    recombination rounds.
    """
    if ns.size and int(ns.max()) >= MAX_PRECISE_INDEX:
        raise ValueError("index too large for the exact-product fast path")
    hi1, hi2 = _split(hi)
    nf = ns.astype(np.float64)
    a = nf * hi1
    a -= np.floor(a)
    s = a + nf * hi2
    s += nf * lo + offset
    s -= np.floor(s)
    s[s >= 1.0] = 0.0
    return s


def precise_multiples_minus(ns: np.ndarray, hi: float, lo: float, subtract: np.ndarray) -> np.ndarray:
    """n * (hi + lo) - subtract, with the dominant product kept exact."""
    if ns.size and int(ns.max()) >= MAX_PRECISE_INDEX:
        raise ValueError("index too large for the exact-product fast path")
    hi1, hi2 = _split(hi)
    nf = ns.astype(np.float64)
    out = nf * hi1 - subtract.astype(np.float64)
    out += nf * hi2
    out += nf * lo
    return out


def rotation_orbit(system, count: int, offset: TorusPoint | None = None) -> np.ndarray:
    """First `count` rotation points of one system as a (count, m-1) array."""
    ns = np.arange(count, dtype=np.int64)
    off = (0.0,) * (system.m - 1) if offset is None else offset.coords
    cols = []
    for i, o in zip(range(2, system.m + 1), off):
        hi, lo = system.neg_power_parts[i - 1]
        cols.append(precise_frac_multiples(ns, float(hi), float(lo), float(o)))
    return np.stack(cols, axis=1)
