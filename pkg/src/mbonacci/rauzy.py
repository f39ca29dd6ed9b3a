"""Substitutive geometry: fixed-point words, the prefix-suffix graph,
fractal point clouds with letter labels, and grid-based tiling and
set-equation verification.

Fractal sets are represented as labelled finite point clouds plus grid
rasterisations.  Exact boundary curves are never constructed; every
geometric check is parameterised by a grid resolution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from mbonacci import numeration
from mbonacci.numeration import MBonacciSystem, encode, ones_run_from, trailing_ones_before
from mbonacci.spectral import (
    contraction_matrix,
    lattice_coords,
    precise_multiples_minus,
    reduce_array,
    substitution_images,
)

DEFAULT_MAX_DEPTH = 4_000_000


def substitute(m: int, word: np.ndarray) -> np.ndarray:
    """Apply the letter rewriting 1->12, 2->13, ..., m->1 to a word array."""
    word = np.asarray(word, dtype=np.uint8)
    grows = word < m
    lens = np.where(grows, 2, 1).astype(np.uint8)
    starts = np.cumsum(lens, dtype=np.int64) - lens
    out = np.ones(int(starts[-1]) + int(lens[-1]) if word.size else 0, dtype=np.uint8)
    out[starts[grows] + 1] = word[grows] + 1
    return out


def fixed_point_prefix(m: int, length: int) -> np.ndarray:
    """First `length` letters of the word fixed by the substitution.

    Each image starts with the letter 1, so iterates of 1 are nested
    prefixes of one another; substitute until long enough and slice.
    """
    if m < 2:
        raise ValueError(f"m must be >= 2, got {m}")
    if length < 1:
        raise ValueError("length must be >= 1")
    w = np.array([1], dtype=np.uint8)
    while w.size < length:
        w = substitute(m, w)
    return w[:length]


def word_lengths(m: int, k_max: int) -> list[int]:
    """Lengths of the k-fold images of the letter 1, for k = 0..k_max,
    measured on the actual words."""
    w = np.array([1], dtype=np.uint8)
    lengths = [1]
    for _ in range(k_max):
        w = substitute(m, w)
        lengths.append(int(w.size))
    return lengths


def word_length_check(m: int, k: int) -> bool:
    """True iff the k-fold image of 1 has exactly F_k letters."""
    lengths = word_lengths(m, k)
    basis = numeration.basis_prefix(m, k + 1)
    return lengths[k] == basis[k]


@dataclass(frozen=True)
class PrefixSuffixEdge:
    """Edge of the prefix-suffix graph; prefix_len is 0 (empty) or 1."""

    from_letter: int
    to_letter: int
    prefix_len: int


def prefix_suffix_edges(m: int) -> list[PrefixSuffixEdge]:
    """All pis-decompositions of the letter images, as graph edges.

    Every image starts with 1, giving an empty-prefix edge 1 -> j for each
    letter j; two-letter images additionally give (j+1) -> j with prefix 1.
    Edge count is 2m - 1.
    """
    images = substitution_images(m)
    edges: list[PrefixSuffixEdge] = []
    for j, word in enumerate(images, start=1):
        edges.append(PrefixSuffixEdge(from_letter=1, to_letter=j, prefix_len=0))
        if len(word) == 2:
            edges.append(PrefixSuffixEdge(from_letter=word[1], to_letter=j, prefix_len=1))
    return edges


@dataclass(frozen=True, eq=False)
class FractalCloud:
    """Labelled point approximation of the fractal and its letter subtiles.

    Point n is the projection of the abelianisation of the first n
    fixed-point letters, stored both unreduced (plain lattice coordinates)
    and reduced to the torus.  Its label is fixed-point letter n+1.
    """

    m: int
    depth: int
    phi: float
    labels: np.ndarray      # uint8, shape (depth+1,)
    unreduced: np.ndarray   # float64, shape (depth+1, m-1)
    reduced: np.ndarray     # float64, shape (depth+1, m-1)

    @property
    def size(self) -> int:
        return self.depth + 1

    def letter_points(self, letter: int, reduced: bool = False) -> np.ndarray:
        pts = self.reduced if reduced else self.unreduced
        return pts[self.labels == letter]


def build_cloud(m: int, depth: int, max_depth: int = DEFAULT_MAX_DEPTH) -> FractalCloud:
    """Cloud of the first depth+1 projected prefixes.

    Coordinate i-1 of point n is n * phi^-i minus the count of letter i
    among the first n fixed-point letters, evaluated per point from split
    high-precision powers, so there is no accumulated rounding drift.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if depth > max_depth:
        raise ValueError(f"depth {depth} beyond the memory budget {max_depth}")
    sys = numeration.make_system(m, max_n=max(depth, 2))
    word = fixed_point_prefix(m, depth + 1)
    ns = np.arange(depth + 1, dtype=np.int64)
    cols = []
    for i in range(2, m + 1):
        counts = np.concatenate(([0], np.cumsum(word[:depth] == i, dtype=np.int64)))
        hi, lo = sys.neg_power_parts[i - 1]
        cols.append(precise_multiples_minus(ns, float(hi), float(lo), counts))
    unreduced = np.stack(cols, axis=1)
    return FractalCloud(
        m=m,
        depth=depth,
        phi=sys.phi_float,
        labels=word,
        unreduced=unreduced,
        reduced=reduce_array(unreduced.copy()),
    )


@dataclass(frozen=True)
class SubtileAddress:
    """Level-k subtile address: the first k digits plus a terminal letter.

    `trailing_ones` is the length r of the all-ones digit run just below
    position k; letters 1..m-r are the admissible terminal letters at this
    digit prefix.
    """

    m: int
    level: int
    digits: tuple[int, ...]
    letter: int
    trailing_ones: int

    @property
    def allowed_letters(self) -> tuple[int, ...]:
        return tuple(range(1, self.m - self.trailing_ones + 1))


def subtile_of(sys: MBonacciSystem, n: int, k: int) -> SubtileAddress:
    """Address of the level-k subtile containing the orbit point of n.

    The digit prefix is read off the greedy expansion; the terminal letter
    is one plus the length of the all-ones digit run starting at position k.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    e = encode(sys, n)
    digits = tuple(e.digit(j) for j in range(k))
    r = trailing_ones_before(e, k)
    letter = ones_run_from(e, k) + 1
    assert letter <= sys.m - r
    return SubtileAddress(m=sys.m, level=k, digits=digits, letter=letter, trailing_ones=r)


# ---------------------------------------------------------------------------
# grid rasterisation
# ---------------------------------------------------------------------------

def _cell_index(points: np.ndarray, resolution: float) -> np.ndarray:
    return np.floor(points / resolution).astype(np.int64)


def _ravel(idx: np.ndarray, mins: np.ndarray, dims: np.ndarray) -> np.ndarray:
    if np.prod(dims.astype(np.float64)) > 2 ** 62:
        raise ValueError("grid too fine to rasterise")
    return np.ravel_multi_index((idx - mins).T, tuple(int(d) for d in dims))


def _cell_sets(point_sets: list[np.ndarray], resolution: float) -> list[np.ndarray]:
    """Unique occupied-cell keys for several point sets on one shared grid."""
    idxs = [_cell_index(p, resolution) for p in point_sets]
    mins = np.min([ix.min(axis=0) for ix in idxs], axis=0)
    maxs = np.max([ix.max(axis=0) for ix in idxs], axis=0)
    dims = maxs - mins + 1
    return [np.unique(_ravel(ix, mins, dims)) for ix in idxs]


def _require_density(npoints: int, m: int, resolution: float, factor: float) -> None:
    need = factor * resolution ** -(m - 1)
    if npoints < need:
        raise ValueError(
            f"cloud of {npoints} points too sparse for resolution {resolution} "
            f"(heuristic needs >= {int(need)})"
        )


@dataclass(frozen=True)
class SetEquationReport:
    m: int
    k: int
    resolution: float
    ratios: dict[int, float]
    max_ratio: float


def set_equation_check(
    m: int,
    cloud: FractalCloud,
    k: int,
    resolution: float,
    density_factor: float = 100.0,
) -> SetEquationReport:
    """Grid comparison of each letter subcloud against its decomposition.

    The subtile of letter 1 is the contraction of the whole cloud; the
    subtile of letter i > 1 is the contraction of subtile i-1 translated
    by the projection of e_1.  Iterating k times and rasterising both
    sides on a shared grid gives a symmetric-difference cell ratio.
    `density_factor` scales the points-per-cell admission heuristic.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    _require_density(cloud.size, m, resolution, density_factor)
    mat = contraction_matrix(m, cloud.phi)
    gamma = np.asarray(lattice_coords(m, cloud.phi, [1] + [0] * (m - 1)))

    def approx(letter: int, level: int) -> np.ndarray:
        if level == 0:
            return cloud.letter_points(letter)
        if letter == 1:
            parts = [approx(j, level - 1) for j in range(1, m + 1)]
            return np.concatenate(parts) @ mat.T
        return approx(letter - 1, level - 1) @ mat.T + gamma

    ratios: dict[int, float] = {}
    for letter in range(1, m + 1):
        lhs = cloud.letter_points(letter)
        rhs = approx(letter, k)
        cells_l, cells_r = _cell_sets([lhs, rhs], resolution)
        sym = np.setxor1d(cells_l, cells_r, assume_unique=True).size
        union = np.union1d(cells_l, cells_r).size
        ratios[letter] = sym / union if union else 0.0
    return SetEquationReport(m=m, k=k, resolution=resolution, ratios=ratios,
                             max_ratio=max(ratios.values()))


@dataclass(frozen=True)
class TilingReport:
    m: int
    resolution: float
    total_cells: int
    covered_cells: int
    coverage: float
    overlap_cells: int
    overlap_fraction: float


def tiling_check(
    m: int,
    cloud: FractalCloud,
    resolution: float,
    density_factor: float = 100.0,
) -> TilingReport:
    """Coverage and letter-overlap statistics of the reduced cloud.

    Full coverage of the torus grid witnesses the fundamental-domain
    property at this resolution; the fraction of cells claimed by two or
    more letters bounds how visible the subtile boundaries are.
    """
    _require_density(cloud.size, m, resolution, density_factor)
    side = round(1.0 / resolution)
    idx = np.minimum((cloud.reduced * side).astype(np.int64), side - 1)
    dims = tuple([side] * (m - 1))
    keys = np.ravel_multi_index(idx.T, dims)
    total = side ** (m - 1)
    covered = np.unique(keys).size
    pair_keys = np.unique(keys * np.int64(m + 1) + cloud.labels)
    cells_of_pairs, letter_counts = np.unique(pair_keys // (m + 1), return_counts=True)
    overlap = int(np.count_nonzero(letter_counts >= 2))
    return TilingReport(
        m=m,
        resolution=resolution,
        total_cells=total,
        covered_cells=int(covered),
        coverage=covered / total,
        overlap_cells=overlap,
        overlap_fraction=overlap / covered if covered else 0.0,
    )


# ---------------------------------------------------------------------------
# exports
# ---------------------------------------------------------------------------

_PALETTE = (
    (31, 119, 180),
    (255, 127, 14),
    (44, 160, 44),
    (214, 39, 40),
    (148, 103, 189),
    (140, 86, 75),
)


def export_cloud_csv(cloud: FractalCloud, stream, digits: int = 15) -> None:
    """Write `n,label,c1,...,c(m-1)` rows with fixed decimal places."""
    cols = ",".join(f"c{i}" for i in range(1, cloud.m))
    stream.write(f"n,label,{cols}\n")
    for n in range(cloud.size):
        coords = ",".join(f"{c:.{digits}f}" for c in cloud.reduced[n])
        stream.write(f"{n},{int(cloud.labels[n])},{coords}\n")


def render_cloud_ppm(cloud: FractalCloud, size: int = 512) -> bytes:
    """Binary PPM render of the reduced cloud, one colour per letter.

    Two-dimensional torus coordinates render as a size x size image; the
    one-dimensional case renders as a strip.  Higher dimensions are not
    renderable in this format.
    """
    if cloud.m == 3:
        width = height = size
        img = np.full((height, width, 3), 255, dtype=np.uint8)
        ix = np.minimum((cloud.reduced[:, 0] * width).astype(np.int64), width - 1)
        iy = np.minimum((cloud.reduced[:, 1] * height).astype(np.int64), height - 1)
        for letter in range(1, cloud.m + 1):
            sel = cloud.labels == letter
            img[height - 1 - iy[sel], ix[sel]] = _PALETTE[(letter - 1) % len(_PALETTE)]
    elif cloud.m == 2:
        width, height = size, max(8, size // 8)
        img = np.full((height, width, 3), 255, dtype=np.uint8)
        ix = np.minimum((cloud.reduced[:, 0] * width).astype(np.int64), width - 1)
        for letter in range(1, cloud.m + 1):
            sel = cloud.labels == letter
            img[:, ix[sel]] = _PALETTE[(letter - 1) % len(_PALETTE)]
    else:
        raise ValueError("PPM rendering supports m = 2 or 3 only")
    header = f"P6\n{width} {height}\n255\n".encode()
    return header + img.tobytes()


def export_cloud_ppm(cloud: FractalCloud, path: str, size: int = 512) -> None:
    data = render_cloud_ppm(cloud, size)
    with open(path, "wb") as fh:
        fh.write(data)
