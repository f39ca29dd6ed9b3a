"""Measurement engine: exact star discrepancy in one and several
dimensions, decay-exponent fitting, box-counting dimension estimation,
and the product-fractal decay exponent.

The multi-dimensional star discrepancy is a supremum over anchored boxes.
On each cell of the grid spanned by the point coordinates the counting
function is constant, so the supremum is attained in the limit at grid
corners: approaching a corner from below compares the box volume against
the strictly-inside count, approaching from above compares the closed
count against the volume.  Enumerating both variants over all corners is
therefore exact.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from itertools import product

import numpy as np

from mbonacci.rauzy import FractalCloud

DEFAULT_MAX_EXACT_OPS = int(1e10)


@dataclass(frozen=True)
class DiscrepancyReport:
    N: int
    value: float
    method: str
    dims: int
    runtime: float
    exact: bool = True


def star_disc_1d(points) -> float:
    """Exact one-dimensional star discrepancy via the sorted formula."""
    x = np.sort(np.asarray(points, dtype=np.float64))
    n = x.size
    if n == 0:
        raise ValueError("empty point set")
    if x[0] < 0.0 or x[-1] >= 1.0:
        raise ValueError("points must lie in [0, 1)")
    i = np.arange(1, n + 1, dtype=np.float64)
    return float(max(np.max(i / n - x), np.max(x - (i - 1) / n)))


def _exact_2d(points: np.ndarray) -> float:
    """Sweep over x-corners maintaining the sorted y-prefix; exact."""
    n = len(points)
    order = np.argsort(points[:, 0], kind="stable")
    xs = points[order, 0]
    ys = points[order, 1]
    x_cands = np.unique(np.concatenate((xs, [0.0, 1.0])))
    y_cands = np.unique(np.concatenate((ys, [0.0, 1.0])))
    acc = np.empty(0, dtype=np.float64)
    best = 0.0
    ptr = 0
    for xv in x_cands:
        nxt = ptr
        while nxt < n and xs[nxt] < xv:
            nxt += 1
        if nxt > ptr:
            batch = np.sort(ys[ptr:nxt])
            acc = np.insert(acc, np.searchsorted(acc, batch), batch)
            ptr = nxt
        open_counts = np.searchsorted(acc, y_cands, side="left")
        best = max(best, float(np.max(xv * y_cands - open_counts / n)))
        nxt = ptr
        while nxt < n and xs[nxt] == xv:
            nxt += 1
        if nxt > ptr:
            batch = np.sort(ys[ptr:nxt])
            acc = np.insert(acc, np.searchsorted(acc, batch), batch)
            ptr = nxt
        closed_counts = np.searchsorted(acc, y_cands, side="right")
        best = max(best, float(np.max(closed_counts / n - xv * y_cands)))
    return best


def _exact_grid(points: np.ndarray, cands: list[np.ndarray]) -> float:
    """Corner enumeration for s >= 3: loop the leading dims, resolve the
    last dim with a strict/closed count matrix-vector product."""
    n, s = points.shape
    lt = [(points[:, j][None, :] < c[:, None]) for j, c in enumerate(cands)]
    le = [(points[:, j][None, :] <= c[:, None]) for j, c in enumerate(cands)]
    last_lt = lt[-1].astype(np.float32)
    last_le = le[-1].astype(np.float32)
    last_c = cands[-1]
    best = 0.0
    lead_ranges = [range(len(c)) for c in cands[:-1]]
    for idx in product(*lead_ranges):
        mask_lt = lt[0][idx[0]]
        mask_le = le[0][idx[0]]
        vol0 = cands[0][idx[0]]
        for j in range(1, s - 1):
            mask_lt = mask_lt & lt[j][idx[j]]
            mask_le = mask_le & le[j][idx[j]]
            vol0 = vol0 * cands[j][idx[j]]
        vols = vol0 * last_c
        # counts are small integers, exact in float32; divide in float64
        open_counts = (last_lt @ mask_lt.astype(np.float32)).astype(np.float64)
        closed_counts = (last_le @ mask_le.astype(np.float32)).astype(np.float64)
        best = max(
            best,
            float(np.max(vols - open_counts / n)),
            float(np.max(closed_counts / n - vols)),
        )
    return best


def _subsample(cands: np.ndarray, limit: int) -> np.ndarray:
    if len(cands) <= limit:
        return cands
    picks = np.unique(np.linspace(0, len(cands) - 1, limit).astype(np.int64))
    sub = cands[picks]
    return np.unique(np.concatenate((sub, [1.0])))


def star_disc_multi(
    points,
    max_exact_ops: int = DEFAULT_MAX_EXACT_OPS,
    fallback: bool = True,
) -> DiscrepancyReport:
    """Star discrepancy of an s-dimensional point set, s >= 2.

    Exact while the corner-enumeration cost fits the operation budget;
    beyond it, either raises or (default) reports a lower bound from a
    subsampled corner grid, flagged as not exact.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] < 2:
        raise ValueError("expected an (N, s) array with s >= 2")
    n, s = pts.shape
    if n == 0:
        raise ValueError("empty point set")
    if pts.min() < 0.0 or pts.max() >= 1.0:
        raise ValueError("points must lie in [0, 1)^s")
    start = time.perf_counter()
    if s == 2 and float(n) * n <= max_exact_ops:
        value = _exact_2d(pts)
        return DiscrepancyReport(N=n, value=value, method="exact_corner_sweep",
                                 dims=s, runtime=time.perf_counter() - start)
    cands = [np.unique(np.concatenate((pts[:, j], [0.0, 1.0]))) for j in range(s)]
    ops = n * float(np.prod([len(c) for c in cands]))
    if ops <= max_exact_ops:
        value = _exact_grid(pts, cands)
        return DiscrepancyReport(N=n, value=value, method="exact_corner_grid",
                                 dims=s, runtime=time.perf_counter() - start)
    if not fallback:
        raise ValueError(
            f"exact corner enumeration needs ~{ops:.2g} ops, over the budget "
            f"{max_exact_ops:.2g}; use fewer points or allow the fallback"
        )
    limit = max(4, int((max_exact_ops / n) ** (1.0 / s)))
    cands = [_subsample(c, limit) for c in cands]
    value = _exact_grid(pts, cands)
    return DiscrepancyReport(N=n, value=value, method="corner_subsample_lower_bound",
                             dims=s, runtime=time.perf_counter() - start, exact=False)


def decay_fit(samples) -> tuple[float, float, float]:
    """Least-squares fit of log D against log N.

    Returns (exponent, intercept, r_squared) for D ~ exp(intercept) * N^exponent.
    """
    samples = sorted(samples)
    if len(samples) < 4:
        raise ValueError("need at least 4 samples")
    ns = np.array([float(n) for n, _ in samples])
    ds = np.array([float(d) for _, d in samples])
    if np.any(ns[1:] <= ns[:-1]):
        raise ValueError("sample sizes must be strictly increasing")
    if np.any(ds <= 0.0):
        raise ValueError("discrepancy values must be positive")
    x = np.log(ns)
    y = np.log(ds)
    if np.allclose(y, y[0]):
        raise ValueError("degenerate samples: constant discrepancy")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot else 1.0
    return float(slope), float(intercept), r2


@dataclass(frozen=True)
class DimensionEstimate:
    levels: tuple[int, ...]
    counts: tuple[int, ...]
    slope: float
    stderr: float
    mode: str


def _boundary_cells(cloud: FractalCloud, level: int, mode: str, coords: str) -> int:
    side = 1 << level
    d = cloud.m - 1
    if coords == "torus":
        idx = np.minimum((cloud.reduced * side).astype(np.int64), side - 1)
        dims = tuple([side] * d)
    else:
        # ambient grid anchored at 0, stored with a one-cell empty margin
        idx = np.floor(cloud.unreduced * side).astype(np.int64)
        mins = idx.min(axis=0)
        dims = tuple(int(x) for x in (idx.max(axis=0) - mins + 3))
        idx = idx - mins + 1
    keys = np.ravel_multi_index(idx.T, dims)
    cells: list[np.ndarray] = []
    if mode in ("subtile", "both"):
        pair_keys = np.unique(keys * np.int64(cloud.m + 1) + cloud.labels)
        ids, letter_counts = np.unique(pair_keys // (cloud.m + 1), return_counts=True)
        cells.append(ids[letter_counts >= 2])
    if mode in ("outer", "both"):
        ncells = 1
        for x in dims:
            ncells *= x
        if ncells > 1 << 26:
            raise ValueError("occupancy grid too large for the neighbour rule")
        occ = np.zeros(dims, dtype=bool)
        occ.flat[np.unique(keys)] = True
        holes = ~occ
        near_hole = np.zeros(dims, dtype=bool)
        for axis in range(d):
            # wrap-around of roll is the right adjacency on the torus and
            # harmless on the ambient grid, whose margin ring is empty
            near_hole |= np.roll(holes, 1, axis=axis)
            near_hole |= np.roll(holes, -1, axis=axis)
        cells.append(np.flatnonzero(occ & near_hole))
    merged = np.unique(np.concatenate(cells)) if cells else np.empty(0, dtype=np.int64)
    return int(merged.size)


def box_dim_boundary(
    cloud: FractalCloud,
    levels,
    mode: str = "both",
    coords: str = "ambient",
) -> DimensionEstimate:
    """Box-counting dimension of the cloud's boundary structure.

    A cell of side 2^-level is a boundary cell when it is occupied but has
    an unoccupied face-neighbour ("outer" rule), or when points of two or
    more letters land in it ("subtile" rule); "both" takes the union.  The
    default grid lives in plain lattice coordinates anchored at 0, where
    the cloud is a bounded region with genuine exterior; on the reduced
    torus ("torus") the cloud covers every cell at practical depths, so
    only the letter rule can fire there.
    """
    if mode not in ("subtile", "outer", "both"):
        raise ValueError(f"unknown mode {mode!r}")
    if coords not in ("ambient", "torus"):
        raise ValueError(f"unknown coords {coords!r}")
    levels = tuple(int(l) for l in levels)
    if not levels or any(l < 1 for l in levels):
        raise ValueError("levels must be positive integers")
    finest = max(levels)
    if cloud.size < (1 << finest) ** (cloud.m - 1):
        raise ValueError(
            f"cloud of {cloud.size} points too sparse for level {finest} "
            f"(needs at least one point per cell on average)"
        )
    counts = tuple(_boundary_cells(cloud, l, mode, coords) for l in levels)
    xs = np.array([l for l, c in zip(levels, counts) if c > 0], dtype=np.float64)
    ys = np.array([np.log2(c) for c in counts if c > 0])
    if xs.size < 2:
        return DimensionEstimate(levels=levels, counts=counts, slope=0.0, stderr=0.0, mode=mode)
    slope, intercept = np.polyfit(xs, ys, 1)
    resid = ys - (slope * xs + intercept)
    denom = float(np.sum((xs - xs.mean()) ** 2))
    dof = max(len(xs) - 2, 1)
    stderr = float(np.sqrt(np.sum(resid ** 2) / dof / denom)) if denom else 0.0
    return DimensionEstimate(levels=levels, counts=counts, slope=float(slope),
                             stderr=stderr, mode=mode)


def theorem_exponent(ms, dims) -> float:
    """Decay exponent max_i(d_i - (m_i - 1)) / sum_i(m_i - 1) for a product
    of fractals with boundary dimensions d_i; strictly negative whenever
    every d_i is below m_i - 1."""
    ms = [int(m) for m in ms]
    dims = [float(d) for d in dims]
    if len(ms) != len(dims):
        raise ValueError("ms and dims must have equal length")
    if not ms:
        raise ValueError("need at least one component")
    if len(set(ms)) != len(ms):
        raise ValueError(f"m values must be pairwise distinct, got {ms}")
    if any(m < 2 for m in ms):
        raise ValueError("all m must be >= 2")
    for m, d in zip(ms, dims):
        if d < 0:
            raise ValueError(f"dimension {d} negative")
        if d >= m - 1:
            raise ValueError(f"boundary dimension {d} must be strictly below m-1={m - 1}")
    return max(d - (m - 1) for m, d in zip(ms, dims)) / sum(m - 1 for m in ms)


def load_points_csv(stream) -> np.ndarray:
    """Read an external point set: header x1,...,xs then one point per line."""
    header = stream.readline().strip()
    names = [h.strip() for h in header.split(",")]
    if not names or not all(n.startswith("x") for n in names):
        raise ValueError(f"expected header x1,...,xs, got {header!r}")
    rows = [line.strip() for line in stream if line.strip()]
    pts = np.array([[float(v) for v in row.split(",")] for row in rows])
    if pts.ndim != 2 or pts.shape[1] != len(names):
        raise ValueError("malformed point rows")
    return pts
