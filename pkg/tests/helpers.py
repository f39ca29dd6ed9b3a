"""Independent oracles used across the test modules.

Everything here recomputes expectations by brute force or enumeration so
the tests never trust the code path they are checking.
"""

import numpy as np


def naive_star_disc(points) -> float:
    """O(corners * N) corner enumeration of the star discrepancy."""
    pts = np.asarray(points, dtype=np.float64)
    n, s = pts.shape
    cands = [np.unique(np.concatenate((pts[:, j], [0.0, 1.0]))) for j in range(s)]
    grids = np.meshgrid(*cands, indexing="ij")
    corners = np.stack([g.ravel() for g in grids], axis=1)
    best = 0.0
    for chunk in np.array_split(corners, max(1, len(corners) // 20000)):
        lt = (pts[None, :, :] < chunk[:, None, :]).all(-1).sum(1)
        le = (pts[None, :, :] <= chunk[:, None, :]).all(-1).sum(1)
        vol = chunk.prod(1)
        best = max(best, float(np.max(vol - lt / n)), float(np.max(le / n - vol)))
    return best


def brute_force_expansions(basis, m, total, max_len):
    """All admissible digit strings (little-endian tuples, trailing zeros
    trimmed) whose dot product with the basis equals `total`."""
    found = []

    def rec(pos, remaining, digits, run):
        if pos == max_len:
            if remaining == 0:
                trimmed = list(digits)
                while trimmed and trimmed[-1] == 0:
                    trimmed.pop()
                found.append(tuple(trimmed))
            return
        rec(pos + 1, remaining, digits + [0], 0)
        if run < m - 1 and basis[pos] <= remaining:
            rec(pos + 1, remaining - basis[pos], digits + [1], run + 1)

    rec(0, total, [], 0)
    return found


def count_admissible_bruteforce(m: int, k: int) -> int:
    """Number of binary strings of length k without m consecutive ones,
    counted by enumerating all 2^k strings."""
    if k == 0:
        return 1
    values = np.arange(1 << k, dtype=np.uint32)
    bits = (values[:, None] >> np.arange(k)[None, :]) & 1
    run = np.zeros(len(values), dtype=np.int32)
    worst = np.zeros(len(values), dtype=np.int32)
    for j in range(k):
        run = (run + 1) * bits[:, j].astype(np.int32)
        np.maximum(worst, run, out=worst)
    return int(np.count_nonzero(worst < m))
