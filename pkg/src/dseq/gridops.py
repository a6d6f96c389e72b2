"""Raw array helpers shared across modules.

All reductions follow one fixed summation order -- rectangular partial sums
accumulated row-major (k outer, l inner) -- so float results are reproducible
across runs and platforms.  Exact-mode grids are numpy object arrays whose
entries support ``+``/``-``/``*``; the same slicing code serves both modes.
"""

from __future__ import annotations

import numpy as np

from .scalars import abs2, abs_value


def prefix_sums(grid: np.ndarray) -> np.ndarray:
    """s[m,n] = sum of grid[k,l] for k <= m, l <= n (l accumulated innermost)."""
    inner = np.add.accumulate(grid, axis=1)
    return np.add.accumulate(inner, axis=0)


def suffix_sums_inclusive(grid: np.ndarray) -> np.ndarray:
    """r[m,n] = sum of grid[k,l] for k >= m, l >= n (within the truncation)."""
    rev = grid[::-1, ::-1]
    return prefix_sums(rev)[::-1, ::-1]


def grid_total(grid: np.ndarray):
    return prefix_sums(grid)[-1, -1]


def diff_10(grid: np.ndarray) -> np.ndarray:
    return grid[:-1, :] - grid[1:, :]


def diff_01(grid: np.ndarray) -> np.ndarray:
    return grid[:, :-1] - grid[:, 1:]


def diff_11(grid: np.ndarray) -> np.ndarray:
    return grid[:-1, :-1] - grid[1:, :-1] - grid[:-1, 1:] + grid[1:, 1:]


def abs_grid(grid: np.ndarray) -> np.ndarray:
    """Float grid of moduli (for protocol comparisons)."""
    if grid.dtype == object:
        out = np.empty(grid.shape, dtype=float)
        for idx, v in np.ndenumerate(grid):
            out[idx] = float(abs_value(v))
        return out
    return np.abs(grid).astype(float)


def max_abs_index(grid: np.ndarray):
    """(k, l) of the entry with maximal modulus (exact comparison in exact mode)."""
    if grid.dtype == object:
        best, best_idx = None, (0, 0)
        for idx, v in np.ndenumerate(grid):
            a = abs2(v)
            if best is None or a > best:
                best, best_idx = a, idx
        return (int(best_idx[0]), int(best_idx[1]))
    flat = int(np.argmax(np.abs(grid)))
    k, l = np.unravel_index(flat, grid.shape)
    return (int(k), int(l))


def max_abs_value(grid: np.ndarray):
    """Maximal modulus over the grid; Fraction when exactly representable."""
    k, l = max_abs_index(grid)
    return abs_value(grid[k, l])


def sum_abs(grid: np.ndarray):
    """Sum of moduli in the fixed order; exact when all moduli are exact."""
    if grid.dtype == object:
        total = 0
        for row in grid:
            row_total = 0
            for v in row:
                row_total = row_total + abs_value(v)
            total = total + row_total
        return total
    return float(np.add.reduce(np.add.reduce(np.abs(grid), axis=1), axis=0))


def corner_suffix_max(dev: np.ndarray) -> np.ndarray:
    """sm[m,n] = max of dev over {k >= m, l >= n} for a float grid."""
    rev = dev[::-1, ::-1]
    acc = np.maximum.accumulate(np.maximum.accumulate(rev, axis=1), axis=0)
    return acc[::-1, ::-1]
