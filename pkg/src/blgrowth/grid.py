"""Midpoint-rule quadrature on uniform grids over a cube ``[-R, R]^n``.

The grid is split into ``parallel_chunks`` slabs along the first axis.
Each slab is summed with numpy's pairwise summation; slab totals are
reduced in slab order so results are bit-stable for a given (M, chunks)
regardless of the worker count.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, ResourceError

WORKERS_ENV = "BLGROWTH_WORKERS"
MAX_POINTS = 2 ** 28
BLOCK_POINTS = 2 ** 20

DEFAULT_M = {1: 1024, 2: 256, 3: 64, 4: 32}


@dataclass(frozen=True)
class GridSpec:
    points_per_axis: int
    parallel_chunks: int = 8

    def __post_init__(self):
        M = self.points_per_axis
        if M < 2 or M % 2:
            raise InvalidInputError(f"points_per_axis must be even and >= 2, got {M}")
        if self.parallel_chunks < 1:
            raise InvalidInputError("parallel_chunks must be >= 1")

    def halved(self) -> GridSpec:
        M = self.points_per_axis // 2
        return GridSpec(M + (M % 2), self.parallel_chunks)


def default_grid(n: int) -> GridSpec:
    return GridSpec(DEFAULT_M.get(n, 16))


def workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def check_budget(n: int, M: int, max_points: int = MAX_POINTS):
    if float(M) ** n > max_points:
        suggestion = int(max_points ** (1.0 / n))
        suggestion -= suggestion % 2
        raise ResourceError(
            f"grid of {M}^{n} points exceeds the budget of {max_points} points; "
            f"try points_per_axis <= {suggestion}",
            suggestion=suggestion,
        )


def midpoint_sum(integrand, n: int, lo: float, hi: float, grid: GridSpec) -> float:
    """Midpoint rule for ``integrand`` over ``[lo, hi]^n``.

    ``integrand`` maps an (N, n) array of points to N values.
    """
    M = grid.points_per_axis
    check_budget(n, M)
    h = (hi - lo) / M
    axis = lo + (np.arange(M) + 0.5) * h
    chunks = np.array_split(np.arange(M), min(grid.parallel_chunks, M))
    rest = M ** (n - 1)
    rows_per_block = max(1, BLOCK_POINTS // max(rest, 1))

    def chunk_sum(rows):
        total = 0.0
        for start in range(0, len(rows), rows_per_block):
            sel = axis[rows[start:start + rows_per_block]]
            mesh = np.meshgrid(sel, *([axis] * (n - 1)), indexing="ij")
            pts = np.stack([g.ravel() for g in mesh], axis=1)
            total += float(np.sum(integrand(pts)))
        return total

    nworkers = workers()
    if nworkers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(nworkers) as pool:
            partial = list(pool.map(chunk_sum, chunks))
    else:
        partial = [chunk_sum(c) for c in chunks]
    total = 0.0
    for s in partial:
        total += s
    return total * h ** n
