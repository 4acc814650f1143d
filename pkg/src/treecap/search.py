"""Shared derivative-free search primitives: simplex grids, unit mass
moves, canonical profile seeds, and the search budget.

Grids enumerate compositions of the resolution denominator over the
cells, so every grid point is exactly representable and runs are
reproducible bit-for-bit given the seed.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

__all__ = ["Budget", "simplex_grid", "pairwise_moves", "composition_count"]


@dataclass(frozen=True)
class Budget:
    """Search effort knobs.  ``grid_resolution`` is the denominator m of
    the 1/m simplex step; ``u_cap`` / ``yhat_cap`` bound the auxiliary
    alphabet sizes (None picks |X|+1 and |Y|+1, the full cardinality
    bounds stay available by passing larger caps)."""

    grid_resolution: int = 16
    ascent_sweeps: int = 3
    restarts: int = 4
    seed: int = 0
    u_cap: int | None = None
    yhat_cap: int | None = None
    grid_point_cap: int = 40_000

    def __post_init__(self):
        if self.grid_resolution < 2:
            raise ValueError("grid_resolution must be >= 2")
        if self.ascent_sweeps < 1 or self.restarts < 1:
            raise ValueError("ascent_sweeps and restarts must be >= 1")

    def u_size(self, x: int) -> int:
        cap = self.u_cap if self.u_cap is not None else x + 1
        return max(1, min(x + 4, cap))

    def yhat_size(self, u: int, y: int) -> int:
        cap = self.yhat_cap if self.yhat_cap is not None else y + 1
        return max(1, min(u * y + 2, cap))

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


def composition_count(m: int, cells: int) -> int:
    return math.comb(m + cells - 1, cells - 1)


def simplex_grid(cells: int, m: int, cap: int | None = None, rng=None) -> np.ndarray:
    """All distributions with entries on the 1/m grid, as a (P, cells)
    array in lexicographic order.  When the full grid exceeds ``cap``,
    returns ``cap`` points sampled without enumeration (seeded)."""
    total = composition_count(m, cells)
    if cap is not None and total > cap:
        if rng is None:
            raise ValueError(f"grid of {total} points exceeds cap {cap} and no rng given")
        # random compositions via stars-and-bars draws
        bars = np.sort(rng.integers(0, m + 1, size=(cap, cells - 1)), axis=1)
        left = np.concatenate([np.zeros((cap, 1), dtype=int), bars], axis=1)
        right = np.concatenate([bars, np.full((cap, 1), m, dtype=int)], axis=1)
        return (right - left) / m
    out = np.empty((total, cells))
    for i, bars in enumerate(itertools.combinations(range(m + cells - 1), cells - 1)):
        prev = -1
        for j, b in enumerate(bars):
            out[i, j] = b - prev - 1
            prev = b
        out[i, cells - 1] = m + cells - 2 - prev
    return out / m


def pairwise_moves(vec: np.ndarray, m: int) -> np.ndarray:
    """All probability vectors reachable from ``vec`` by moving 1/m of
    mass between one coordinate pair; excludes ``vec`` itself."""
    step = 1.0 / m
    flat = vec.reshape(-1)
    n = flat.shape[0]
    out = []
    for j in range(n):
        if flat[j] < step - 1e-12:
            continue
        for i in range(n):
            if i == j:
                continue
            cand = flat.copy()
            cand[j] -= step
            cand[i] += step
            out.append(cand)
    if not out:
        return np.empty((0, n))
    return np.array(out)
