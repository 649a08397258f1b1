"""Uniform square lattice centred at the origin, and fields living on it."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Grid:
    """``n`` x ``n`` cells covering [-L, L]^2.

    Arrays on the grid are indexed ``values[j, i]`` with ``j`` the y-index and
    ``i`` the x-index; cell (i, j) has centre (-L + (i+1/2)h, -L + (j+1/2)h).
    """

    n: int
    L: float

    def __post_init__(self):
        if self.n < 32 or self.n % 2:
            raise ValueError(f"grid size must be even and >= 32, got {self.n}")
        if not self.L > 0:
            raise ValueError(f"half-width must be positive, got {self.L}")

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.n

    @property
    def coords(self) -> np.ndarray:
        """1-d array of cell-centre coordinates along either axis."""
        return -self.L + (np.arange(self.n) + 0.5) * self.h

    def centers(self) -> np.ndarray:
        """Complex array (n, n) of cell centres."""
        x = self.coords
        return x[None, :] + 1j * x[:, None]

    def cell_index(self, z: complex) -> tuple[int, int]:
        """(j, i) of the cell containing z (half-open cells)."""
        i = int(np.floor((z.real + self.L) / self.h))
        j = int(np.floor((z.imag + self.L) / self.h))
        if not (0 <= i < self.n and 0 <= j < self.n):
            raise IndexError(f"{z} lies outside the grid")
        return j, i

    def cell_center(self, z: complex) -> complex:
        j, i = self.cell_index(z)
        return complex(-self.L + (i + 0.5) * self.h, -self.L + (j + 0.5) * self.h)

    def zeros(self) -> np.ndarray:
        return np.zeros((self.n, self.n))

    def distance_to_edge(self) -> np.ndarray:
        """Number of cell layers between each cell and the outer boundary (0 on the rim)."""
        k = np.arange(self.n)
        d = np.minimum(k, self.n - 1 - k)
        return np.minimum(d[:, None], d[None, :])


@dataclass(frozen=True, eq=False)
class ScalarField:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (self.grid.n, self.grid.n):
            raise ValueError(f"field shape {self.values.shape} does not match grid n={self.grid.n}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field has non-finite entries")

    @property
    def h(self) -> float:
        return self.grid.h

    def cell_masses(self) -> np.ndarray:
        return self.values * self.grid.h**2

    def total(self) -> float:
        return float(np.sum(self.values) * self.grid.h**2)

    def __add__(self, other: ScalarField) -> ScalarField:
        _same_grid(self, other)
        return ScalarField(self.grid, self.values + other.values)

    def __sub__(self, other: ScalarField) -> ScalarField:
        _same_grid(self, other)
        return ScalarField(self.grid, self.values - other.values)

    def __neg__(self) -> ScalarField:
        return ScalarField(self.grid, -self.values)

    def scaled(self, factor: float) -> ScalarField:
        return ScalarField(self.grid, factor * self.values)

    def positive_part(self) -> ScalarField:
        return ScalarField(self.grid, np.maximum(self.values, 0.0))

    def negative_part(self) -> ScalarField:
        return ScalarField(self.grid, np.maximum(-self.values, 0.0))


def _same_grid(a: ScalarField, b: ScalarField) -> None:
    if a.grid != b.grid:
        raise ValueError("fields live on different grids")
