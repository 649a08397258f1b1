"""Build -> rasterize -> solve, enlarging the grid when the far field is cut off."""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

from balpot.extension import BackgroundPotential, TExtension, build_extension, min_radius
from balpot.grid import Grid, ScalarField
from balpot.measures import PointMass, rasterize
from balpot.solver import DEFAULT_BAND_TOL, DEFAULT_OMEGA, DEFAULT_TOL, SolveResult, solve_obstacle

log = logging.getLogger(__name__)

MAX_ENLARGEMENTS = 3


@dataclass(frozen=True)
class SolverSettings:
    omega: float = DEFAULT_OMEGA
    tol: float = DEFAULT_TOL
    max_iter: int | None = None
    band_cells: int = 2
    band_tol: float = DEFAULT_BAND_TOL
    auto_enlarge: bool = True


@dataclass(frozen=True, eq=False)
class PipelineResult:
    Q: BackgroundPotential
    ext: TExtension
    grid: Grid
    sigma: ScalarField
    solve: SolveResult
    enlargements: int = 0

    @property
    def grid_Q(self) -> BackgroundPotential:
        return snap_point_masses(self.Q, self.grid)

    @property
    def u(self) -> ScalarField:
        return self.solve.u

    @property
    def mu(self) -> ScalarField:
        return self.solve.mu


def snap_point_masses(Q: BackgroundPotential, grid: Grid) -> BackgroundPotential:
    """Q with every point mass of nu moved to the centre of its grid cell.

    Rasterization puts a point mass at its cell, so this is the background
    potential whose equilibrium the grid problem actually approximates.
    """
    nu = tuple(
        replace(a, location=grid.cell_center(a.location)) if isinstance(a, PointMass) else a
        for a in Q.nu
    )
    return replace(Q, nu=nu)


def default_half_width(Q: BackgroundPotential, rho: float) -> float:
    return 1.5 * max(rho, Q.nu_support_radius())


def solve_equilibrium(
    Q: BackgroundPotential,
    rho: float | None = None,
    n: int = 256,
    L: float | None = None,
    settings: SolverSettings = SolverSettings(),
) -> PipelineResult:
    """Equilibrium measure of mass Q.t for ``Q`` on an n x n grid.

    When the odometer is not flat on the outer band and ``auto_enlarge`` is
    set, L is doubled (at fixed n) up to three times; the last attempt is
    returned whether or not it was certified.
    """
    if rho is None:
        rho = min_radius(Q)
    ext = build_extension(Q, rho)
    if L is None:
        L = default_half_width(Q, rho)

    enlargements = 0
    while True:
        grid = Grid(n, L)
        sigma = rasterize(ext.sigma, grid)
        res = solve_obstacle(
            sigma,
            omega=settings.omega,
            tol=settings.tol,
            max_iter=settings.max_iter,
            band_cells=settings.band_cells,
            band_tol=settings.band_tol,
        )
        if res.band_certified or not settings.auto_enlarge or enlargements == MAX_ENLARGEMENTS:
            if not res.band_certified:
                log.warning("far field not flat on L=%.6g (band oscillation %.3g)", L, res.boundary_band_max)
            return PipelineResult(Q, ext, grid, sigma, res, enlargements)
        enlargements += 1
        log.warning(
            "band oscillation %.3g on L=%.6g; enlarging to L=%.6g", res.boundary_band_max, L, 2 * L
        )
        L *= 2
