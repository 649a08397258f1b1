"""Partial balayage Bal(sigma, 0) on a truncated grid.

The odometer u is the smallest non-negative grid function with
-Delta_h u / 2pi >= sigma, where Delta_h is the 5-point Laplacian with
reflecting (zero-flux) grid edges.  It solves the linear complementarity
problem

    u >= 0,   w = -Delta_h u / 2pi - sigma >= 0,   u * w = 0,

and then Bal(sigma, 0) = sigma + Delta_h u / 2pi.  Two independent monotone
schemes are provided: red-black projected SOR (:func:`solve_obstacle`) and a
divisible sandpile (:func:`sandpile_oracle`).

Reflecting edges keep mass exact: the Laplacian sums to zero over the grid, so
the recovered measure always has mass -sigma(grid).  The continuum odometer
tends to a constant at infinity, which need not be zero (it is positive when
the disk of the extension is larger than necessary, or when mass of sigma sits
outside that disk).  A zero-value edge would wrongly absorb mass in those
cases.  What the truncation can still get wrong is a far field that has not
flattened out yet, which :func:`boundary_band_check` measures.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from balpot.errors import MassNotNegative, NegativeDensity, NotConverged
from balpot.grid import ScalarField

log = logging.getLogger(__name__)

DEFAULT_OMEGA = 1.8
DEFAULT_TOL = 1e-13
# relative flatness demanded of u on the outer band
DEFAULT_BAND_TOL = 1e-2
# recovered densities in [-CLAMP_FACTOR * tol, 0) are rounded up to zero
CLAMP_FACTOR = 10.0


@dataclass(frozen=True, eq=False)
class SolveResult:
    u: ScalarField
    mu: ScalarField
    iterations: int
    residual: float
    boundary_band_max: float
    converged: bool = True
    band_certified: bool = True


class BandCertificate(NamedTuple):
    band_max: float
    certified: bool


def laplacian(u: np.ndarray, h: float) -> np.ndarray:
    """5-point Laplacian with reflecting (zero normal derivative) grid edges."""
    p = np.pad(u, 1, mode="edge")
    return (p[:-2, 1:-1] + p[2:, 1:-1] + p[1:-1, :-2] + p[1:-1, 2:] - 4.0 * u) / (h * h)


def _check_mass(sigma: ScalarField) -> None:
    m = sigma.total()
    if not m < 0:
        raise MassNotNegative(f"total mass of sigma must be negative, got {m:.6g}")


def _sublattice(n, pj, pi):
    # slices into the ghost-padded (n+2, n+2) array; grid index k sits at k + 1
    def axis(p):
        s = 2 if p else 1
        return slice(s, n + 1, 2), slice(s - 1, n, 2), slice(s + 1, n + 2, 2)

    r, r_lo, r_hi = axis(pj)
    c, c_lo, c_hi = axis(pi)
    return r, c, r_lo, r_hi, c_lo, c_hi


_COLOURS = (((0, 0), (1, 1)), ((0, 1), (1, 0)))


def _reflect(p: np.ndarray) -> None:
    p[0, 1:-1] = p[1, 1:-1]
    p[-1, 1:-1] = p[-2, 1:-1]
    p[1:-1, 0] = p[1:-1, 1]
    p[1:-1, -1] = p[1:-1, -2]


def solve_obstacle(
    sigma: ScalarField,
    omega: float = DEFAULT_OMEGA,
    tol: float = DEFAULT_TOL,
    max_iter: int | None = None,
    band_cells: int = 2,
    band_tol: float = DEFAULT_BAND_TOL,
) -> SolveResult:
    """Projected SOR for the odometer of ``sigma``, starting from u = 0.

    Cells are swept red then black (fixed order), each update being
    u <- max(0, u + omega * ((sum of 4 neighbours + 2 pi h^2 sigma) / 4 - u)),
    where a neighbour across the grid edge is the cell itself.  Stops once the
    largest update of a sweep is below tol * max(1, max u).
    """
    _check_mass(sigma)
    if not 1.0 <= omega < 2.0:
        raise ValueError(f"relaxation factor must lie in [1, 2), got {omega}")
    grid = sigma.grid
    n, h = grid.n, grid.h
    if max_iter is None:
        max_iter = 200 * n

    f = np.zeros((n + 2, n + 2))
    f[1:-1, 1:-1] = 2.0 * math.pi * h * h * sigma.values
    p = np.zeros((n + 2, n + 2))
    colours = []
    for colour in _COLOURS:
        blocks = []
        for pj, pi in colour:
            r, c, r_lo, r_hi, c_lo, c_hi = _sublattice(n, pj, pi)
            blocks.append((r, c, r_lo, r_hi, c_lo, c_hi, f[r, c].copy()))
        colours.append(blocks)

    for it in range(1, max_iter + 1):
        delta = 0.0
        for blocks in colours:
            _reflect(p)
            for r, c, r_lo, r_hi, c_lo, c_hi, fb in blocks:
                old = p[r, c]
                gs = p[r_lo, c] + p[r_hi, c]
                gs += p[r, c_lo]
                gs += p[r, c_hi]
                gs += fb
                gs *= 0.25
                gs -= old
                gs *= omega
                gs += old
                np.maximum(gs, 0.0, out=gs)
                d = float(np.max(np.abs(gs - old)))
                if d > delta:
                    delta = d
                p[r, c] = gs
        if delta < tol * max(1.0, float(p.max())):
            break
    else:
        raise NotConverged(max_iter)

    u = ScalarField(grid, p[1:-1, 1:-1].copy())
    scale = max(1.0, float(u.values.max()))
    mu = recover_measure(sigma, u, tol=CLAMP_FACTOR * tol * scale / h**2)
    band = boundary_band_check(u, band_cells, band_tol)
    log.debug("solve n=%d: %d sweeps, band oscillation %.3g", n, it, band.band_max)
    return SolveResult(
        u=u,
        mu=mu,
        iterations=it,
        residual=complementarity_residual(sigma, u),
        boundary_band_max=band.band_max,
        band_certified=band.certified,
    )


def complementarity_residual(sigma: ScalarField, u: ScalarField) -> float:
    """max over cells of |min(u, -Delta_h u / 2pi - sigma)|."""
    w = -laplacian(u.values, u.h) / (2.0 * math.pi) - sigma.values
    return float(np.max(np.abs(np.minimum(u.values, w))))


def sandpile_oracle(
    sigma: ScalarField, tol: float = 1e-11, max_rounds: int | None = None
) -> ScalarField:
    """Odometer from divisible-sandpile toppling.

    Cell masses start at max(sigma, 0) h^2 against capacities max(-sigma, 0) h^2.
    In each round every cell above capacity keeps its capacity and sends the
    excess to its four neighbours in equal parts; a share aimed across the grid
    edge bounces back into the sender.  Emitted mass v accumulates per cell
    and u = pi v / 2.  Runs until the total excess drops below ``tol`` (mass
    units; with O(1) total mass rounding stalls the excess near 1e-13).
    """
    _check_mass(sigma)
    grid = sigma.grid
    n, h2 = grid.n, grid.h**2
    if max_rounds is None:
        max_rounds = 5000 * n
    mass = np.maximum(sigma.values, 0.0) * h2
    cap = np.maximum(-sigma.values, 0.0) * h2
    v = np.zeros((n, n))
    excess = np.empty((n, n))
    for _ in range(max_rounds):
        np.subtract(mass, cap, out=excess)
        np.maximum(excess, 0.0, out=excess)
        if float(excess.sum()) < tol:
            break
        mass -= excess
        v += excess
        excess *= 0.25
        mass[1:, :] += excess[:-1, :]
        mass[:-1, :] += excess[1:, :]
        mass[:, 1:] += excess[:, :-1]
        mass[:, :-1] += excess[:, 1:]
        mass[0, :] += excess[0, :]
        mass[-1, :] += excess[-1, :]
        mass[:, 0] += excess[:, 0]
        mass[:, -1] += excess[:, -1]
    else:
        raise NotConverged(max_rounds, "sandpile did not stabilise")
    return ScalarField(grid, 0.5 * math.pi * v)


def recover_measure(sigma: ScalarField, u: ScalarField, tol: float = 1e-8) -> ScalarField:
    """mu = -sigma - Delta_h u / 2pi, i.e. mu = -Bal(sigma, 0).

    Values in [-tol, 0) are set to zero; anything more negative means the
    odometer was not converged.
    """
    mu = -sigma.values - laplacian(u.values, u.h) / (2.0 * math.pi)
    worst = float(mu.min())
    if worst < -tol:
        raise NegativeDensity(f"recovered density reaches {worst:.3g} (< -{tol:.3g})")
    mu[mu < 0] = 0.0
    return ScalarField(sigma.grid, mu)


def bal_general(
    mu: ScalarField,
    lam: ScalarField,
    tol: float = DEFAULT_TOL,
    max_iter: int | None = None,
    omega: float = DEFAULT_OMEGA,
) -> ScalarField:
    """Bal(mu, lambda) = Bal(mu - lambda, 0) + lambda."""
    diff = mu - lam
    res = solve_obstacle(diff, omega=omega, tol=tol, max_iter=max_iter)
    return lam - res.mu


def boundary_band_check(
    u: ScalarField, band_cells: int = 2, tol: float = DEFAULT_BAND_TOL
) -> BandCertificate:
    """Oscillation max - min of u over the outer ``band_cells`` layers.

    The far field of the odometer is flat (zero when the contact set reaches
    around the whole support, a positive constant otherwise).  A band whose
    oscillation exceeds tol * max(1, max u) means the grid is too small to
    contain the free boundary's influence, and L should be enlarged.
    """
    if band_cells < 2:
        raise ValueError("band must be at least two cells wide")
    band = u.grid.distance_to_edge() < band_cells
    vals = u.values[band]
    osc = float(vals.max() - vals.min())
    return BandCertificate(osc, osc <= tol * max(1.0, float(u.values.max())))
