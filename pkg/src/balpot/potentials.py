"""Logarithmic potentials U^mu(z) = int log(1/|z - w|) dmu(w) and energies.

Closed forms are used for point, disk and circle atoms.  Grid fields are
summed cell by cell; a cell's contribution to its own centre is replaced by
the value for an equal-area uniform disk, mass * (log(1/a) + 1/4) with
a = h / sqrt(pi).
"""

from __future__ import annotations

import math

import numpy as np
from scipy.signal import fftconvolve

from balpot.errors import QInfinite
from balpot.grid import ScalarField
from balpot.measures import GridDensity, PointMass, SignedMeasureSpec, UniformCircle, UniformDisk

_CHUNK = 1 << 22


def potential_point(a, mass, z):
    """mass * log(1/|z - a|); +inf (or -inf for negative mass) at z == a."""
    w = np.abs(np.asarray(z, dtype=complex) - a)
    with np.errstate(divide="ignore"):
        out = -mass * np.log(w)
    return out if out.ndim else float(out)


def potential_uniform_disk(center, radius, density, z):
    w2 = np.abs(np.asarray(z, dtype=complex) - center) ** 2
    r2 = radius * radius
    inner = -0.5 * np.pi * w2 + 0.5 * np.pi * r2 * (math.log(1.0 / r2) + 1.0)
    with np.errstate(divide="ignore"):
        outer = -0.5 * np.pi * r2 * np.log(np.maximum(w2, r2))
    out = density * np.where(w2 <= r2, inner, outer)
    return out if out.ndim else float(out)


def potential_uniform_circle(center, radius, total_mass, z):
    w = np.abs(np.asarray(z, dtype=complex) - center)
    out = -total_mass * np.log(np.maximum(w, radius))
    return out if out.ndim else float(out)


def potential_of_atom(atom, z):
    if isinstance(atom, PointMass):
        return potential_point(atom.location, atom.mass, z)
    if isinstance(atom, UniformDisk):
        return potential_uniform_disk(atom.center, atom.radius, atom.density, z)
    if isinstance(atom, UniformCircle):
        return potential_uniform_circle(atom.center, atom.radius, atom.total_mass, z)
    if isinstance(atom, GridDensity):
        return potential_of_field(ScalarField(atom.grid, atom.values), z)
    raise TypeError(f"unknown atom type {type(atom).__name__}")


def potential_of_spec(spec: SignedMeasureSpec, z):
    z = np.asarray(z, dtype=complex)
    out = np.zeros(z.shape)
    for sign, atom in spec.atoms:
        out = out + sign * np.asarray(potential_of_atom(atom, z))
    return out if out.ndim else float(out)


def self_cell_coefficient(h: float) -> float:
    """Mean potential of a unit-mass uniform disk with the area of one cell, over itself."""
    a = h / math.sqrt(math.pi)
    return math.log(1.0 / a) + 0.25


def potential_of_field(field: ScalarField, z):
    """Direct summation of the cell masses of ``field`` at arbitrary points ``z``."""
    grid = field.grid
    h = grid.h
    z = np.asarray(z, dtype=complex)
    flat_z = z.ravel()
    js, iis = np.nonzero(field.values)
    out = np.zeros(flat_z.shape)
    if js.size == 0:
        return out.reshape(z.shape) if z.ndim else 0.0
    c = grid.coords
    src = c[iis] + 1j * c[js]
    m = field.values[js, iis] * h**2
    self_coef = self_cell_coefficient(h)
    zi = np.floor((flat_z.real + grid.L) / h).astype(np.int64)
    zj = np.floor((flat_z.imag + grid.L) / h).astype(np.int64)
    step = max(1, _CHUNK // js.size)
    for k in range(0, flat_z.size, step):
        zz = flat_z[k : k + step]
        d = np.abs(zz[:, None] - src[None, :])
        same = (zi[k : k + step, None] == iis[None, :]) & (zj[k : k + step, None] == js[None, :])
        with np.errstate(divide="ignore"):
            kern = np.where(same, self_coef, -np.log(np.where(same, 1.0, d)))
        out[k : k + step] = kern @ m
    return out.reshape(z.shape) if z.ndim else float(out[0])


def log_kernel(grid) -> np.ndarray:
    """Kernel over cell offsets (-(n-1)..n-1)^2 used by :func:`potential_on_cells`."""
    n, h = grid.n, grid.h
    k = np.arange(-(n - 1), n)
    r = h * np.hypot(k[None, :], k[:, None])
    r[n - 1, n - 1] = 1.0
    kern = -np.log(r)
    kern[n - 1, n - 1] = self_cell_coefficient(h)
    return kern


def potential_on_cells(field: ScalarField) -> np.ndarray:
    """Potential of ``field`` at every cell centre.

    The discrete sum is a convolution with :func:`log_kernel`, evaluated by FFT.
    """
    grid = field.grid
    m = field.values * grid.h**2
    if not np.any(m):
        return np.zeros_like(m)
    return fftconvolve(m, log_kernel(grid), mode="same")


def logarithmic_energy(field: ScalarField) -> float:
    """Sum over cell pairs of m_i m_j log(1/|c_i - c_j|), with regularised self-pairs."""
    m = field.values * field.grid.h**2
    return float(np.sum(m * potential_on_cells(field)))


def weighted_energy(field: ScalarField, Q) -> float:
    """I(mu) + 2 int Q dmu for a non-negative field and background potential ``Q``."""
    if np.any(field.values < 0):
        raise ValueError("weighted energy needs a non-negative field")
    return logarithmic_energy(field) + 2.0 * integrate_Q(field, Q)


def integrate_Q(field: ScalarField, Q) -> float:
    m = field.values * field.grid.h**2
    carrying = m > 0
    if not np.any(carrying):
        return 0.0
    q = Q(field.grid.centers()[carrying])
    if not np.all(np.isfinite(q)):
        raise QInfinite("Q is infinite at a mass-carrying cell centre")
    return float(np.sum(q * m[carrying]))
