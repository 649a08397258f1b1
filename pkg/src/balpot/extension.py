"""Background potentials Q(z) = alpha|z|^2 + U^nu(z) and their disk t-extensions.

For a radius rho >= R = sqrt((t + nu(C)) / (2 alpha)) the triple
(closed disk of radius rho, sigma, c) with

    sigma = nu - (2 alpha / pi) m|D(0, rho) + (2 alpha rho^2 - t - nu(C)) * s_rho,
    c     = alpha rho^2 - (t + nu(C)) log rho,

(s_rho the unit-mass uniform measure on |z| = rho) satisfies c + U^sigma = Q
on the disk, c + U^sigma <= Q outside it, and sigma(C) = -t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from balpot.errors import RadiusTooSmall
from balpot.measures import (
    PointMass,
    SignedMeasureSpec,
    UniformCircle,
    UniformDisk,
    support_bounding_radius,
    total_mass,
)
from balpot.potentials import potential_of_spec

# relative slack when comparing rho with R and when deciding the arc atom vanishes
RADIUS_RTOL = 1e-9


@dataclass(frozen=True)
class BackgroundPotential:
    alpha: float
    nu: tuple = ()
    t: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "nu", tuple(self.nu))
        if not self.alpha > 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        if not self.t > 0:
            raise ValueError(f"t must be > 0, got {self.t}")
        for atom in self.nu:
            if not isinstance(atom, (PointMass, UniformDisk, UniformCircle)):
                raise TypeError("nu atoms must be point masses, uniform disks or uniform circles")

    @property
    def nu_spec(self) -> SignedMeasureSpec:
        return SignedMeasureSpec(self.nu, ())

    @property
    def nu_mass(self) -> float:
        return total_mass(self.nu_spec)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = self.alpha * np.abs(z) ** 2 + potential_of_spec(self.nu_spec, z)
        return out if np.ndim(out) else float(out)

    def nu_support_radius(self) -> float:
        return support_bounding_radius(self.nu_spec)


@dataclass(frozen=True)
class TExtension:
    sigma: SignedMeasureSpec
    c: float
    rho: float

    @property
    def E_prime_radius(self) -> float:
        return self.rho

    def __call__(self, z):
        """The extended potential c + U^sigma."""
        out = self.c + np.asarray(potential_of_spec(self.sigma, z))
        return out if np.ndim(out) else float(out)


def min_radius(Q: BackgroundPotential) -> float:
    return math.sqrt((Q.t + Q.nu_mass) / (2.0 * Q.alpha))


def arc_mass(Q: BackgroundPotential, rho: float) -> float:
    """Mass of the circle atom at radius rho; zero exactly when rho = R."""
    load = Q.t + Q.nu_mass
    m = 2.0 * Q.alpha * rho * rho - load
    return 0.0 if abs(m) <= RADIUS_RTOL * load else m


def build_extension(Q: BackgroundPotential, rho: float | None = None) -> TExtension:
    R = min_radius(Q)
    if rho is None:
        rho = R
    if rho < R * (1.0 - RADIUS_RTOL):
        raise RadiusTooSmall(
            f"rho = {rho:.12g} is below the minimal radius sqrt((t + nu(C))/(2 alpha)) = {R:.12g}"
        )
    disk = UniformDisk(0.0, rho, 2.0 * Q.alpha / math.pi)
    positive = list(Q.nu)
    m = arc_mass(Q, rho)
    if m > 0:
        positive.append(UniformCircle(0.0, rho, m))
    c = Q.alpha * rho * rho - (Q.t + Q.nu_mass) * math.log(rho)
    return TExtension(SignedMeasureSpec(positive, [disk]), c, rho)


def extension_gap(ext: TExtension, Q: BackgroundPotential, z):
    """Q(z) - (c + U^sigma(z)): zero on the closed disk, non-negative outside."""
    z = np.asarray(z, dtype=complex)
    with np.errstate(invalid="ignore"):
        out = np.asarray(Q(z)) - np.asarray(ext(z))
    return out if out.ndim else float(out)
