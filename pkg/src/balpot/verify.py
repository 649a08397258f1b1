"""Checks that a recovered measure is the weighted equilibrium measure.

The measure mu of mass t is the equilibrium measure exactly when
phi = U^mu + Q is constant (= F, the modified Robin constant) on its support
and at least F everywhere else.  The same F follows from the energy,
F = (I(mu) + int Q dmu) / t.  For a single point mass nu = beta delta_a whose
hole fits inside the disk, the answer is known in closed form: uniform density
2 alpha / pi on D(0, R) minus D(a, r).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import ndimage

from balpot.errors import EmptySupport, WrongCase
from balpot.extension import BackgroundPotential
from balpot.grid import Grid, ScalarField
from balpot.potentials import integrate_Q, logarithmic_energy, potential_on_cells
from balpot.solver import complementarity_residual

DEFAULT_THRESHOLD = 0.5
# probes keep this many cells away from the free boundary
PROBE_MARGIN = 2
INVARIANT_TOL = 1e-8


@dataclass(frozen=True)
class EulerLagrange:
    F_estimate: float
    on_support_std: float
    off_support_min_gap: float
    used_median: bool = False


@dataclass(frozen=True)
class ReferenceErrors:
    density_max_err: float
    support_symmdiff_area: float
    odometer_max_err: float | None = None


@dataclass(frozen=True)
class VerificationReport:
    mass_error: float
    F_estimate: float
    F_from_energy: float
    on_support_std: float
    off_support_min_gap: float
    bounds_violation: float
    support_area: float
    support_leak: float
    complementarity_residual: float
    used_median: bool = False
    reference_errors: ReferenceErrors | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def extract_support(mu: ScalarField, threshold_fraction: float = DEFAULT_THRESHOLD) -> np.ndarray:
    if not 0 < threshold_fraction < 1:
        raise ValueError("threshold fraction must lie in (0, 1)")
    top = float(mu.values.max())
    if not top > 0:
        raise EmptySupport("measure vanishes on the whole grid")
    return mu.values >= threshold_fraction * top


def _erode(mask, cells):
    # cells outside the grid count as outside the mask
    return ndimage.binary_erosion(mask, iterations=cells, border_value=0)


def euler_lagrange_check(
    mu: ScalarField,
    Q: BackgroundPotential,
    mask: np.ndarray,
    tol: float = 1e-2,
) -> EulerLagrange:
    """phi = U^mu + Q on mask cells >= 2 cells inside the support, and off it.

    Off-support probes are all cells at least two cells away from the mask.
    If the on-support spread exceeds 10 * tol * (1 + |F|), F is taken as the
    median instead of the mean and the result is flagged.
    """
    if not np.any(mask):
        raise EmptySupport("empty support mask")
    phi = potential_on_cells(mu)
    centers = mu.grid.centers()
    inner = _erode(mask, PROBE_MARGIN)
    if not np.any(inner):
        inner = mask
    with np.errstate(divide="ignore"):
        on = phi[inner] + Q(centers[inner])
    F = float(np.mean(on))
    spread = float(np.std(on))
    used_median = spread > 10 * tol * (1 + abs(F))
    if used_median:
        F = float(np.median(on))

    outer = ~ndimage.binary_dilation(mask, iterations=PROBE_MARGIN)
    if np.any(outer):
        with np.errstate(divide="ignore"):
            off = phi[outer] + Q(centers[outer])
        gap = float(np.min(off - F))
    else:
        gap = math.inf
    return EulerLagrange(F, spread, gap, used_median)


def robin_from_energy(mu: ScalarField, Q: BackgroundPotential, floor: float = INVARIANT_TOL) -> float:
    """F = (V - int Q dmu) / t with V = I(mu) + 2 int Q dmu.

    Cell densities at or below ``floor`` are solver noise and are dropped, so
    a point mass of nu sitting in an emptied cell does not make Q infinite.
    """
    clean = ScalarField(mu.grid, np.where(mu.values > floor, mu.values, 0.0))
    return (logarithmic_energy(clean) + integrate_Q(clean, Q)) / Q.t


@dataclass(frozen=True)
class AnnulusReference:
    """Equilibrium data for Q = alpha|z|^2 + beta log(1/|z - a|) at mass t."""

    alpha: float
    beta: float
    a: complex
    t: float

    @property
    def R(self) -> float:
        return math.sqrt((self.t + self.beta) / (2 * self.alpha))

    @property
    def r(self) -> float:
        return math.sqrt(self.beta / (2 * self.alpha))

    @property
    def density(self) -> float:
        return 2 * self.alpha / math.pi

    @property
    def case_i(self) -> bool:
        return abs(self.a) + self.r <= self.R

    def in_support(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return (np.abs(z) <= self.R) & (np.abs(z - self.a) >= self.r)

    def odometer(self, z, rho: float | None = None):
        """Continuum odometer of the disk extension with radius rho (default R).

        Inside the hole it is beta log(r/|z-a|) + alpha(|z-a|^2 - r^2); it
        vanishes on the annulus, and for R < |z| it grows radially up to
        |z| = rho and stays constant beyond.
        """
        rho = self.R if rho is None else rho
        z = np.asarray(z, dtype=complex)
        w = np.abs(z - self.a)
        out = np.zeros(z.shape)
        hole = w < self.r
        if self.beta > 0:
            wh = w[hole]
            with np.errstate(divide="ignore"):
                out[hole] = self.beta * np.log(self.r / wh) + self.alpha * (wh**2 - self.r**2)
        s = np.minimum(np.abs(z), rho)
        far = s > self.R
        R2 = self.R**2
        out[far] = self.alpha * (s[far] ** 2 - R2) - 2 * self.alpha * R2 * np.log(s[far] / self.R)
        return out if out.ndim else float(out)


def annulus_reference(alpha: float, beta: float, a: complex, t: float) -> AnnulusReference:
    if not (alpha > 0 and t > 0 and beta >= 0):
        raise ValueError("need alpha > 0, t > 0 and beta >= 0")
    return AnnulusReference(alpha, beta, complex(a), t)


def compare_to_reference(
    mu: ScalarField,
    ref: AnnulusReference,
    u: ScalarField | None = None,
    rho: float | None = None,
) -> ReferenceErrors:
    """Errors of a grid solution against the closed-form case.

    The point mass of the discrete problem sits at the centre of its cell, so
    the reference is centred there too.  The odometer is compared outside
    |z - a| < r/4, where the log singularity is not resolved.
    """
    if not ref.case_i:
        raise WrongCase(
            f"hole D({ref.a}, {ref.r:.6g}) is not inside D(0, {ref.R:.6g}); no closed form"
        )
    grid = mu.grid
    h = grid.h
    a = grid.cell_center(ref.a) if ref.beta > 0 else ref.a
    ref = AnnulusReference(ref.alpha, ref.beta, a, ref.t)
    z = grid.centers()
    d0, da = np.abs(z), np.abs(z - a)

    core = (d0 <= ref.R - PROBE_MARGIN * h) & (da >= ref.r + PROBE_MARGIN * h)
    density_err = float(np.max(np.abs(mu.values[core] - ref.density))) if np.any(core) else math.nan

    mask = extract_support(mu)
    symmdiff = float(np.count_nonzero(mask ^ ref.in_support(z))) * h * h

    odo = None
    if u is not None:
        keep = da >= ref.r / 4
        odo = float(np.max(np.abs(u.values[keep] - ref.odometer(z[keep], rho))))
    return ReferenceErrors(density_err, symmdiff, odo)


def bounds_violation(mu: ScalarField, sigma: ScalarField) -> float:
    """How far mu leaves [0, sigma_-] on any cell (0 when it does not)."""
    neg = np.maximum(-sigma.values, 0.0)
    return float(max(0.0, -mu.values.min(), np.max(mu.values - neg)))


def support_leak(mu: ScalarField, sigma: ScalarField, tol: float = INVARIANT_TOL) -> float:
    """Largest mu on cells more than one cell away from {sigma < 0}."""
    near = ndimage.binary_dilation(sigma.values < 0, structure=np.ones((3, 3), bool))
    far = mu.values[~near]
    return max(0.0, float(far.max())) if far.size else 0.0


def disk_leak(mu: ScalarField, radius: float) -> float:
    """Largest mu on cells whose centre is farther than one cell diagonal from D(0, radius)."""
    grid: Grid = mu.grid
    far = np.abs(grid.centers()) > radius + math.sqrt(2.0) * grid.h
    return max(0.0, float(mu.values[far].max())) if np.any(far) else 0.0


def verify(
    mu: ScalarField,
    sigma: ScalarField,
    u: ScalarField,
    Q: BackgroundPotential,
    reference: AnnulusReference | None = None,
    rho: float | None = None,
    tol: float = 1e-2,
) -> VerificationReport:
    mask = extract_support(mu)
    el = euler_lagrange_check(mu, Q, mask, tol)
    ref_errors = compare_to_reference(mu, reference, u, rho) if reference is not None else None
    return VerificationReport(
        mass_error=abs(mu.total() - Q.t),
        F_estimate=el.F_estimate,
        F_from_energy=robin_from_energy(mu, Q),
        on_support_std=el.on_support_std,
        off_support_min_gap=el.off_support_min_gap,
        bounds_violation=bounds_violation(mu, sigma),
        support_area=float(np.count_nonzero(mask)) * mu.grid.h**2,
        support_leak=support_leak(mu, sigma),
        complementarity_residual=complementarity_residual(sigma, u),
        used_median=el.used_median,
        reference_errors=ref_errors,
    )


@dataclass(frozen=True)
class Tolerances:
    mass: float = 1e-6
    invariant: float = INVARIANT_TOL
    std_rel: float = 1e-2
    gap: float = -1e-3
    robin: float = 5e-2
    density_rel: float = 0.03


def failures(report: VerificationReport, tol: Tolerances = Tolerances(), h: float | None = None,
             ref: AnnulusReference | None = None) -> list[str]:
    """Names of the checks that ``report`` does not pass."""
    out = []
    if report.mass_error > tol.mass:
        out.append("mass_error")
    if report.bounds_violation > tol.invariant:
        out.append("bounds_violation")
    if report.support_leak > tol.invariant:
        out.append("support_leak")
    if report.complementarity_residual > tol.invariant:
        out.append("complementarity_residual")
    if report.on_support_std > tol.std_rel * (1 + abs(report.F_estimate)):
        out.append("on_support_std")
    if report.off_support_min_gap < tol.gap:
        out.append("off_support_min_gap")
    if abs(report.F_estimate - report.F_from_energy) > tol.robin:
        out.append("robin_agreement")
    re = report.reference_errors
    if re is not None and ref is not None:
        if not re.density_max_err <= tol.density_rel * ref.density:
            out.append("density_max_err")
        if h is not None and re.support_symmdiff_area > 2 * h * 2 * math.pi * (ref.R + ref.r):
            out.append("support_symmdiff_area")
    return out
