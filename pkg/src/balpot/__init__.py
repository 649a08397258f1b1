"""Weighted equilibrium measures of perturbed Gaussian potentials via partial balayage."""

from balpot.errors import (
    BalpotError,
    EmptySupport,
    MassNotNegative,
    NegativeDensity,
    NotConverged,
    QInfinite,
    RadiusTooSmall,
    SupportOutsideGrid,
    WrongCase,
)
from balpot.grid import Grid, ScalarField
from balpot.measures import (
    GridDensity,
    PointMass,
    SignedMeasureSpec,
    UniformCircle,
    UniformDisk,
    rasterize,
    support_bounding_radius,
    total_mass,
)
from balpot.extension import BackgroundPotential, TExtension, build_extension, min_radius
from balpot.solver import SolveResult, bal_general, recover_measure, sandpile_oracle, solve_obstacle
from balpot.pipeline import PipelineResult, SolverSettings, solve_equilibrium
from balpot.verify import (
    VerificationReport,
    annulus_reference,
    compare_to_reference,
    euler_lagrange_check,
    extract_support,
    robin_from_energy,
    verify,
)

__version__ = "0.1.0"
