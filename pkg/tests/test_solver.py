import math

import numpy as np
import pytest

from balpot import (
    Grid,
    MassNotNegative,
    NegativeDensity,
    NotConverged,
    PointMass,
    ScalarField,
    SignedMeasureSpec,
    UniformDisk,
    bal_general,
    build_extension,
    rasterize,
    recover_measure,
    sandpile_oracle,
    solve_obstacle,
)
from balpot.pipeline import SolverSettings, solve_equilibrium
from balpot.solver import boundary_band_check, complementarity_residual, laplacian
from balpot.verify import annulus_reference

SQRT2 = math.sqrt(2)


@pytest.fixture(scope="module")
def case_i_256(annulus_Q):
    g = Grid(256, 2.0)
    sigma = rasterize(build_extension(annulus_Q, SQRT2).sigma, g)
    return sigma, solve_obstacle(sigma, omega=1.9)


def _sigma(spec, n, L):
    return rasterize(spec, Grid(n, L))


def test_nonpositive_sigma_gives_zero_odometer():
    s = _sigma(SignedMeasureSpec([], [UniformDisk(0.1, 0.8, 0.5)]), 64, 1.0)
    res = solve_obstacle(s)
    assert not np.any(res.u.values)
    assert np.array_equal(res.mu.values, -s.values)
    assert np.array_equal(recover_measure(s, res.u).values, -s.values)


def test_case_i_odometer_value(case_i_256):
    sigma, res = case_i_256
    g = sigma.grid
    a = g.cell_center(0.3)  # the rasterized point mass sits here
    j, i = g.cell_index(a + 0.5)
    z = complex(g.coords[i], g.coords[j])
    w = abs(z - a)
    expected = math.log(1 / w) + 0.5 * w * w - 0.5
    assert expected == pytest.approx(0.318147, abs=1e-6)
    assert res.u.values[j, i] == pytest.approx(expected, abs=5e-3)


def test_case_i_measure(case_i_256, annulus_Q):
    sigma, res = case_i_256
    g = sigma.grid
    z = g.centers()
    a = g.cell_center(0.3)
    core = (np.abs(z) < SQRT2 - 2 * g.h) & (np.abs(z - a) > 1 + 2 * g.h)
    np.testing.assert_allclose(res.mu.values[core], 1 / math.pi, rtol=1e-9)
    outside = (np.abs(z) > SQRT2 + 2 * g.h) | (np.abs(z - a) < 1 - 2 * g.h)
    assert np.max(res.mu.values[outside]) <= 1e-8
    assert res.mu.total() == pytest.approx(1.0, abs=1e-6)
    assert res.boundary_band_max <= 1e-8 and res.band_certified
    assert res.residual <= 1e-8


def test_sor_matches_sandpile_on_case_i(annulus_Q):
    g = Grid(64, 2.0)
    sigma = rasterize(build_extension(annulus_Q, SQRT2).sigma, g)
    u = solve_obstacle(sigma).u.values
    v = sandpile_oracle(sigma).values
    assert np.max(np.abs(u - v)) <= 1e-6 * u.max()


def test_sandpile_trivial():
    s = _sigma(SignedMeasureSpec([], [UniformDisk(0, 0.5, 1)]), 32, 1.0)
    assert not np.any(sandpile_oracle(s).values)


def test_sandpile_point_pile_fills_unit_disk():
    g = Grid(128, 2.0)
    v = np.full((128, 128), -1 / math.pi)
    v[g.cell_index(0)] += 1 / g.h**2
    s = ScalarField(g, v)
    u = sandpile_oracle(s)
    mu = recover_measure(s, u)
    # mu is the capacity left unfilled, so the pile occupies 1 - pi mu per cell
    filled = 1 - math.pi * mu.values
    assert float(np.sum(filled)) * g.h**2 == pytest.approx(math.pi, rel=1e-9)
    saturated = np.count_nonzero(filled > 1 - 1e-9) * g.h**2
    assert saturated == pytest.approx(math.pi, rel=0.05)
    assert np.all(np.abs(g.centers()[filled > 1e-9] - g.cell_center(0)) < 1 + 2 * g.h)


def test_recover_flags_bad_odometer():
    g = Grid(32, 1.0)
    s = ScalarField(g, np.full((32, 32), -1.0))
    u = g.zeros()
    u[16, 16] = -1.0  # a dip makes -Laplacian negative at the centre
    with pytest.raises(NegativeDensity):
        recover_measure(s, ScalarField(g, u), tol=1e-8)


def test_bal_general_with_zero_ceiling_is_plain_balayage():
    g = Grid(64, 1.5)
    s = rasterize(SignedMeasureSpec([PointMass(0.2, 0.5)], [UniformDisk(0, 1, 0.4)]), g)
    zero = ScalarField(g, g.zeros())
    np.testing.assert_array_equal(bal_general(s, zero).values, -solve_obstacle(s).mu.values)


def test_point_to_disk_balayage():
    g = Grid(128, 2.0)
    pile = rasterize(SignedMeasureSpec([PointMass(0.001 + 0.001j, 1.0)]), g)
    lam = rasterize(SignedMeasureSpec([UniformDisk(0, SQRT2, 1 / math.pi)]), g)
    out = bal_general(pile, lam)
    assert out.total() == pytest.approx(1.0, abs=1e-8)
    d = np.abs(g.centers() - g.cell_center(0.001 + 0.001j))
    np.testing.assert_allclose(out.values[d < 1 - 2 * g.h], 1 / math.pi, rtol=1e-9)
    assert np.max(out.values[d > 1 + 2 * g.h]) <= 1e-8
    assert np.all(out.values >= -1e-8)
    assert np.all(out.values <= lam.values + pile.values + 1e-8)


def test_bal_general_bounds():
    g = Grid(64, 1.5)
    mu = rasterize(SignedMeasureSpec([PointMass(0.3, 0.4), PointMass(-0.2j, 0.3)]), g)
    lam = rasterize(SignedMeasureSpec([UniformDisk(0.1, 0.9, 0.6)]), g)
    out = bal_general(mu, lam)
    assert np.all(out.values >= -1e-8)
    assert np.all(out.values <= np.maximum(lam.values, mu.values) + 1e-8)


def test_translation_invariance():
    g = Grid(64, 1.5)
    mu = rasterize(SignedMeasureSpec([PointMass(0.3, 0.4)]), g)
    lam = rasterize(SignedMeasureSpec([UniformDisk(0.1, 0.9, 0.6)]), g)
    tau = rasterize(SignedMeasureSpec([UniformDisk(-0.2, 0.5, 0.25)]), g)
    lhs = bal_general(mu + tau, lam + tau).values
    rhs = (bal_general(mu, lam) + tau).values
    np.testing.assert_allclose(lhs, rhs, rtol=0, atol=1e-12)


def test_band_check():
    g = Grid(64, 1.0)
    zero = ScalarField(g, g.zeros())
    assert boundary_band_check(zero) == (0.0, True)
    with pytest.raises(ValueError):
        boundary_band_check(zero, band_cells=1)
    tilted = ScalarField(g, np.tile(np.linspace(0, 1, 64), (64, 1)))
    cert = boundary_band_check(tilted)
    assert cert.band_max == pytest.approx(1.0) and not cert.certified


def test_tight_grid_triggers_enlargement():
    from balpot import BackgroundPotential

    Q = BackgroundPotential(0.5, (PointMass(1.5, 1.0),), 1.0)
    res = solve_equilibrium(Q, n=64, settings=SolverSettings(omega=1.9, auto_enlarge=False))
    assert not res.solve.band_certified
    enlarged = solve_equilibrium(Q, n=64, settings=SolverSettings(omega=1.9))
    assert enlarged.enlargements >= 1
    assert enlarged.grid.L == pytest.approx(res.grid.L * 2**enlarged.enlargements)


def test_mass_conservation_is_exact_with_reflecting_edges():
    g = Grid(64, 1.2)
    # the odometer is large on the edge here, and mass is still conserved
    s = rasterize(SignedMeasureSpec([PointMass(0.7, 0.8)], [UniformDisk(-0.2, 0.6, 1.5)]), g)
    res = solve_obstacle(s)
    assert res.u.values[0].max() > 0
    assert res.mu.total() == pytest.approx(-s.total(), abs=1e-9)
    assert abs(float(np.sum(laplacian(res.u.values, g.h)))) <= 1e-6


def test_monotone_in_sigma():
    rng = np.random.default_rng(4)
    g = Grid(32, 1.0)
    for _ in range(3):
        base = rasterize(SignedMeasureSpec([PointMass(complex(*rng.uniform(-0.5, 0.5, 2)), 0.2)], [UniformDisk(0, 0.8, 1)]), g)
        bump = ScalarField(g, rng.uniform(0, 0.3, (32, 32)))
        bigger = base + bump
        if bigger.total() >= 0:
            continue
        assert np.all(solve_obstacle(base).u.values <= solve_obstacle(bigger).u.values + 1e-10)


def test_complementarity_residual_definition():
    g = Grid(32, 1.0)
    s = rasterize(SignedMeasureSpec([PointMass(0.1, 0.3)], [UniformDisk(0, 0.7, 1)]), g)
    res = solve_obstacle(s)
    assert complementarity_residual(s, res.u) == res.residual <= 1e-8
    # a wrong odometer is not complementary
    assert complementarity_residual(s, ScalarField(g, res.u.values + 0.1)) > 1e-3


def test_deterministic():
    g = Grid(64, 1.5)
    s = rasterize(SignedMeasureSpec([PointMass(0.3, 0.5)], [UniformDisk(0, 1, 0.6)]), g)
    a, b = solve_obstacle(s), solve_obstacle(s)
    assert np.array_equal(a.u.values, b.u.values) and a.iterations == b.iterations


def test_errors():
    g = Grid(32, 1.0)
    pos = ScalarField(g, np.ones((32, 32)))
    with pytest.raises(MassNotNegative):
        solve_obstacle(pos)
    with pytest.raises(MassNotNegative):
        sandpile_oracle(pos)
    s = rasterize(SignedMeasureSpec([PointMass(0.1, 0.3)], [UniformDisk(0, 0.7, 1)]), g)
    for omega in (0.9, 2.0):
        with pytest.raises(ValueError):
            solve_obstacle(s, omega=omega)
    with pytest.raises(NotConverged) as err:
        solve_obstacle(s, max_iter=2)
    assert err.value.iterations == 2
    with pytest.raises(NotConverged):
        sandpile_oracle(s, max_rounds=2)


def test_reference_radii():
    ref = annulus_reference(0.5, 1.0, 0.3, 1.0)
    assert (ref.R, ref.r, ref.density) == pytest.approx((SQRT2, 1.0, 1 / math.pi))
