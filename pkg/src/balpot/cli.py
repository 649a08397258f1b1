"""Command line front end: ``balpot solve | converge | rho-sweep``.

Exit status: 0 success, 2 configuration error (including rho below the
minimal radius), 3 solver did not converge, 4 a verification check failed
(the report is still written).
"""

from __future__ import annotations

import argparse
import itertools
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from balpot.config import ConfigError, RunConfig, load_config
from balpot.errors import NegativeDensity, NotConverged, RadiusTooSmall, SupportOutsideGrid, WrongCase
from balpot.extension import RADIUS_RTOL, min_radius
from balpot.output import write_field_csv, write_json, write_support_pgm, write_table
from balpot.pipeline import PipelineResult, default_half_width, solve_equilibrium
from balpot.verify import extract_support, failures, verify

log = logging.getLogger("balpot")

EXIT_OK, EXIT_CONFIG, EXIT_NOT_CONVERGED, EXIT_VERIFY = 0, 2, 3, 4
MIN_ODOMETER_RATE = 1.5
RHO_SWEEP_TOL = 0.02
# errors at or below this are treated as exact and get no convergence rate
EXACT = 1e-14


class VerificationFailed(Exception):
    pass


def _solve(cfg: RunConfig, n: int | None = None, rho: float | None = None, L: float | None = None):
    return solve_equilibrium(
        cfg.Q,
        rho=cfg.rho if rho is None else rho,
        n=cfg.n if n is None else n,
        L=cfg.L if L is None else L,
        settings=cfg.solver,
    )


def _check_rho(cfg: RunConfig, rho: float | None) -> None:
    R = min_radius(cfg.Q)
    if rho is not None and rho < R * (1 - RADIUS_RTOL):
        raise RadiusTooSmall(
            f"rho = {rho:.12g} is below the minimal radius sqrt((t + nu(C)) / (2 alpha)) = {R:.12g}"
        )


def build_report(cfg: RunConfig, res: PipelineResult) -> dict:
    ref = cfg.annulus()
    rep = verify(res.mu, res.sigma, res.u, res.grid_Q, ref, res.ext.rho)
    failed = failures(rep, h=res.grid.h, ref=ref)
    if not res.solve.band_certified:
        failed.append("boundary_band")
    d = rep.to_dict()
    d.update(
        boundary_band_max=res.solve.boundary_band_max,
        band_certified=res.solve.band_certified,
        iterations=res.solve.iterations,
        enlargements=res.enlargements,
        rho=res.ext.rho,
        grid={"n": res.grid.n, "L": res.grid.L, "h": res.grid.h},
        config_echo=cfg.to_dict(),
        failures=failed,
    )
    return d


def run_solve(cfg: RunConfig, out: Path) -> int:
    _check_rho(cfg, cfg.rho)
    res = _solve(cfg)
    out.mkdir(parents=True, exist_ok=True)
    write_field_csv(out / "u.csv", res.u)
    write_field_csv(out / "mu.csv", res.mu)
    write_field_csv(out / "sigma.csv", res.sigma)
    write_support_pgm(out / "support.pgm", extract_support(res.mu))
    report = build_report(cfg, res)
    write_json(out / "report.json", report)
    log.info("wrote %s", out)
    if report["failures"]:
        raise VerificationFailed("failed checks: " + ", ".join(report["failures"]))
    return EXIT_OK


def run_convergence(cfg: RunConfig, levels: int, out: Path) -> int:
    ref = cfg.annulus()
    if ref is None:
        raise ConfigError("converge needs verify.reference")
    if not ref.case_i:
        raise WrongCase("the hole does not fit inside the disk; there is no closed form to converge to")
    if levels < 1 or cfg.n * 2 ** (levels - 1) > 2048:
        raise ConfigError(f"levels must be >= 1 with n * 2^(levels-1) <= 2048, got {levels}")
    _check_rho(cfg, cfg.rho)
    rho = cfg.rho if cfg.rho is not None else min_radius(cfg.Q)
    L = cfg.L if cfg.L is not None else default_half_width(cfg.Q, rho)

    rows = []
    prev = None
    bad_rate = False
    for k in range(levels):
        n = cfg.n * 2**k
        res = _solve(replace(cfg, solver=replace(cfg.solver, auto_enlarge=False)), n=n, rho=rho, L=L)
        errs = verify(res.mu, res.sigma, res.u, res.grid_Q, ref, rho).reference_errors
        rate = math.nan
        if prev is not None and prev > EXACT and errs.odometer_max_err > EXACT:
            rate = math.log2(prev / errs.odometer_max_err)
            bad_rate |= rate < MIN_ODOMETER_RATE
        prev = errs.odometer_max_err
        log.info("n=%d odometer error %.3g density error %.3g", n, errs.odometer_max_err, errs.density_max_err)
        rows.append([k, n, res.grid.L, res.grid.h, errs.odometer_max_err, errs.density_max_err,
                     errs.support_symmdiff_area, rate])
    out.mkdir(parents=True, exist_ok=True)
    write_table(
        out / "convergence.csv",
        ["level", "n", "L", "h", "odometer_max_err", "density_max_err", "support_symmdiff_area", "odometer_rate"],
        rows,
    )
    if bad_rate:
        raise VerificationFailed(f"odometer convergence rate below {MIN_ODOMETER_RATE}")
    return EXIT_OK


def run_rho_sweep(cfg: RunConfig, rhos: list[float], out: Path) -> int:
    if not rhos:
        raise ConfigError("no radii given")
    for rho in rhos:
        _check_rho(cfg, rho)
    # one grid for all radii, so the fields can be compared cell by cell
    L = cfg.L if cfg.L is not None else default_half_width(cfg.Q, max(rhos))
    settings = replace(cfg.solver, auto_enlarge=False)
    fields = []
    for rho in rhos:
        res = _solve(replace(cfg, solver=settings), rho=rho, L=L)
        fields.append(res.mu.values)
    scale = 2 * cfg.Q.alpha / math.pi
    rows = []
    worst = 0.0
    for (i, a), (j, b) in itertools.combinations(enumerate(fields), 2):
        d = float(np.max(np.abs(a - b)))
        worst = max(worst, d / scale)
        rows.append([rhos[i], rhos[j], d, d / scale])
    out.mkdir(parents=True, exist_ok=True)
    write_table(out / "rho_sweep.csv", ["rho_a", "rho_b", "max_abs_diff", "relative_diff"], rows)
    if worst > RHO_SWEEP_TOL:
        raise VerificationFailed(f"measures differ by {100 * worst:.2f}% of 2 alpha / pi across radii")
    return EXIT_OK


def _parse_rhos(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse radii {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="balpot", description="Equilibrium measures by partial balayage")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve one configuration and write fields and report")
    s.add_argument("--config", required=True)
    s.add_argument("--out", help="output directory (default: output_dir from the config)")

    c = sub.add_parser("converge", help="refinement study against the closed-form case")
    c.add_argument("--config", required=True)
    c.add_argument("--levels", type=int, default=3)
    c.add_argument("--out")

    r = sub.add_parser("rho-sweep", help="compare measures obtained from several disk radii")
    r.add_argument("--config", required=True)
    r.add_argument("--rhos", required=True, help="comma separated radii, e.g. 1.4142,1.7678")
    r.add_argument("--out")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config)
        out = Path(args.out or cfg.output_dir)
        if args.command == "solve":
            return run_solve(cfg, out)
        if args.command == "converge":
            return run_convergence(cfg, args.levels, out)
        return run_rho_sweep(cfg, _parse_rhos(args.rhos), out)
    except (ConfigError, RadiusTooSmall, SupportOutsideGrid, WrongCase) as exc:
        print(f"balpot: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NotConverged, NegativeDensity) as exc:
        print(f"balpot: solver did not converge: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except VerificationFailed as exc:
        print(f"balpot: verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
