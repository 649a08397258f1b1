"""JSON run configuration.

Example::

    {
      "potential": {"alpha": 0.5, "t": 1.0,
                    "nu": [{"type": "point", "location": [0.3, 0.0], "mass": 1.0}]},
      "rho": null,
      "grid": {"n": 256, "L": 2.0},
      "solver": {"omega": 1.8, "tol": 1e-13, "auto_enlarge": true},
      "verify": {"reference": {"type": "annulus", "a": [0.3, 0.0], "beta": 1.0}},
      "output_dir": "out"
    }

Points in the plane are given as [x, y] pairs or as a single real number.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

from balpot.errors import BalpotError
from balpot.extension import BackgroundPotential
from balpot.measures import PointMass, UniformCircle, UniformDisk
from balpot.pipeline import SolverSettings
from balpot.verify import AnnulusReference, annulus_reference

MIN_N, MAX_N = 32, 2048


class ConfigError(BalpotError):
    pass


def _point(value, name) -> complex:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(float(value), 0.0)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    raise ConfigError(f"{name} must be a number or an [x, y] pair, got {value!r}")


def _xy(z: complex) -> list[float]:
    return [z.real, z.imag]


def _take(d: dict, allowed: set[str], where: str) -> dict:
    if not isinstance(d, dict):
        raise ConfigError(f"{where} must be an object")
    extra = set(d) - allowed
    if extra:
        raise ConfigError(f"unknown keys in {where}: {sorted(extra)}")
    return d


def _number(d: dict, key: str, where: str, default=None, positive=False):
    v = d.get(key, default)
    if v is None:
        return None
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{where}.{key} must be a finite number, got {v!r}")
    if positive and not v > 0:
        raise ConfigError(f"{where}.{key} must be > 0, got {v!r}")
    return float(v)


def parse_atom(d: dict, k: int):
    where = f"potential.nu[{k}]"
    kind = d.get("type") if isinstance(d, dict) else None
    try:
        if kind == "point":
            _take(d, {"type", "location", "mass"}, where)
            return PointMass(_point(d["location"], where + ".location"), float(d["mass"]))
        if kind == "disk":
            _take(d, {"type", "center", "radius", "density"}, where)
            return UniformDisk(_point(d.get("center", 0), where + ".center"), float(d["radius"]), float(d["density"]))
        if kind == "circle":
            _take(d, {"type", "center", "radius", "mass"}, where)
            return UniformCircle(_point(d.get("center", 0), where + ".center"), float(d["radius"]), float(d["mass"]))
    except KeyError as exc:
        raise ConfigError(f"{where} is missing {exc}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from None
    raise ConfigError(f"{where}.type must be 'point', 'disk' or 'circle', got {kind!r}")


def atom_to_dict(atom) -> dict:
    if isinstance(atom, PointMass):
        return {"type": "point", "location": _xy(atom.location), "mass": atom.mass}
    if isinstance(atom, UniformDisk):
        return {"type": "disk", "center": _xy(atom.center), "radius": atom.radius, "density": atom.density}
    return {"type": "circle", "center": _xy(atom.center), "radius": atom.radius, "mass": atom.total_mass}


@dataclass(frozen=True)
class ReferenceConfig:
    a: complex
    beta: float


@dataclass(frozen=True)
class RunConfig:
    Q: BackgroundPotential
    rho: float | None = None
    n: int = 256
    L: float | None = None
    solver: SolverSettings = field(default_factory=SolverSettings)
    reference: ReferenceConfig | None = None
    output_dir: str = "out"

    def annulus(self) -> AnnulusReference | None:
        if self.reference is None:
            return None
        return annulus_reference(self.Q.alpha, self.reference.beta, self.reference.a, self.Q.t)

    def to_dict(self) -> dict[str, Any]:
        ref = None
        if self.reference is not None:
            ref = {"type": "annulus", "a": _xy(self.reference.a), "beta": self.reference.beta}
        return {
            "potential": {
                "alpha": self.Q.alpha,
                "t": self.Q.t,
                "nu": [atom_to_dict(a) for a in self.Q.nu],
            },
            "rho": self.rho,
            "grid": {"n": self.n, "L": self.L},
            "solver": asdict(self.solver),
            "verify": {"reference": ref},
            "output_dir": self.output_dir,
        }


def parse_config(raw: dict) -> RunConfig:
    _take(raw, {"potential", "rho", "grid", "solver", "verify", "output_dir"}, "config")
    pot = _take(raw.get("potential", {}), {"alpha", "t", "nu"}, "potential")
    alpha = _number(pot, "alpha", "potential", positive=True)
    if alpha is None:
        raise ConfigError("potential.alpha is required")
    t = _number(pot, "t", "potential", default=1.0, positive=True)
    nu_raw = pot.get("nu", [])
    if not isinstance(nu_raw, list):
        raise ConfigError("potential.nu must be a list")
    Q = BackgroundPotential(alpha, tuple(parse_atom(d, k) for k, d in enumerate(nu_raw)), t)

    rho = _number(raw, "rho", "config", positive=True)

    grid = _take(raw.get("grid", {}), {"n", "L"}, "grid")
    n = grid.get("n", 256)
    if isinstance(n, bool) or not isinstance(n, int) or n % 2 or not MIN_N <= n <= MAX_N:
        raise ConfigError(f"grid.n must be an even integer in [{MIN_N}, {MAX_N}], got {n!r}")
    L = _number(grid, "L", "grid", positive=True)

    s = _take(raw.get("solver", {}), {"omega", "tol", "max_iter", "band_cells", "band_tol", "auto_enlarge"}, "solver")
    base = SolverSettings()
    max_iter = s.get("max_iter")
    if max_iter is not None and (isinstance(max_iter, bool) or not isinstance(max_iter, int) or max_iter < 1):
        raise ConfigError(f"solver.max_iter must be a positive integer, got {max_iter!r}")
    band_cells = s.get("band_cells", base.band_cells)
    if isinstance(band_cells, bool) or not isinstance(band_cells, int) or band_cells < 2:
        raise ConfigError(f"solver.band_cells must be an integer >= 2, got {band_cells!r}")
    omega = _number(s, "omega", "solver", default=base.omega)
    if not 1.0 <= omega < 2.0:
        raise ConfigError(f"solver.omega must lie in [1, 2), got {omega}")
    settings = SolverSettings(
        omega=omega,
        tol=_number(s, "tol", "solver", default=base.tol, positive=True),
        max_iter=max_iter,
        band_cells=band_cells,
        band_tol=_number(s, "band_tol", "solver", default=base.band_tol, positive=True),
        auto_enlarge=bool(s.get("auto_enlarge", base.auto_enlarge)),
    )

    ref = None
    ver = _take(raw.get("verify", {}) or {}, {"reference"}, "verify")
    r = ver.get("reference")
    if r is not None:
        _take(r, {"type", "a", "beta"}, "verify.reference")
        if r.get("type", "annulus") != "annulus":
            raise ConfigError("verify.reference.type must be 'annulus'")
        beta = _number(r, "beta", "verify.reference", default=0.0)
        if beta < 0:
            raise ConfigError("verify.reference.beta must be >= 0")
        ref = ReferenceConfig(_point(r.get("a", 0), "verify.reference.a"), beta)
        expected = () if beta == 0 else (PointMass(ref.a, beta),)
        if Q.nu != expected:
            raise ConfigError("the annulus reference needs nu to be the single point mass beta at a")

    out = raw.get("output_dir", "out")
    if not isinstance(out, str) or not out:
        raise ConfigError("output_dir must be a non-empty string")
    return RunConfig(Q, rho, n, L, settings, ref, out)


def load_config(path: str | Path) -> RunConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    return parse_config(raw)
