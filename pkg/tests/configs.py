"""Seeded random background potentials for the property and acceptance suites.

Point masses are placed so that each hole D(a_k, r_k), r_k = sqrt(beta_k / 2 alpha),
lies inside D(0, R) with a small margin and the holes are pairwise disjoint.
"""

import math
from dataclasses import dataclass

import numpy as np

from balpot import BackgroundPotential, PointMass, min_radius

N_CONFIGS = 20
MARGIN = 0.05


@dataclass(frozen=True)
class RandomConfig:
    seed: int
    Q: BackgroundPotential
    rho: float

    @property
    def R(self) -> float:
        return min_radius(self.Q)


def _place(rng, R, radii, tries=2000):
    centres = []
    for r in radii:
        room = R * (1 - MARGIN) - r
        if room <= 0:
            return None
        for _ in range(tries):
            rad = room * math.sqrt(rng.uniform())
            a = rad * complex(math.cos(th := rng.uniform(0, 2 * math.pi)), math.sin(th))
            if all(abs(a - b) >= r + s + MARGIN * R for b, s in zip(centres, radii)):
                centres.append(a)
                break
        else:
            return None
    return centres


def random_config(seed: int) -> RandomConfig:
    rng = np.random.default_rng(seed)
    alpha = rng.uniform(0.2, 2.0)
    t = rng.uniform(0.5, 2.0)
    k = int(rng.integers(1, 4))
    while True:
        betas = rng.uniform(0.1, 1.0, size=k)
        R = math.sqrt((t + betas.sum()) / (2 * alpha))
        radii = [math.sqrt(b / (2 * alpha)) for b in betas]
        centres = _place(rng, R, radii)
        if centres is not None:
            break
    nu = tuple(PointMass(complex(round(a.real, 6), round(a.imag, 6)), float(b)) for a, b in zip(centres, betas))
    Q = BackgroundPotential(float(alpha), nu, float(t))
    rho = min_radius(Q) * rng.uniform(1.0, 2.0)
    return RandomConfig(seed, Q, float(rho))


def all_configs():
    return [random_config(s) for s in range(N_CONFIGS)]
