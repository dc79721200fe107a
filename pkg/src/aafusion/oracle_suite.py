"""Random density instances and the brute-force PHD equivalence checks."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .densities import (
    BernoulliComponent,
    CardinalityPmf,
    IidcDensity,
    MbMixture,
    MultiBernoulli,
    PoissonDensity,
)
from .gaussian import GaussianMixture
from .grid import GridDensity, brute_force_phd, gridded_phd
from .phd import phd_of

FAMILIES = ("poisson", "iidc", "bernoulli", "mb", "mbm")
ORACLE_TOL = 1e-6


def random_spd(rng: np.random.Generator, dim: int = 1, max_components: int = 3, spread: float = 2.0) -> GaussianMixture:
    n = int(rng.integers(1, max_components + 1))
    w = rng.uniform(0.2, 1.0, n)
    means = rng.uniform(-spread, spread, (n, dim))
    A = rng.normal(size=(n, dim, dim)) * 0.4
    covs = A @ np.swapaxes(A, 1, 2) + np.eye(dim) * rng.uniform(0.1, 0.8, (n, 1, 1))
    return GaussianMixture(w / w.sum(), means, covs)


def random_mb(rng: np.random.Generator, dim: int = 1, max_bcs: int = 3) -> MultiBernoulli:
    n = int(rng.integers(1, max_bcs + 1))
    return MultiBernoulli(tuple(BernoulliComponent(rng.uniform(0.05, 0.95), random_spd(rng, dim)) for _ in range(n)))


def random_instance(family: str, rng: np.random.Generator, dim: int = 1):
    """A random density of ``family`` small enough for the brute-force oracle (cardinality <= 4)."""
    if family == "poisson":
        # a small rate keeps the Poisson tail beyond four targets below 1e-7
        return PoissonDensity(rng.uniform(0.01, 0.1), random_spd(rng, dim))
    if family == "iidc":
        return IidcDensity(CardinalityPmf(rng.dirichlet(np.ones(5))), random_spd(rng, dim))
    if family == "bernoulli":
        return BernoulliComponent(rng.uniform(0.0, 1.0), random_spd(rng, dim))
    if family == "mb":
        return random_mb(rng, dim)
    if family == "mbm":
        n = int(rng.integers(1, 3))
        return MbMixture(tuple((rng.uniform(0.1, 1.0), random_mb(rng, dim)) for _ in range(n)))
    raise ValueError(f"unknown family {family!r}")


def oracle_grid(points: int = 12, half_width: float = 4.0) -> GridDensity:
    return GridDensity.regular(-half_width, half_width, points)


@dataclass(frozen=True)
class OracleCheck:
    family: str
    instance: int
    max_error: float
    seconds: float

    @property
    def passed(self) -> bool:
        return self.max_error <= ORACLE_TOL


def oracle_error(density, grid: GridDensity) -> float:
    """Largest per-cell gap between the enumerated PHD and the closed-form PHD."""
    brute = brute_force_phd(density, grid, n_max=4)
    exact = gridded_phd(phd_of(density, dim=grid.dim), grid)
    return float(np.max(np.abs(brute.values - exact.values)))


def run_oracle_suite(seed: int = 0, per_family: int = 2, grid: GridDensity | None = None) -> list[OracleCheck]:
    grid = grid or oracle_grid()
    rng = np.random.default_rng(seed)
    out = []
    for family in FAMILIES:
        for k in range(per_family):
            density = random_instance(family, rng)
            t0 = time.perf_counter()
            err = oracle_error(density, grid)
            out.append(OracleCheck(family, k, err, time.perf_counter() - t0))
    return out
