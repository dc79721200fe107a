"""Fusion weights, the geometric-average baseline and divergence-based weight selection."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..gaussian import ContractError
from ..grid import GridDensity

log = logging.getLogger(__name__)

WEIGHT_SUM_TOL = 1e-12


@dataclass(frozen=True)
class FusionWeights:
    """A point of the open probability simplex, one weight per sensor.

    ``fallback`` is set when an optimizer could not produce weights and
    returned the uniform point instead.
    """

    weights: tuple[float, ...]
    fallback: bool = field(default=False, compare=False)

    def __post_init__(self):
        w = tuple(float(x) for x in np.asarray(self.weights, dtype=float).reshape(-1))
        if not w:
            raise ContractError("at least one fusion weight is required")
        if any(not x > 0 for x in w):
            raise ContractError(f"fusion weights must be strictly positive, got {w}")
        if abs(math.fsum(w) - 1.0) > WEIGHT_SUM_TOL:
            raise ContractError(f"fusion weights sum to {math.fsum(w)!r}, not 1")
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, n: int) -> FusionWeights:
        return cls((1.0 / n,) * n)

    @classmethod
    def normalize(cls, raw, fallback: bool = False) -> FusionWeights:
        """Weights proportional to ``raw``; the residual rounding goes to the largest entry."""
        raw = np.asarray(raw, dtype=float)
        w = raw / raw.sum()
        w[np.argmax(w)] += 1.0 - math.fsum(w)
        return cls(tuple(w), fallback=fallback)

    def __len__(self) -> int:
        return len(self.weights)

    def __iter__(self):
        return iter(self.weights)

    def __getitem__(self, i: int) -> float:
        return self.weights[i]

    def as_array(self) -> np.ndarray:
        return np.array(self.weights)


def _check_common_grid(ps: Sequence[GridDensity]):
    if not ps:
        raise ContractError("no densities given")
    if any(not p.same_grid(ps[0]) for p in ps[1:]):
        raise ContractError("densities must share one grid")


def ga_fuse_grid(ps: Sequence[GridDensity], w: FusionWeights) -> GridDensity:
    """Normalized weighted geometric mean (1/c) Π p_i^{w_i} on a common grid.

    When the product vanishes everywhere the result is all zeros and
    ``is_degenerate`` is true.
    """
    _check_common_grid(ps)
    if len(ps) != len(w):
        raise ContractError("one weight per density is required")
    vals = np.stack([p.values for p in ps])
    with np.errstate(divide="ignore"):
        logs = np.log(vals)
    logprod = np.asarray(w.as_array()) @ np.where(np.isneginf(logs), 0.0, logs)
    zero = np.any(vals <= 0, axis=0)
    if np.all(zero):
        return ps[0].with_values(np.zeros(len(ps[0])))
    logprod = np.where(zero, -np.inf, logprod)
    out = np.exp(logprod - logprod.max())
    return ps[0].with_values(out / (out.sum() * ps[0].cell_volume))


def ga_fuse_phd_grid(phds: Sequence[GridDensity], w: FusionWeights) -> GridDensity:
    """Geometric-average PHD Π D_i^{w_i}, the intensity of the geometric pool of Poisson densities.

    Unlike :func:`ga_fuse_grid` the result is not renormalized; its mass is
    the GA estimate of the target count.
    """
    _check_common_grid(phds)
    if len(phds) != len(w):
        raise ContractError("one weight per density is required")
    vals = np.stack([p.values for p in phds])
    if np.any(vals < 0):
        raise ContractError("PHD values must be nonnegative")
    with np.errstate(divide="ignore"):
        logs = np.log(vals)
    zero = np.any(vals == 0, axis=0)
    logprod = w.as_array() @ np.where(zero, 0.0, logs)
    return phds[0].with_values(np.where(zero, 0.0, np.exp(logprod)))


def aa_fuse_grid(ps: Sequence[GridDensity], w: FusionWeights) -> GridDensity:
    _check_common_grid(ps)
    return ps[0].with_values(w.as_array() @ np.stack([p.values for p in ps]))


def bfom_objective(ps: Sequence[GridDensity], w) -> float:
    """Σ_i w_i KL(f_i || Σ_j w_j f_j)."""
    w = np.asarray(w, dtype=float)
    vals = np.stack([p.values for p in ps])
    mix = w @ vals
    vol = ps[0].cell_volume
    total = 0.0
    for wi, f in zip(w, vals):
        pos = f > 0
        if np.any(mix[pos] <= 0):
            return math.inf
        total += wi * np.sum(f[pos] * np.log(f[pos] / mix[pos])) * vol
    return float(total)


def _project(w: np.ndarray, floor: float) -> np.ndarray:
    w = np.maximum(w, floor)
    return w / w.sum()


def bfom_weights(
    ps: Sequence[GridDensity],
    step: float = 0.1,
    iterations: int = 200,
    floor: float = 1e-4,
) -> FusionWeights:
    """Weights maximizing Σ_i w_i KL(f_i || f_AA(w)) over the simplex.

    Projected gradient ascent from the uniform point: the gradient
    (∂/∂w_k = KL(f_k || f_AA) - 1) is centred to stay on the simplex, the
    step is taken, weights are clipped at ``floor`` and renormalized.  The
    best iterate is returned.  A non-finite divergence falls back to the
    uniform weights with ``fallback`` set.
    """
    _check_common_grid(ps)
    n = len(ps)
    if n < 2:
        raise ContractError("weight optimization needs at least two densities")
    if any(p.mass <= 0 for p in ps):
        raise ContractError("every density must have positive mass")
    vals = np.stack([p.normalized().values for p in ps])
    pos = vals > 0
    vol = ps[0].cell_volume
    w = np.full(n, 1.0 / n)

    def divergences(w):
        mix = w @ vals
        if np.any(pos & (mix <= 0)):
            return None
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(pos, vals * np.log(np.where(pos, vals, 1.0) / np.where(pos, mix, 1.0)), 0.0)
        return terms.sum(axis=1) * vol

    kl = divergences(w)
    if kl is None or not np.all(np.isfinite(kl)):
        log.warning("non-finite divergence in weight optimization; using uniform weights")
        return FusionWeights(FusionWeights.uniform(n).weights, fallback=True)
    best_w, best_obj = w.copy(), float(w @ kl)
    for _ in range(iterations):
        grad = kl - 1.0
        w = _project(w + step * (grad - grad.mean()), floor)
        kl = divergences(w)
        if kl is None or not np.all(np.isfinite(kl)):
            break
        obj = float(w @ kl)
        if obj > best_obj:
            best_w, best_obj = w.copy(), obj
    return FusionWeights.normalize(best_w)

