"""Monte-Carlo check that averaging independent unbiased count estimates reduces their MSE."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..gaussian import ContractError


@dataclass(frozen=True)
class MseRow:
    sensors: int
    analytic: float
    empirical: float
    local_empirical: tuple[float, ...]

    @property
    def relative_error(self) -> float:
        return abs(self.empirical - self.analytic) / self.analytic


def mse_consistency_experiment(sensor_counts: Sequence[int], trials: int, sigma: float | Sequence[float] = 1.0,
                               true_count: float = 10.0, weights: Sequence[float] | None = None,
                               seed: int = 0) -> list[MseRow]:
    """Empirical vs analytic MSE of the weighted average of I unbiased estimators.

    Estimator i reports ``true_count + sigma_i * e`` with independent standard
    normal ``e``.  The analytic MSE of the average is Σ w_i² sigma_i²; with
    uniform weights and equal variances this is sigma²/I.  Each I draws from
    its own stream split from ``seed``.
    """
    if trials < 1:
        raise ContractError("trials must be positive")
    rows = []
    for I in sensor_counts:
        if I < 1:
            raise ContractError("sensor counts must be positive")
        sig = np.broadcast_to(np.asarray(sigma, dtype=float), (I,))
        w = np.full(I, 1.0 / I) if weights is None else np.asarray(weights, dtype=float)
        if w.shape != (I,) or abs(w.sum() - 1) > 1e-12:
            raise ContractError("weights must match the sensor count and sum to one")
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(int(I),)))
        est = true_count + rng.standard_normal((trials, I)) * sig
        local = np.mean((est - true_count) ** 2, axis=0)
        fused = est[:, 0] if I == 1 else est @ w
        rows.append(MseRow(int(I), float(np.sum(w**2 * sig**2)), float(np.mean((fused - true_count) ** 2)),
                           tuple(map(float, local))))
    return rows
