"""Ground truth and measurement generation."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..filters.models import SensorModel
from .config import ScenarioConfig

TruthStep = list[tuple[np.ndarray, int]]


def generate_truth(cfg: ScenarioConfig, rng: np.random.Generator) -> list[TruthStep]:
    """States of every scripted target at each step, as ``(state, target_id)`` pairs.

    A target starts at its scripted state on its birth step and then follows
    the truth motion model with process noise until its death step.
    """
    motion = cfg.truth_motion()
    chol = np.linalg.cholesky(motion.Q + 1e-12 * np.eye(motion.dim))
    steps: list[TruthStep] = [[] for _ in range(cfg.duration)]
    for tid, script in enumerate(cfg.targets):
        x = np.array(script.state, dtype=float)
        for k in range(script.birth, min(script.death, cfg.duration)):
            if k > script.birth:
                x = motion.F @ x + chol @ rng.standard_normal(motion.dim)
            steps[k].append((x.copy(), tid))
    return steps


def generate_measurements(truth: TruthStep, sensor: SensorModel, rng: np.random.Generator,
                          blind_to: Sequence[int] = ()) -> np.ndarray:
    """Detections of the truth with probability p_D plus uniform Poisson clutter, in random order.

    Targets listed in ``blind_to`` are never detected.
    """
    m = sensor.meas_dim
    chol = np.linalg.cholesky(sensor.R)
    rows = []
    for x, tid in truth:
        detected = rng.random() < sensor.p_detect
        if detected and tid not in blind_to:
            rows.append(sensor.H @ x + chol @ rng.standard_normal(m))
    lo, hi = sensor.clutter_region
    n_clutter = rng.poisson(sensor.clutter_rate)
    clutter = lo + (hi - lo) * rng.random((n_clutter, m))
    Z = np.vstack([np.array(rows).reshape(-1, m), clutter])
    return Z[rng.permutation(len(Z))]
