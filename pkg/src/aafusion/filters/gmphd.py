"""Gaussian-mixture PHD filter."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..consensus import Reduction
from ..gaussian import GaussianMixture
from .kalman import kalman_update, posterior_mixture, predict_mixture
from .models import BirthModel, MotionModel, SensorModel


def phd_predict(prior: GaussianMixture, motion: MotionModel, birth: BirthModel | None = None) -> GaussianMixture:
    surviving = predict_mixture(prior, motion, motion.p_survival)
    if birth is None or len(birth) == 0:
        return surviving
    return GaussianMixture.concatenate([surviving, birth.intensity])


def phd_update(predicted: GaussianMixture, measurements: Sequence, sensor: SensorModel,
               reduction: Reduction | None = Reduction()) -> GaussianMixture:
    """Misdetection terms plus one Kalman-updated copy of the prior per measurement.

    Pass ``reduction=None`` to skip the pruning and merging step.
    """
    p_d = sensor.p_detect
    upd = kalman_update(predicted, measurements, sensor)
    parts = [predicted.scaled(1.0 - p_d)]
    if upd.likelihood.shape[1] and len(predicted) and p_d > 0:
        num = p_d * predicted.weights[:, None] * upd.likelihood
        den = sensor.clutter_density + num.sum(axis=0)
        w = np.divide(num, den, out=np.zeros_like(num), where=den > 0)
        parts.append(posterior_mixture(w, upd))
    out = GaussianMixture.concatenate(parts)
    return reduction(out) if reduction is not None else out
