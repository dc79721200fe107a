"""Bernoulli filter and the labeled multi-Bernoulli filter built from it."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..consensus import Reduction
from ..densities import BernoulliComponent, Label, LmbDensity
from ..gaussian import ContractError, GaussianMixture
from .kalman import MixtureUpdate, _as_measurements, kalman_update, posterior_mixture, predict_mixture
from .models import BirthModel, MotionModel, SensorModel


def bernoulli_predict(bc: BernoulliComponent, motion: MotionModel, p_birth: float = 0.0,
                      birth_spd: GaussianMixture | None = None) -> BernoulliComponent:
    """r' = p_B (1 - r) + p_S r, with the SPD a matching mixture of birth and survival."""
    if not 0.0 <= p_birth <= 1.0:
        raise ContractError("birth probability outside [0, 1]")
    r, p_s = bc.existence, motion.p_survival
    born, survived = p_birth * (1.0 - r), p_s * r
    total = born + survived
    if total <= 0:
        return BernoulliComponent(0.0, GaussianMixture.empty(motion.dim))
    parts = []
    if survived > 0:
        parts.append(predict_mixture(bc.spd, motion, survived / total))
    if born > 0:
        if birth_spd is None:
            raise ContractError("a positive birth probability needs a birth SPD")
        parts.append(birth_spd.normalized().scaled(born / total))
    return BernoulliComponent(min(total, 1.0), GaussianMixture.concatenate(parts))


def _detection_terms(spd: GaussianMixture, upd: MixtureUpdate, p_d: float, clutter: np.ndarray):
    """Per-measurement likelihood ratios p_D l(z) / kappa(z), handling kappa = 0.

    Returns ``(ratios, certain)``: when some measurement has zero clutter
    intensity but positive likelihood, ``certain`` lists those indices and
    the ratios are the unnormalized likelihoods of just those measurements.
    """
    lik = p_d * (spd.weights @ upd.likelihood) if len(spd) else np.zeros(upd.likelihood.shape[1])
    certain = np.flatnonzero((clutter <= 0) & (lik > 0))
    if certain.size:
        ratios = np.zeros_like(lik)
        ratios[certain] = lik[certain]
        return ratios, certain
    ratios = np.divide(lik, clutter, out=np.zeros_like(lik), where=clutter > 0)
    return ratios, certain


def _bernoulli_posterior(bc: BernoulliComponent, upd: MixtureUpdate, p_d: float, clutter: np.ndarray,
                         reduction: Reduction | None) -> BernoulliComponent:
    r, spd = bc.existence, bc.spd
    if r == 0 or len(spd) == 0:
        return BernoulliComponent(0.0, GaussianMixture.empty(spd.dim))
    ratios, certain = _detection_terms(spd, upd, p_d, clutter)
    if certain.size:
        r_new, miss_weight = 1.0, 0.0
    else:
        num = r * (1.0 - p_d + ratios.sum())
        den = 1.0 - r * p_d + r * ratios.sum()
        if den <= 0:
            # certain existence and certain detection, yet nothing was detected
            return BernoulliComponent(0.0, spd)
        r_new, miss_weight = min(num / den, 1.0), 1.0 - p_d
    parts = [spd.scaled(miss_weight)] if miss_weight > 0 else []
    cols = np.flatnonzero(ratios > 0)
    comp = spd.weights[:, None] * upd.likelihood[:, cols]
    norm = comp.sum(axis=0)
    cols, comp, norm = cols[norm > 0], comp[:, norm > 0], norm[norm > 0]
    if cols.size:
        parts.append(posterior_mixture(comp / norm * ratios[cols], upd, cols))
    post = GaussianMixture.concatenate(parts) if parts else spd
    if post.mass <= 0:
        return BernoulliComponent(0.0, GaussianMixture.empty(spd.dim)) if r_new == 0 else BernoulliComponent(r_new, spd)
    post = post.normalized()
    if reduction is not None:
        post = reduction(post).normalized()
    return BernoulliComponent(r_new, post)


def bernoulli_update(bc: BernoulliComponent, measurements: Sequence, sensor: SensorModel,
                     reduction: Reduction | None = Reduction()) -> BernoulliComponent:
    """Exact Bernoulli-filter update under Poisson clutter."""
    Z = _as_measurements(measurements, sensor.meas_dim)
    upd = kalman_update(bc.spd, Z, sensor)
    clutter = np.full(len(Z), sensor.clutter_density)
    return _bernoulli_posterior(bc, upd, sensor.p_detect, clutter, reduction)


# ---------------------------------------------------------------------------
# labeled multi-Bernoulli


def lmb_predict(lmb: LmbDensity, motion: MotionModel, birth: BirthModel | None, time: int) -> LmbDensity:
    """Surviving tracks keep their labels; births get labels ``(time, index)``."""
    tracks = {label: bernoulli_predict(bc, motion) for label, bc in lmb.tracks.items()}
    if birth is not None:
        for idx, comp in enumerate(birth.intensity.components):
            label = Label(time, idx)
            if label in tracks:
                raise ContractError(f"label {label} already in use")
            tracks[label] = BernoulliComponent(min(comp.weight, 1.0), GaussianMixture.single(comp.mean, comp.cov))
    return LmbDensity(tracks)


def lmb_update(lmb: LmbDensity, measurements: Sequence, sensor: SensorModel,
               reduction: Reduction | None = Reduction(), prune_existence: float = 1e-4) -> LmbDensity:
    """Approximate LMB update by per-track soft measurement assignment.

    Every track is updated as a Bernoulli filter whose clutter intensity at
    each measurement is the sensor clutter plus the expected detection
    intensity r p_D l(z) of all other tracks.  The share of measurement z
    claimed by track l is thus proportional to its likelihood ratio,
    normalized per measurement.  Tracks whose existence falls below
    ``prune_existence`` are dropped.
    """
    Z = _as_measurements(measurements, sensor.meas_dim)
    labels = lmb.labels
    p_d = sensor.p_detect
    updates = [kalman_update(lmb.tracks[l].spd, Z, sensor) for l in labels]
    expected = np.array([
        lmb.tracks[l].existence * p_d * (lmb.tracks[l].spd.weights @ u.likelihood) if len(lmb.tracks[l].spd)
        else np.zeros(len(Z))
        for l, u in zip(labels, updates)
    ]).reshape(len(labels), len(Z))
    total = sensor.clutter_density + expected.sum(axis=0)
    out = {}
    for i, (label, upd) in enumerate(zip(labels, updates)):
        clutter = np.maximum(total - expected[i], 0.0)
        bc = _bernoulli_posterior(lmb.tracks[label], upd, p_d, clutter, reduction)
        if bc.existence >= prune_existence:
            out[label] = bc
    return LmbDensity(out)
