"""Vectorized Kalman updates of every component of a Gaussian mixture."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..gaussian import ContractError, GaussianMixture
from .models import MotionModel, SensorModel


def predict_mixture(gm: GaussianMixture, motion: MotionModel, scale: float = 1.0) -> GaussianMixture:
    """Propagate every component through the motion model; weights are multiplied by ``scale``."""
    if gm.dim != motion.dim:
        raise ContractError(f"{gm.dim}-D mixture but {motion.dim}-D motion model")
    if len(gm) == 0:
        return gm
    F, Q = motion.F, motion.Q
    means = gm.means @ F.T
    covs = F @ gm.covs @ F.T + Q
    covs = 0.5 * (covs + np.swapaxes(covs, 1, 2))
    return GaussianMixture(gm.weights * scale, means, covs, dim=gm.dim, validate=False)


@dataclass(frozen=True)
class MixtureUpdate:
    """Per-component innovation statistics against a set of measurements.

    ``likelihood[n, k]`` is N(z_k; H m_n, S_n); ``means[n, k]`` is the
    Kalman-updated mean of component n given measurement k.
    """

    likelihood: np.ndarray
    means: np.ndarray
    covs: np.ndarray


def _as_measurements(Z, m: int) -> np.ndarray:
    Z = np.asarray(Z, dtype=float)
    if Z.size == 0:
        return np.zeros((0, m))
    Z = Z.reshape(-1, m) if Z.ndim <= 1 and m == 1 else np.atleast_2d(Z)
    if Z.shape[1] != m:
        raise ContractError(f"measurements of dimension {Z.shape[1]} for a {m}-D sensor")
    return Z


def kalman_update(gm: GaussianMixture, Z, sensor: SensorModel) -> MixtureUpdate:
    if gm.dim != sensor.H.shape[1]:
        raise ContractError(f"{gm.dim}-D mixture but sensor expects {sensor.H.shape[1]}-D states")
    H, R = sensor.H, sensor.R
    Z = _as_measurements(Z, sensor.meas_dim)
    n, d, m = len(gm), gm.dim, sensor.meas_dim
    if n == 0:
        return MixtureUpdate(np.zeros((0, len(Z))), np.zeros((0, len(Z), d)), np.zeros((0, d, d)))
    eta = gm.means @ H.T
    PHt = gm.covs @ H.T
    S = H @ PHt + R
    S = 0.5 * (S + np.swapaxes(S, 1, 2))
    L = np.linalg.cholesky(S)
    Linv = np.linalg.inv(L)
    Sinv = np.swapaxes(Linv, 1, 2) @ Linv
    K = PHt @ Sinv
    covs = gm.covs - K @ np.swapaxes(PHt, 1, 2)
    covs = 0.5 * (covs + np.swapaxes(covs, 1, 2))
    innov = Z[None, :, :] - eta[:, None, :]
    y = np.einsum("nij,nkj->nki", Linv, innov)
    logdet = 2.0 * np.sum(np.log(np.diagonal(L, axis1=1, axis2=2)), axis=1)
    loglik = -0.5 * (np.sum(y * y, axis=-1) + logdet[:, None] + m * np.log(2 * np.pi))
    means = gm.means[:, None, :] + np.einsum("nij,nkj->nki", K, innov)
    return MixtureUpdate(np.exp(loglik), means, covs)


def posterior_mixture(weights: np.ndarray, upd: MixtureUpdate, cols=None) -> GaussianMixture:
    """All components updated with the measurements ``cols``; ``weights[n, j]`` goes with column ``cols[j]``."""
    cols = np.arange(upd.means.shape[1]) if cols is None else np.asarray(cols)
    n, k, d = upd.means.shape[0], cols.size, upd.covs.shape[-1]
    return GaussianMixture(
        np.asarray(weights).T.reshape(-1),
        np.swapaxes(upd.means[:, cols, :], 0, 1).reshape(n * k, d),
        np.broadcast_to(upd.covs, (k, n, d, d)).reshape(n * k, d, d),
        dim=d, validate=False,
    )
