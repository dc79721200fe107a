"""Gaussian mixtures used as PHDs and single-target densities.

A mixture is stored as stacked arrays (weights ``(n,)``, means ``(n, d)``,
covariances ``(n, d, d)``) so filter recursions and fusion can stay
vectorised.  Mixtures are immutable: every operation returns a new one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np
from scipy import stats
from scipy.special import ndtr

SYMMETRY_TOL = 1e-9


class ContractError(ValueError):
    """Raised when arguments violate an operation's preconditions."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class GaussianComponent:
    weight: float
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        cov = np.atleast_2d(np.asarray(self.cov, dtype=float))
        if self.weight < 0:
            raise ContractError(f"negative component weight {self.weight}")
        if cov.shape != (mean.size, mean.size):
            raise ContractError(f"covariance shape {cov.shape} does not match mean of length {mean.size}")
        if not np.allclose(cov, cov.T, atol=SYMMETRY_TOL, rtol=0):
            raise ContractError("covariance is not symmetric")
        if np.linalg.eigvalsh(cov).min() <= 0:
            raise ContractError("covariance is not positive definite")
        object.__setattr__(self, "weight", float(self.weight))
        object.__setattr__(self, "mean", _frozen(mean))
        object.__setattr__(self, "cov", _frozen(cov))


class GaussianMixture:
    """Weighted sum of Gaussian components in ``dim`` dimensions.

    Parameters
    ----------
    weights : array_like, shape (n,)
    means : array_like, shape (n, d)
    covs : array_like, shape (n, d, d)
    dim : int, optional
        Required when the mixture is empty.
    validate : bool
        Check symmetry and positive definiteness of every covariance.
    """

    __slots__ = ("weights", "means", "covs", "dim")

    def __init__(self, weights, means, covs, dim: int | None = None, validate: bool = True):
        weights = np.asarray(weights, dtype=float).reshape(-1)
        n = weights.size
        if dim is None:
            if n == 0:
                raise ContractError("dim is required for an empty mixture")
            dim = np.asarray(means).reshape(n, -1).shape[1]
        means = np.asarray(means, dtype=float).reshape(n, dim)
        covs = np.asarray(covs, dtype=float).reshape(n, dim, dim)
        if validate and n:
            if np.any(weights < 0) or not np.all(np.isfinite(weights)):
                raise ContractError("mixture weights must be finite and nonnegative")
            if not np.allclose(covs, np.swapaxes(covs, 1, 2), atol=SYMMETRY_TOL, rtol=0):
                raise ContractError("covariance is not symmetric")
            if np.linalg.eigvalsh(covs).min() <= 0:
                raise ContractError("covariance is not positive definite")
        object.__setattr__(self, "weights", _frozen(weights))
        object.__setattr__(self, "means", _frozen(means))
        object.__setattr__(self, "covs", _frozen(covs))
        object.__setattr__(self, "dim", int(dim))

    def __setattr__(self, name, value):
        raise AttributeError("GaussianMixture is immutable")

    # construction -------------------------------------------------------

    @classmethod
    def empty(cls, dim: int) -> GaussianMixture:
        return cls(np.zeros(0), np.zeros((0, dim)), np.zeros((0, dim, dim)), dim=dim)

    @classmethod
    def single(cls, mean, cov, weight: float = 1.0) -> GaussianMixture:
        mean = np.atleast_1d(np.asarray(mean, dtype=float))
        cov = np.atleast_2d(np.asarray(cov, dtype=float))
        return cls([weight], mean[None], cov[None])

    @classmethod
    def from_components(cls, components: Sequence[GaussianComponent], dim: int | None = None) -> GaussianMixture:
        components = list(components)
        if not components:
            if dim is None:
                raise ContractError("dim is required for an empty mixture")
            return cls.empty(dim)
        return cls(
            [c.weight for c in components],
            np.stack([c.mean for c in components]),
            np.stack([c.cov for c in components]),
        )

    @classmethod
    def concatenate(cls, mixtures: Sequence[GaussianMixture]) -> GaussianMixture:
        mixtures = list(mixtures)
        if not mixtures:
            raise ContractError("nothing to concatenate")
        dim = mixtures[0].dim
        if any(m.dim != dim for m in mixtures):
            raise ContractError("mixtures have different dimensions")
        return cls(
            np.concatenate([m.weights for m in mixtures]),
            np.concatenate([m.means for m in mixtures]),
            np.concatenate([m.covs for m in mixtures]),
            dim=dim,
            validate=False,
        )

    # basic properties -----------------------------------------------------

    def __len__(self) -> int:
        return self.weights.size

    def __iter__(self) -> Iterator[GaussianComponent]:
        return iter(self.components)

    def __repr__(self) -> str:
        return f"GaussianMixture(n={len(self)}, dim={self.dim}, mass={self.mass:.6g})"

    @property
    def components(self) -> list[GaussianComponent]:
        return [GaussianComponent(w, m, P) for w, m, P in zip(self.weights, self.means, self.covs)]

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    def scaled(self, factor: float) -> GaussianMixture:
        return GaussianMixture(self.weights * factor, self.means, self.covs, dim=self.dim, validate=False)

    def normalized(self) -> GaussianMixture:
        """Return the mixture rescaled to unit mass; an empty or zero mixture stays as is."""
        m = self.mass
        if m <= 0:
            return self
        return self.scaled(1.0 / m)

    def with_weights(self, weights) -> GaussianMixture:
        return GaussianMixture(weights, self.means, self.covs, dim=self.dim, validate=False)

    def subset(self, idx) -> GaussianMixture:
        idx = np.asarray(idx)
        return GaussianMixture(self.weights[idx], self.means[idx], self.covs[idx], dim=self.dim, validate=False)

    def marginal(self, dims: Sequence[int]) -> GaussianMixture:
        dims = np.asarray(dims)
        return GaussianMixture(
            self.weights,
            self.means[:, dims],
            self.covs[:, dims[:, None], dims[None, :]],
            dim=dims.size,
            validate=False,
        )

    def moments(self) -> tuple[np.ndarray, np.ndarray]:
        """Mean and covariance of the normalized mixture (moment matching)."""
        if self.mass <= 0:
            raise ContractError("moments of a zero-mass mixture are undefined")
        w = self.weights / self.mass
        mean = w @ self.means
        d = self.means - mean
        cov = np.einsum("n,nij->ij", w, self.covs) + np.einsum("n,ni,nj->ij", w, d, d)
        return mean, 0.5 * (cov + cov.T)

    # evaluation -----------------------------------------------------------

    def pdf(self, x) -> np.ndarray | float:
        """Evaluate the mixture at one point ``(d,)`` or many points ``(m, d)``."""
        x = np.asarray(x, dtype=float)
        if x.ndim == 2:
            pts, single = x, False
        elif x.ndim <= 1 and x.size == self.dim:
            pts, single = x.reshape(1, self.dim), True
        elif x.ndim == 1 and self.dim == 1:
            pts, single = x[:, None], False
        else:
            raise ContractError(f"cannot evaluate a {self.dim}-D mixture at points of shape {x.shape}")
        if pts.shape[1] != self.dim:
            raise ContractError(f"points of dimension {pts.shape[1]} for a {self.dim}-D mixture")
        if len(self) == 0:
            out = np.zeros(pts.shape[0])
        else:
            L = np.linalg.cholesky(self.covs)
            Linv = np.linalg.inv(L)
            diff = pts[None, :, :] - self.means[:, None, :]
            y = np.einsum("nij,nmj->nmi", Linv, diff)
            maha = np.sum(y * y, axis=-1)
            logdet = 2.0 * np.sum(np.log(np.diagonal(L, axis1=1, axis2=2)), axis=1)
            logn = -0.5 * (maha + logdet[:, None] + self.dim * np.log(2 * np.pi))
            out = self.weights @ np.exp(logn)
        return float(out[0]) if single else out


def gm_mass(gm: GaussianMixture, region=None) -> float:
    """Integral of ``gm`` over an axis-aligned box, or over the whole space.

    ``region`` is ``None`` or a pair ``(lower, upper)`` of length-``dim``
    arrays; infinite bounds are allowed.
    """
    if region is None:
        return gm.mass
    lower, upper = (np.asarray(b, dtype=float) for b in region)
    if lower.size not in (1, gm.dim) or upper.size not in (1, gm.dim):
        raise ContractError(f"region dimension does not match mixture dimension {gm.dim}")
    lower, upper = (np.broadcast_to(b.reshape(-1), (gm.dim,)) for b in (lower, upper))
    if len(gm) == 0 or np.any(upper <= lower):
        return 0.0
    bounded = np.flatnonzero(np.isfinite(lower) | np.isfinite(upper))
    if bounded.size == 0:
        return gm.mass
    lo, hi = lower[bounded], upper[bounded]
    means = gm.means[:, bounded]
    covs = gm.covs[:, bounded[:, None], bounded[None, :]]
    sd = np.sqrt(np.diagonal(covs, axis1=1, axis2=2))
    probs = np.empty(len(gm))
    off = covs - np.einsum("nij,ij->nij", covs, np.eye(bounded.size))
    diagonal = np.all(np.abs(off) <= 1e-12 * (sd[:, :, None] * sd[:, None, :]), axis=(1, 2))
    if np.any(diagonal):
        p = ndtr((hi - means[diagonal]) / sd[diagonal]) - ndtr((lo - means[diagonal]) / sd[diagonal])
        probs[diagonal] = np.prod(p, axis=1)
    for k in np.flatnonzero(~diagonal):
        # correlated bounded dimensions need the joint CDF
        mvn = stats.multivariate_normal(means[k], covs[k])
        probs[k] = mvn.cdf(hi, lower_limit=lo)
    return float(gm.weights @ np.clip(probs, 0.0, 1.0))


def gm_reduce(
    gm: GaussianMixture,
    prune_threshold: float = 1e-5,
    merge_threshold: float = 4.0,
    max_components: int = 100,
) -> GaussianMixture:
    """Prune, merge and cap a mixture, keeping its total mass.

    Components lighter than ``prune_threshold`` are dropped.  The heaviest
    remaining component absorbs every component within squared Mahalanobis
    distance ``merge_threshold`` (under the heaviest component's covariance)
    by moment matching; this repeats until none remain.  At most
    ``max_components`` of the heaviest results survive, rescaled so the
    output mass equals the input mass.
    """
    if prune_threshold < 0 or merge_threshold < 0:
        raise ContractError("thresholds must be nonnegative")
    total = gm.mass
    keep = np.flatnonzero(gm.weights >= prune_threshold) if prune_threshold > 0 else np.flatnonzero(gm.weights > 0)
    if keep.size == 0:
        return GaussianMixture.empty(gm.dim)
    w, m, P = gm.weights[keep], gm.means[keep], gm.covs[keep]
    if w.size == 1:
        return GaussianMixture(np.array([total]), m, P, dim=gm.dim, validate=False)
    Pinv = np.linalg.inv(P)

    remaining = np.ones(w.size, dtype=bool)
    out_w, out_m, out_P = [], [], []
    order = np.argsort(-w, kind="stable")
    for j in order:
        if not remaining[j]:
            continue
        idx = np.flatnonzero(remaining)
        d = m[idx] - m[j]
        members = idx[np.sum((d @ Pinv[j]) * d, axis=1) <= merge_threshold]
        remaining[members] = False
        if members.size == 1:
            out_w.append(w[j])
            out_m.append(m[j])
            out_P.append(P[j])
            continue
        wm = w[members]
        sw = wm.sum()
        mean = wm @ m[members] / sw
        dm = m[members] - mean
        cov = (np.einsum("n,nij->ij", wm, P[members]) + np.einsum("n,ni,nj->ij", wm, dm, dm)) / sw
        out_w.append(sw)
        out_m.append(mean)
        out_P.append(0.5 * (cov + cov.T))

    out_w = np.array(out_w)
    if out_w.size > max_components:
        top = np.argsort(-out_w, kind="stable")[:max_components]
        top.sort()
        out_w = out_w[top]
        out_m = [out_m[i] for i in top]
        out_P = [out_P[i] for i in top]
    out_w = out_w * (total / out_w.sum())
    return GaussianMixture(out_w, np.array(out_m), np.array(out_P), dim=gm.dim, validate=False)
