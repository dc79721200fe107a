"""Closed-form first moments, cardinalities and set densities of every family."""

from __future__ import annotations

import itertools
import math
from typing import Sequence

import numpy as np

from .densities import (
    DEFAULT_N_MAX,
    BernoulliComponent,
    CardinalityPmf,
    DeltaGlmbDensity,
    GlmbDensity,
    IidcDensity,
    Label,
    LmbDensity,
    MbMixture,
    MglmbDensity,
    MultiBernoulli,
    PoissonDensity,
)
from .gaussian import ContractError, GaussianMixture

SET_EVAL_N_MAX = 4


class UnsupportedCardinality(ContractError):
    """The requested set is too large for exact assignment enumeration."""


def _first_spd(density):
    if isinstance(density, (PoissonDensity, IidcDensity, BernoulliComponent)):
        return density.spd
    if isinstance(density, MultiBernoulli):
        return next((bc.spd for bc in density), None)
    if isinstance(density, MbMixture):
        return next((bc.spd for _, mb in density.hypotheses for bc in mb), None)
    if isinstance(density, LmbDensity):
        return next((bc.spd for bc in density.tracks.values()), None)
    if isinstance(density, (DeltaGlmbDensity, MglmbDensity, GlmbDensity)):
        return next(iter(density.track_densities.values()), None)
    raise TypeError(f"unsupported density type {type(density).__name__}")


def _dim(density, dim):
    if dim is not None:
        return dim
    spd = _first_spd(density)
    if spd is None:
        raise ContractError("cannot infer the state dimension of an empty density; pass dim")
    return spd.dim


def _mb_phd(mb: MultiBernoulli, scale: float, dim: int) -> list[GaussianMixture]:
    return [bc.spd.scaled(scale * bc.existence) for bc in mb if bc.existence > 0]


def phd_of(density, dim: int | None = None) -> GaussianMixture:
    """PHD of an unlabeled density as a Gaussian mixture.

    Poisson: λ s.  IIDC: (Σ n ρ(n)) s.  Bernoulli: r s.  MB: Σ r_l s_l.
    MB mixture: Σ_j w_j Σ_l r_{j,l} s_{j,l}.
    """
    if isinstance(density, PoissonDensity):
        return density.spd.scaled(density.rate) if density.rate > 0 else GaussianMixture.empty(density.spd.dim)
    if isinstance(density, IidcDensity):
        n_hat = density.cardinality.mean()
        return density.spd.scaled(n_hat) if n_hat > 0 else GaussianMixture.empty(density.spd.dim)
    if isinstance(density, BernoulliComponent):
        return density.spd.scaled(density.existence) if density.existence > 0 else GaussianMixture.empty(density.spd.dim)
    if not isinstance(density, (MultiBernoulli, MbMixture)):
        raise TypeError(f"phd_of does not handle {type(density).__name__}; use lphd_of for labeled densities")
    d = _dim(density, dim)
    if isinstance(density, MultiBernoulli):
        parts = _mb_phd(density, 1.0, d)
    else:
        parts = [p for w, mb in density.hypotheses if w > 0 for p in _mb_phd(mb, w, d)]
    return GaussianMixture.concatenate(parts) if parts else GaussianMixture.empty(d)


def lphd_of(density, label, dim: int | None = None) -> GaussianMixture:
    """Labeled PHD D(., l) of a labeled density; the zero mixture for unknown labels."""
    label = Label(*label)
    d = _dim(density, dim)
    parts: list[GaussianMixture] = []
    if isinstance(density, LmbDensity):
        bc = density.tracks.get(label)
        if bc is not None and bc.existence > 0:
            parts.append(bc.spd.scaled(bc.existence))
    elif isinstance(density, DeltaGlmbDensity):
        parts = [density.track_densities[(h.assoc, label)].scaled(h.weight)
                 for h in density.hypotheses if label in h.labels and h.weight > 0]
    elif isinstance(density, MglmbDensity):
        parts = [density.track_densities[(h.labels, label)].scaled(h.weight)
                 for h in density.hypotheses if label in h.labels and h.weight > 0]
    elif isinstance(density, GlmbDensity):
        for c in density.indices:
            marginal = sum(w for (cc, L), w in density.weights.items() if cc == c and label in L)
            if marginal > 0:
                parts.append(density.track_densities[(c, label)].scaled(marginal))
    else:
        raise TypeError(f"lphd_of does not handle {type(density).__name__}")
    return GaussianMixture.concatenate(parts) if parts else GaussianMixture.empty(d)


def label_marginals(density) -> dict[Label, float]:
    """Mass of each label's LPHD (the label's existence probability)."""
    return {l: lphd_of(density, l).mass for l in density.labels}


# ---------------------------------------------------------------------------
# cardinality


def _truncate(p: np.ndarray, n_max: int) -> CardinalityPmf:
    if p.size <= n_max + 1:
        return CardinalityPmf(p)
    kept = p[: n_max + 1]
    lost = float(p[n_max + 1:].sum())
    return CardinalityPmf(kept / kept.sum(), truncated_mass=lost)


def _mb_cardinality(existences: Sequence[float]) -> np.ndarray:
    p = np.array([1.0])
    for r in existences:
        p = np.convolve(p, [1.0 - r, r])
    return p


def _labelset_cardinality(pairs) -> np.ndarray:
    pairs = list(pairs)
    p = np.zeros(max((len(L) for L, _ in pairs), default=0) + 1)
    for L, w in pairs:
        p[len(L)] += w
    return p


def cardinality_of(density, n_max: int = DEFAULT_N_MAX) -> CardinalityPmf:
    """Cardinality distribution, truncated at ``n_max`` and renormalized."""
    if isinstance(density, PoissonDensity):
        return CardinalityPmf.poisson(density.rate, n_max)
    if isinstance(density, IidcDensity):
        return _truncate(density.cardinality.probs, n_max)
    if isinstance(density, BernoulliComponent):
        return CardinalityPmf([1.0 - density.existence, density.existence])
    if isinstance(density, MultiBernoulli):
        return _truncate(_mb_cardinality([bc.existence for bc in density]), n_max)
    if isinstance(density, MbMixture):
        pmfs = [(w, _mb_cardinality([bc.existence for bc in mb])) for w, mb in density.hypotheses]
        p = np.zeros(max(q.size for _, q in pmfs))
        for w, q in pmfs:
            p[: q.size] += w * q
        return _truncate(p, n_max)
    if isinstance(density, LmbDensity):
        return _truncate(_mb_cardinality([bc.existence for bc in density.tracks.values()]), n_max)
    if isinstance(density, DeltaGlmbDensity):
        return _truncate(_labelset_cardinality((h.labels, h.weight) for h in density.hypotheses), n_max)
    if isinstance(density, MglmbDensity):
        return _truncate(_labelset_cardinality((h.labels, h.weight) for h in density.hypotheses), n_max)
    if isinstance(density, GlmbDensity):
        return _truncate(_labelset_cardinality((L, w) for (_, L), w in density.weights.items()), n_max)
    raise TypeError(f"unsupported density type {type(density).__name__}")


# ---------------------------------------------------------------------------
# set densities


def _as_points(X, dim: int | None) -> list[np.ndarray]:
    if X is None:
        return []
    if isinstance(X, np.ndarray):
        if X.size == 0:
            return []
        X = X.reshape(-1, dim) if dim is not None and X.ndim == 1 and dim > 1 else X
        if X.ndim == 1:
            return [np.atleast_1d(x) for x in X]
        return [np.asarray(x) for x in X]
    return [np.atleast_1d(np.asarray(x, dtype=float)) for x in X]


def _spd_values(spd, points: list[np.ndarray]) -> np.ndarray:
    if not points or spd.mass == 0:
        return np.zeros(len(points))
    return np.asarray(spd.pdf(np.stack(points)), dtype=float).reshape(len(points))


def _mb_set_density(mb: MultiBernoulli, points: list[np.ndarray]) -> float:
    n, m = len(points), len(mb)
    if n > m:
        return 0.0
    r = np.array([bc.existence for bc in mb])
    # table[l, k] = r_l s_l(x_k)
    table = np.array([r[l] * _spd_values(bc.spd, points) for l, bc in enumerate(mb)]).reshape(m, n)
    miss = 1.0 - r
    total = 0.0
    for assigned in itertools.permutations(range(m), n):
        term = 1.0
        for k, l in enumerate(assigned):
            term *= table[l, k]
        if term == 0.0:
            continue
        used = set(assigned)
        for l in range(m):
            if l not in used:
                term *= miss[l]
        total += term
    return total


def set_density_eval(density, X, n_max: int = SET_EVAL_N_MAX) -> float:
    """Multi-target density f(X) of an unlabeled family at the finite set ``X``.

    MB and MB-mixture densities sum over every assignment of set elements to
    Bernoulli components, so ``|X|`` is limited to ``n_max``.
    """
    dim = _first_spd(density).dim if _first_spd(density) is not None else None
    points = _as_points(X, dim)
    n = len(points)
    if isinstance(density, PoissonDensity):
        vals = _spd_values(density.spd, points)
        return float(math.exp(-density.rate) * np.prod(density.rate * vals))
    if isinstance(density, IidcDensity):
        return float(math.factorial(n) * density.cardinality[n] * np.prod(_spd_values(density.spd, points)))
    if isinstance(density, BernoulliComponent):
        if n == 0:
            return 1.0 - density.existence
        if n == 1:
            return float(density.existence * _spd_values(density.spd, points)[0])
        return 0.0
    if isinstance(density, (MultiBernoulli, MbMixture)):
        if n > n_max:
            raise UnsupportedCardinality(f"|X| = {n} exceeds the enumeration limit {n_max}")
        if isinstance(density, MultiBernoulli):
            return _mb_set_density(density, points)
        return float(sum(w * _mb_set_density(mb, points) for w, mb in density.hypotheses))
    raise TypeError(f"set_density_eval does not handle {type(density).__name__}")


def labeled_set_density_eval(density, X) -> float:
    """Labeled multi-target density π(X̃) at a set of ``(state, label)`` pairs."""
    pairs = [(np.atleast_1d(np.asarray(x, dtype=float)), Label(*l)) for x, l in X]
    labels = [l for _, l in pairs]
    if len(set(labels)) != len(labels):
        return 0.0
    L = frozenset(labels)

    def product(lookup) -> float:
        out = 1.0
        for x, l in pairs:
            spd = lookup(l)
            if spd is None:
                return 0.0
            out *= float(np.asarray(spd.pdf(x[None]))[0])
        return out

    if isinstance(density, LmbDensity):
        if not L <= set(density.tracks):
            return 0.0
        out = 1.0
        for l, bc in density.tracks.items():
            out *= bc.existence if l in L else 1.0 - bc.existence
        return out * product(lambda l: density.tracks[l].spd)
    if isinstance(density, DeltaGlmbDensity):
        return sum(h.weight * product(lambda l, a=h.assoc: density.track_densities[(a, l)])
                   for h in density.hypotheses if h.labels == L)
    if isinstance(density, MglmbDensity):
        return sum(h.weight * product(lambda l, s=h.labels: density.track_densities[(s, l)])
                   for h in density.hypotheses if h.labels == L)
    if isinstance(density, GlmbDensity):
        return sum(w * product(lambda l, c=c: density.track_densities.get((c, l)))
                   for (c, LL), w in density.weights.items() if LL == L and w > 0)
    raise TypeError(f"labeled_set_density_eval does not handle {type(density).__name__}")
