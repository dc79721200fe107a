"""Unlabeled and labeled multi-target density families.

Every family stores its single-target densities (SPDs) as normalized
:class:`~aafusion.gaussian.GaussianMixture` objects.  The oracle code in
:mod:`aafusion.grid` also plugs :class:`~aafusion.grid.GridDensity` values
into the same slots; anything with ``mass``, ``normalized()`` and ``pdf()``
works.

All values are immutable after construction.  An SPD whose mass drifts
from one by more than ``SPD_TOL`` is renormalized with a warning, since
filter recursions accumulate rounding error.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Hashable, Mapping, NamedTuple

import numpy as np

from .gaussian import ContractError, GaussianMixture

SPD_TOL = 1e-9
DEFAULT_N_MAX = 32


class DensityWarning(UserWarning):
    pass


def _check_spd(spd, allow_empty: bool = False, what: str = "SPD"):
    mass = spd.mass
    if allow_empty and mass == 0:
        return spd
    if mass <= 0:
        raise ContractError(f"{what} has zero mass")
    if abs(mass - 1.0) > SPD_TOL:
        warnings.warn(f"{what} mass {mass!r} renormalized to 1", DensityWarning, stacklevel=3)
        return spd.normalized()
    return spd


# ---------------------------------------------------------------------------
# cardinality


@dataclass(frozen=True)
class CardinalityPmf:
    """Probability mass function of the target count over ``n = 0..n_max``.

    ``truncated_mass`` records how much probability fell beyond ``n_max``
    before renormalization; anything above 1e-6 means the truncation was
    too aggressive.
    """

    probs: np.ndarray
    truncated_mass: float = 0.0

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float).reshape(-1)
        if p.size == 0 or np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ContractError("cardinality probabilities must be finite and nonnegative")
        total = p.sum()
        if abs(total - 1.0) > SPD_TOL:
            if total <= 0:
                raise ContractError("cardinality distribution has zero mass")
            warnings.warn(f"cardinality mass {total!r} renormalized to 1", DensityWarning, stacklevel=3)
            p = p / total
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @classmethod
    def from_dict(cls, probs: Mapping[int, float]) -> CardinalityPmf:
        n_max = max(probs)
        p = np.zeros(n_max + 1)
        for n, v in probs.items():
            p[n] = v
        return cls(p)

    @classmethod
    def poisson(cls, rate: float, n_max: int = DEFAULT_N_MAX) -> CardinalityPmf:
        if rate < 0:
            raise ContractError("Poisson rate must be nonnegative")
        if rate == 0:
            p = np.zeros(n_max + 1)
            p[0] = 1.0
            return cls(p)
        n = np.arange(n_max + 1)
        p = np.exp(-rate + n * math.log(rate) - np.array([math.lgamma(k + 1) for k in n]))
        kept = p.sum()
        return cls(p / kept, truncated_mass=max(0.0, 1.0 - kept))

    @property
    def n_max(self) -> int:
        return self.probs.size - 1

    @property
    def truncated(self) -> bool:
        return self.truncated_mass > 1e-6

    def __getitem__(self, n: int) -> float:
        return float(self.probs[n]) if 0 <= n <= self.n_max else 0.0

    def mean(self) -> float:
        return float(np.arange(self.probs.size) @ self.probs)

    def variance(self) -> float:
        n = np.arange(self.probs.size)
        return float((n * n) @ self.probs - self.mean() ** 2)

    def padded(self, n_max: int) -> np.ndarray:
        out = np.zeros(max(n_max, self.n_max) + 1)
        out[: self.probs.size] = self.probs
        return out


# ---------------------------------------------------------------------------
# unlabeled families


@dataclass(frozen=True)
class PoissonDensity:
    rate: float
    spd: GaussianMixture

    def __post_init__(self):
        if self.rate < 0:
            raise ContractError("Poisson rate must be nonnegative")
        object.__setattr__(self, "rate", float(self.rate))
        object.__setattr__(self, "spd", _check_spd(self.spd, allow_empty=self.rate == 0))


@dataclass(frozen=True)
class IidcDensity:
    cardinality: CardinalityPmf
    spd: GaussianMixture

    def __post_init__(self):
        object.__setattr__(self, "spd", _check_spd(self.spd, allow_empty=self.cardinality.mean() == 0))


@dataclass(frozen=True)
class BernoulliComponent:
    """Bernoulli RFS: at most one target, present with probability ``existence``.

    A component with ``existence == 0`` may carry an empty SPD.
    """

    existence: float
    spd: GaussianMixture

    def __post_init__(self):
        r = float(self.existence)
        if not 0.0 <= r <= 1.0:
            raise ContractError(f"existence probability {r} outside [0, 1]")
        object.__setattr__(self, "existence", r)
        object.__setattr__(self, "spd", _check_spd(self.spd, allow_empty=r == 0))


@dataclass(frozen=True)
class MultiBernoulli:
    components: tuple[BernoulliComponent, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))

    def __len__(self) -> int:
        return len(self.components)

    def __iter__(self):
        return iter(self.components)


@dataclass(frozen=True)
class MbMixture:
    """Weighted mixture of multi-Bernoulli hypotheses.

    Hypothesis weights are normalized on construction.
    """

    hypotheses: tuple[tuple[float, MultiBernoulli], ...]

    def __post_init__(self):
        hyps = tuple((float(w), mb) for w, mb in self.hypotheses)
        if not hyps:
            raise ContractError("an MB mixture needs at least one hypothesis")
        weights = np.array([w for w, _ in hyps])
        if np.any(weights < 0) or weights.sum() <= 0:
            raise ContractError("hypothesis weights must be nonnegative with positive sum")
        weights = weights / weights.sum()
        object.__setattr__(self, "hypotheses", tuple((float(w), mb) for w, (_, mb) in zip(weights, hyps)))

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.hypotheses])


# ---------------------------------------------------------------------------
# labeled families


class Label(NamedTuple):
    """Track label ``(birth time; index among births at that time)``."""

    birth_time: int
    birth_index: int

    def __str__(self) -> str:
        return f"({self.birth_time};{self.birth_index})"


def _labelset(labels) -> frozenset:
    return frozenset(Label(*l) for l in labels)


@dataclass(frozen=True)
class LmbDensity:
    tracks: Mapping[Label, BernoulliComponent] = field(default_factory=dict)

    def __post_init__(self):
        tracks = {Label(*l): bc for l, bc in sorted(dict(self.tracks).items())}
        object.__setattr__(self, "tracks", MappingProxyType(tracks))

    @property
    def labels(self) -> tuple[Label, ...]:
        return tuple(self.tracks)

    def __len__(self) -> int:
        return len(self.tracks)


class Hypothesis(NamedTuple):
    """δ-GLMB hypothesis: label set, association history identifier, weight."""

    labels: frozenset
    assoc: Hashable
    weight: float


class LabelSetHypothesis(NamedTuple):
    labels: frozenset
    weight: float


def _normalized_weights(weights: np.ndarray, what: str) -> np.ndarray:
    if np.any(weights < 0) or not np.all(np.isfinite(weights)):
        raise ContractError(f"{what} weights must be finite and nonnegative")
    total = weights.sum()
    if total <= 0:
        raise ContractError(f"{what} weights sum to zero")
    if abs(total - 1.0) > SPD_TOL:
        warnings.warn(f"{what} weights summing to {total!r} renormalized", DensityWarning, stacklevel=4)
        weights = weights / total
    return weights


def _checked_tracks(track_densities, key) -> MappingProxyType:
    out = {}
    for k, spd in track_densities.items():
        k = key(k)
        out[k] = _check_spd(spd, what=f"track density {k}")
    return MappingProxyType(out)


@dataclass(frozen=True)
class DeltaGlmbDensity:
    """δ-GLMB density.

    ``track_densities`` maps ``(assoc, label)`` to the normalized SPD of
    that track under association history ``assoc``.
    """

    hypotheses: tuple[Hypothesis, ...]
    track_densities: Mapping[tuple[Hashable, Label], GaussianMixture]

    def __post_init__(self):
        hyps = [Hypothesis(_labelset(h[0]), h[1], float(h[2])) for h in self.hypotheses]
        w = _normalized_weights(np.array([h.weight for h in hyps]), "hypothesis")
        hyps = tuple(h._replace(weight=float(x)) for h, x in zip(hyps, w))
        tracks = _checked_tracks(self.track_densities, lambda k: (k[0], Label(*k[1])))
        for h in hyps:
            for l in h.labels:
                if (h.assoc, l) not in tracks:
                    raise ContractError(f"missing track density for association {h.assoc!r}, label {l}")
        object.__setattr__(self, "hypotheses", hyps)
        object.__setattr__(self, "track_densities", tracks)

    @property
    def labels(self) -> tuple[Label, ...]:
        return tuple(sorted(set().union(*(h.labels for h in self.hypotheses))))


@dataclass(frozen=True)
class MglmbDensity:
    """Marginal δ-GLMB: one track density per (label set, label)."""

    hypotheses: tuple[LabelSetHypothesis, ...]
    track_densities: Mapping[tuple[frozenset, Label], GaussianMixture]

    def __post_init__(self):
        hyps = [LabelSetHypothesis(_labelset(h[0]), float(h[1])) for h in self.hypotheses]
        if len({h.labels for h in hyps}) != len(hyps):
            raise ContractError("label sets of an M-GLMB must be distinct")
        w = _normalized_weights(np.array([h.weight for h in hyps]), "hypothesis")
        hyps = tuple(h._replace(weight=float(x)) for h, x in zip(hyps, w))
        tracks = _checked_tracks(self.track_densities, lambda k: (_labelset(k[0]), Label(*k[1])))
        for h in hyps:
            for l in h.labels:
                if (h.labels, l) not in tracks:
                    raise ContractError(f"missing track density for label set {set(h.labels)}, label {l}")
        object.__setattr__(self, "hypotheses", hyps)
        object.__setattr__(self, "track_densities", tracks)

    @property
    def labels(self) -> tuple[Label, ...]:
        return tuple(sorted(set().union(*(h.labels for h in self.hypotheses))))


@dataclass(frozen=True)
class GlmbDensity:
    """General GLMB over a discrete index set.

    ``weights`` maps ``(c, label_set)`` to ω^(c)(L); ``track_densities``
    maps ``(c, label)`` to s^(c)(., label).
    """

    indices: tuple[Hashable, ...]
    weights: Mapping[tuple[Hashable, frozenset], float]
    track_densities: Mapping[tuple[Hashable, Label], GaussianMixture]

    def __post_init__(self):
        keys = [(c, _labelset(L)) for c, L in self.weights]
        w = _normalized_weights(np.array([float(v) for v in self.weights.values()]), "GLMB")
        weights = MappingProxyType(dict(zip(keys, map(float, w))))
        tracks = _checked_tracks(self.track_densities, lambda k: (k[0], Label(*k[1])))
        indices = tuple(self.indices)
        for (c, L), v in weights.items():
            if c not in indices:
                raise ContractError(f"weight refers to unknown index {c!r}")
            if v > 0:
                for l in L:
                    if (c, l) not in tracks:
                        raise ContractError(f"missing track density for index {c!r}, label {l}")
        object.__setattr__(self, "indices", indices)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "track_densities", tracks)

    @property
    def labels(self) -> tuple[Label, ...]:
        return tuple(sorted(set().union(*(L for _, L in self.weights))))


# ---------------------------------------------------------------------------
# conversions between labeled families


def delta_glmb_to_glmb(d: DeltaGlmbDensity) -> GlmbDensity:
    """Encode a δ-GLMB as a GLMB with index set C = {(L, ξ)}."""
    indices, weights, tracks = [], {}, {}
    for h in d.hypotheses:
        c = (h.labels, h.assoc)
        indices.append(c)
        weights[(c, h.labels)] = h.weight
        for l in h.labels:
            tracks[(c, l)] = d.track_densities[(h.assoc, l)]
    return GlmbDensity(tuple(indices), weights, tracks)


def marginalize_delta_glmb(d: DeltaGlmbDensity) -> MglmbDensity:
    """Sum out association histories: ω^(L) = Σ_ξ ω^(L,ξ), s^(L) the ω-weighted SPD mixture."""
    by_set: dict[frozenset, list[Hypothesis]] = {}
    for h in d.hypotheses:
        by_set.setdefault(h.labels, []).append(h)
    hyps, tracks = [], {}
    for L, group in by_set.items():
        wL = sum(h.weight for h in group)
        hyps.append(LabelSetHypothesis(L, wL))
        if wL <= 0:
            continue
        for l in L:
            parts = [d.track_densities[(h.assoc, l)].scaled(h.weight / wL) for h in group if h.weight > 0]
            tracks[(L, l)] = GaussianMixture.concatenate(parts)
    kept = [h for h in hyps if h.weight > 0]
    return MglmbDensity(tuple(kept), tracks)


def lmb_from_delta_glmb(d: DeltaGlmbDensity) -> LmbDensity:
    """LMB matching the δ-GLMB's labeled PHD: r^(l) = Σ_{L∋l} Σ_ξ ω^(L,ξ)."""
    tracks = {}
    for l in d.labels:
        parts = [(h.weight, d.track_densities[(h.assoc, l)]) for h in d.hypotheses if l in h.labels and h.weight > 0]
        r = sum(w for w, _ in parts)
        if r <= 0:
            continue
        spd = GaussianMixture.concatenate([s.scaled(w / r) for w, s in parts])
        tracks[l] = BernoulliComponent(min(r, 1.0), spd)
    return LmbDensity(tracks)
