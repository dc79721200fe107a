"""Arithmetic-average fusion of every density family.

Each rule averages the (labeled) PHD of its inputs and returns a density of
the same family whose (labeled) PHD is exactly Σ_i w_i D_i.  Calling any
rule with a single input returns that input unchanged.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

from ..densities import (
    BernoulliComponent,
    CardinalityPmf,
    DeltaGlmbDensity,
    GlmbDensity,
    Hypothesis,
    IidcDensity,
    Label,
    LabelSetHypothesis,
    LmbDensity,
    MbMixture,
    MglmbDensity,
    MultiBernoulli,
    PoissonDensity,
)
from ..gaussian import ContractError, GaussianMixture
from .association import DEFAULT_GATE, associate_components
from .weights import FusionWeights


@dataclass(frozen=True)
class FusionConfig:
    gate: float = DEFAULT_GATE
    top_k: int = 1
    merge_hypotheses: bool = False
    weight_mode: str = "uniform"  # or "bfom"


def _check(items: Sequence, w: FusionWeights):
    if len(items) == 0:
        raise ContractError("nothing to fuse")
    if len(items) != len(w):
        raise ContractError(f"{len(items)} inputs but {len(w)} fusion weights")


def _mix(terms: Sequence[tuple[float, GaussianMixture]], dim: int) -> GaussianMixture:
    """Σ c_k g_k over the terms with c_k > 0."""
    parts = [g.scaled(c) for c, g in terms if c > 0 and len(g)]
    return GaussianMixture.concatenate(parts) if parts else GaussianMixture.empty(dim)


def _normalized_mix(terms, dim) -> tuple[float, GaussianMixture]:
    total = sum(c for c, _ in terms if c > 0)
    if total <= 0:
        return 0.0, GaussianMixture.empty(dim)
    return total, _mix([(c / total, g) for c, g in terms], dim)


def aa_gm(mixtures: Sequence[GaussianMixture], w: FusionWeights) -> GaussianMixture:
    """Σ_i w_i D_i as a mixture: all components, each scaled by its sensor's weight."""
    _check(mixtures, w)
    if len({m.dim for m in mixtures}) != 1:
        raise ContractError("mixtures have different dimensions")
    return GaussianMixture.concatenate([m.scaled(wi) for m, wi in zip(mixtures, w)])


def aa_cardinality(pmfs: Sequence[CardinalityPmf], w: FusionWeights) -> CardinalityPmf:
    _check(pmfs, w)
    n_max = max(p.n_max for p in pmfs)
    return CardinalityPmf(sum(wi * p.padded(n_max) for p, wi in zip(pmfs, w)))


def fuse_poisson(ds: Sequence[PoissonDensity], w: FusionWeights) -> PoissonDensity:
    """λ = Σ w_i λ_i and s ∝ Σ w_i λ_i s_i.  All-zero rates give rate 0 with an empty SPD."""
    _check(ds, w)
    if len(ds) == 1:
        return ds[0]
    rate, spd = _normalized_mix([(wi * d.rate, d.spd) for d, wi in zip(ds, w)], ds[0].spd.dim)
    return PoissonDensity(rate, spd)


def fuse_iidc(ds: Sequence[IidcDensity], w: FusionWeights) -> IidcDensity:
    """ρ = Σ w_i ρ_i and s = Σ (w_i N_i / N_AA) s_i with N_i the mean cardinality."""
    _check(ds, w)
    if len(ds) == 1:
        return ds[0]
    card = aa_cardinality([d.cardinality for d in ds], w)
    _, spd = _normalized_mix([(wi * d.cardinality.mean(), d.spd) for d, wi in zip(ds, w)], ds[0].spd.dim)
    return IidcDensity(card, spd)


def fuse_bernoulli(bcs: Sequence[BernoulliComponent], w: FusionWeights) -> BernoulliComponent:
    """r = Σ w_i r_i and s = (1/r) Σ w_i r_i s_i; r = 0 gives an empty SPD."""
    _check(bcs, w)
    if len(bcs) == 1:
        return bcs[0]
    dim = next((bc.spd.dim for bc in bcs), None)
    return _fused_bc([(wi * bc.existence, bc.spd) for bc, wi in zip(bcs, w)], dim)


def _fused_bc(terms, dim) -> BernoulliComponent:
    r, spd = _normalized_mix(terms, dim)
    if r > 1.0 + 1e-12:
        raise AssertionError(f"fused existence {r} exceeds one")
    return BernoulliComponent(min(r, 1.0), spd)


def fuse_mb(mbs: Sequence[MultiBernoulli], w: FusionWeights, gate: float = DEFAULT_GATE) -> MultiBernoulli:
    """Target-wise fusion: Bernoulli fusion inside each association group.

    Weights are not renormalized within a group, so a component seen by
    sensor i alone keeps existence w_i r and the fused PHD mass is exactly
    Σ_i w_i N_i.  Groups whose fused existence is zero are dropped.
    """
    _check(mbs, w)
    if len(mbs) == 1:
        return mbs[0]
    spds = [bc.spd for mb in mbs for bc in mb]
    if not spds:
        return MultiBernoulli(())
    dim = spds[0].dim
    out = []
    for group in associate_components(mbs, gate).groups:
        terms = [(w[i] * mbs[i].components[j].existence, mbs[i].components[j].spd) for i, j in group]
        bc = _fused_bc(terms, dim)
        if bc.existence > 0:
            out.append(bc)
    return MultiBernoulli(tuple(out))


def fuse_mbm(
    mbms: Sequence[MbMixture],
    w: FusionWeights,
    top_k: int = 1,
    gate: float = DEFAULT_GATE,
    merge: bool = False,
) -> MbMixture:
    """Fuse MB mixtures through their ``top_k`` heaviest hypotheses per sensor.

    Without ``merge`` the result is the union of the selected hypotheses,
    hypothesis (i, j) weighted w_i w_{i,j} and renormalized.  With
    ``merge`` every combination of one selected hypothesis per sensor
    becomes a hypothesis with weight Π_i w_{i,j_i} (renormalized) whose MB
    is :func:`fuse_mb` of the chosen MBs, so components are only merged
    across sensors, never within one MB.  In both modes the PHD mass is
    Σ_i w_i N_i when ``top_k`` keeps every hypothesis.
    """
    _check(mbms, w)
    if top_k < 1:
        raise ContractError("top_k must be at least 1")
    if len(mbms) == 1 and top_k >= len(mbms[0].hypotheses):
        return mbms[0]
    selected = []
    for mbm in mbms:
        order = sorted(range(len(mbm.hypotheses)), key=lambda j: -mbm.hypotheses[j][0])[:top_k]
        selected.append([mbm.hypotheses[j] for j in sorted(order)])
    if not merge:
        hyps = [(wi * wh, mb) for wi, sel in zip(w, selected) for wh, mb in sel if wi * wh > 0]
        return MbMixture(tuple(hyps))
    hyps = []
    for combo in itertools.product(*selected):
        weight = float(np.prod([wh for wh, _ in combo]))
        if weight > 0:
            hyps.append((weight, fuse_mb([mb for _, mb in combo], w, gate)))
    return MbMixture(tuple(hyps))


def _any_dim(densities) -> int | None:
    for d in densities:
        if isinstance(d, LmbDensity):
            for bc in d.tracks.values():
                return bc.spd.dim
        else:
            for s in d.track_densities.values():
                return s.dim
    return None


def fuse_lmb(lmbs: Sequence[LmbDensity], w: FusionWeights) -> LmbDensity:
    """Label-wise Bernoulli fusion over the union of labels.

    A label missing at sensor i counts as existence 0 there, so its fused
    existence is Σ over the sensors holding it of w_i r_i.
    """
    _check(lmbs, w)
    if len(lmbs) == 1:
        return lmbs[0]
    dim = _any_dim(lmbs)
    labels = sorted(set().union(*(d.tracks for d in lmbs)))
    tracks = {}
    for l in labels:
        terms = [(wi * d.tracks[l].existence, d.tracks[l].spd) for d, wi in zip(lmbs, w) if l in d.tracks]
        tracks[l] = _fused_bc(terms, dim)
    return LmbDensity(tracks)


def fuse_delta_glmb(ds: Sequence[DeltaGlmbDensity], w: FusionWeights) -> DeltaGlmbDensity:
    """Hypothesis-matched fusion: ω^(L,ξ) = Σ w_i ω_i^(L,ξ), s^(ξ)(., l) the ω-weighted mixture.

    Hypotheses are matched on (label set, association id); one missing at
    a sensor counts as weight 0 there.  The coefficient of sensor i in the
    fused track density of (ξ, l) is w_i Σ_{L ∋ l} ω_i^(L,ξ), which is
    w_i ω_i^(L,ξ) whenever ξ occurs with a single label set.
    """
    _check(ds, w)
    if len(ds) == 1:
        return ds[0]
    dim = _any_dim(ds)
    fused: dict[tuple[frozenset, Hashable], float] = {}
    coeff: dict[tuple[Hashable, Label], list[tuple[float, GaussianMixture]]] = {}
    for d, wi in zip(ds, w):
        for h in d.hypotheses:
            fused[(h.labels, h.assoc)] = fused.get((h.labels, h.assoc), 0.0) + wi * h.weight
        per_track: dict[tuple[Hashable, Label], float] = {}
        for h in d.hypotheses:
            for l in h.labels:
                per_track[(h.assoc, l)] = per_track.get((h.assoc, l), 0.0) + wi * h.weight
        for key, c in per_track.items():
            coeff.setdefault(key, []).append((c, d.track_densities[key]))
    hyps = tuple(Hypothesis(L, xi, omega) for (L, xi), omega in fused.items() if omega > 0)
    needed = {(h.assoc, l) for h in hyps for l in h.labels}
    tracks = {key: _normalized_mix(coeff[key], dim)[1] for key in needed}
    return DeltaGlmbDensity(hyps, tracks)


def fuse_mglmb(ds: Sequence[MglmbDensity], w: FusionWeights) -> MglmbDensity:
    """ω^(L) = Σ w_i ω_i^(L) and s^(L)(., l) = (1/ω^(L)) Σ w_i ω_i^(L) s_i^(L)(., l)."""
    _check(ds, w)
    if len(ds) == 1:
        return ds[0]
    dim = _any_dim(ds)
    terms: dict[frozenset, list[tuple[float, MglmbDensity]]] = {}
    for d, wi in zip(ds, w):
        for h in d.hypotheses:
            terms.setdefault(h.labels, []).append((wi * h.weight, d))
    hyps, tracks = [], {}
    for L, parts in terms.items():
        omega = sum(c for c, _ in parts)
        if omega <= 0:
            continue
        hyps.append(LabelSetHypothesis(L, omega))
        for l in L:
            tracks[(L, l)] = _normalized_mix([(c, d.track_densities[(L, l)]) for c, d in parts], dim)[1]
    return MglmbDensity(tuple(hyps), tracks)


def fuse_glmb(ds: Sequence[GlmbDensity], w: FusionWeights) -> GlmbDensity:
    """Index-matched fusion: ω^(c)(L) = Σ w_i ω_i^(c)(L).

    The track density s^(c)(., l) mixes the sensors' densities with
    coefficients w_i Σ_{L ∋ l} ω_i^(c)(L) (the label-marginal weight of l
    under index c), which keeps the labeled PHD an exact average.
    """
    _check(ds, w)
    if len(ds) == 1:
        return ds[0]
    dim = _any_dim(ds)
    indices: list[Hashable] = []
    weights: dict[tuple[Hashable, frozenset], float] = {}
    coeff: dict[tuple[Hashable, Label], list[tuple[float, GaussianMixture]]] = {}
    for d, wi in zip(ds, w):
        for c in d.indices:
            if c not in indices:
                indices.append(c)
        marginal: dict[tuple[Hashable, Label], float] = {}
        for (c, L), omega in d.weights.items():
            weights[(c, L)] = weights.get((c, L), 0.0) + wi * omega
            for l in L:
                marginal[(c, l)] = marginal.get((c, l), 0.0) + wi * omega
        for key, m in marginal.items():
            if m > 0:
                coeff.setdefault(key, []).append((m, d.track_densities[key]))
    weights = {k: v for k, v in weights.items() if v > 0}
    tracks = {key: _normalized_mix(parts, dim)[1] for key, parts in coeff.items()}
    used = {c for c, _ in weights}
    return GlmbDensity(tuple(c for c in indices if c in used), weights, tracks)
