"""JSON round-tripping of densities (schema ``rfs-density/1``).

Gaussian mixtures are stored with their declared dimension and row-major
nested lists.  Association identifiers and GLMB indices may be any value
built from JSON scalars, tuples and frozensets; tuples come back as tuples
and frozensets are tagged ``{"set": [...]}``.
"""

from __future__ import annotations

import json
from typing import Any

import numpy as np

from .densities import (
    BernoulliComponent,
    CardinalityPmf,
    DeltaGlmbDensity,
    GlmbDensity,
    Hypothesis,
    IidcDensity,
    LabelSetHypothesis,
    LmbDensity,
    MbMixture,
    MglmbDensity,
    MultiBernoulli,
    PoissonDensity,
)
from .gaussian import ContractError, GaussianMixture

SCHEMA = "rfs-density/1"


class SchemaError(ContractError):
    pass


def _enc(v) -> Any:
    if isinstance(v, (frozenset, set)):
        items = [_enc(x) for x in v]
        return {"set": sorted(items, key=lambda x: json.dumps(x, sort_keys=True))}
    if isinstance(v, (tuple, list)):
        return [_enc(x) for x in v]
    if isinstance(v, (np.integer, np.floating)):
        return v.item()
    if v is None or isinstance(v, (bool, int, float, str)):
        return v
    raise SchemaError(f"cannot serialize identifier of type {type(v).__name__}")


def _dec(v) -> Any:
    if isinstance(v, dict):
        if set(v) != {"set"}:
            raise SchemaError(f"unexpected object {v!r}")
        return frozenset(_dec(x) for x in v["set"])
    if isinstance(v, list):
        return tuple(_dec(x) for x in v)
    return v


def _gm(g: GaussianMixture) -> dict:
    return {"dim": g.dim, "weights": g.weights.tolist(), "means": g.means.tolist(), "covs": g.covs.tolist()}


def _gm_from(d: dict) -> GaussianMixture:
    dim = int(d["dim"])
    n = len(d["weights"])
    return GaussianMixture(
        np.asarray(d["weights"], dtype=float),
        np.asarray(d["means"], dtype=float).reshape(n, dim),
        np.asarray(d["covs"], dtype=float).reshape(n, dim, dim),
        dim=dim,
    )


def _bc(bc: BernoulliComponent) -> dict:
    return {"r": bc.existence, "spd": _gm(bc.spd)}


def _bc_from(d: dict) -> BernoulliComponent:
    return BernoulliComponent(d["r"], _gm_from(d["spd"]))


def _mb(mb: MultiBernoulli) -> list:
    return [_bc(bc) for bc in mb]


def _mb_from(items: list) -> MultiBernoulli:
    return MultiBernoulli(tuple(_bc_from(x) for x in items))


def to_dict(density) -> dict:
    if isinstance(density, PoissonDensity):
        body = {"family": "poisson", "rate": density.rate, "spd": _gm(density.spd)}
    elif isinstance(density, IidcDensity):
        c = density.cardinality
        body = {"family": "iidc", "cardinality": c.probs.tolist(), "truncated_mass": c.truncated_mass,
                "spd": _gm(density.spd)}
    elif isinstance(density, BernoulliComponent):
        body = {"family": "bernoulli", **_bc(density)}
    elif isinstance(density, MultiBernoulli):
        body = {"family": "mb", "components": _mb(density)}
    elif isinstance(density, MbMixture):
        body = {"family": "mbm", "hypotheses": [{"weight": w, "components": _mb(mb)} for w, mb in density.hypotheses]}
    elif isinstance(density, LmbDensity):
        body = {"family": "lmb", "tracks": [{"label": list(l), **_bc(bc)} for l, bc in density.tracks.items()]}
    elif isinstance(density, DeltaGlmbDensity):
        body = {
            "family": "delta-glmb",
            "hypotheses": [{"labels": _enc(h.labels), "assoc": _enc(h.assoc), "weight": h.weight}
                           for h in density.hypotheses],
            "tracks": [{"assoc": _enc(a), "label": list(l), "spd": _gm(s)}
                       for (a, l), s in density.track_densities.items()],
        }
    elif isinstance(density, MglmbDensity):
        body = {
            "family": "m-glmb",
            "hypotheses": [{"labels": _enc(h.labels), "weight": h.weight} for h in density.hypotheses],
            "tracks": [{"labels": _enc(L), "label": list(l), "spd": _gm(s)}
                       for (L, l), s in density.track_densities.items()],
        }
    elif isinstance(density, GlmbDensity):
        body = {
            "family": "glmb",
            "indices": [_enc(c) for c in density.indices],
            "weights": [{"index": _enc(c), "labels": _enc(L), "weight": w} for (c, L), w in density.weights.items()],
            "tracks": [{"index": _enc(c), "label": list(l), "spd": _gm(s)}
                       for (c, l), s in density.track_densities.items()],
        }
    elif isinstance(density, GaussianMixture):
        body = {"family": "gm", "mixture": _gm(density)}
    else:
        raise SchemaError(f"cannot serialize {type(density).__name__}")
    return {"schema": SCHEMA, **body}


def from_dict(doc: dict):
    if doc.get("schema") != SCHEMA:
        raise SchemaError(f"unsupported schema {doc.get('schema')!r}")
    family = doc.get("family")
    if family == "poisson":
        return PoissonDensity(doc["rate"], _gm_from(doc["spd"]))
    if family == "iidc":
        pmf = CardinalityPmf(np.asarray(doc["cardinality"], dtype=float), doc.get("truncated_mass", 0.0))
        return IidcDensity(pmf, _gm_from(doc["spd"]))
    if family == "bernoulli":
        return _bc_from(doc)
    if family == "mb":
        return _mb_from(doc["components"])
    if family == "mbm":
        return MbMixture(tuple((h["weight"], _mb_from(h["components"])) for h in doc["hypotheses"]))
    if family == "lmb":
        return LmbDensity({tuple(t["label"]): _bc_from(t) for t in doc["tracks"]})
    if family == "delta-glmb":
        hyps = tuple(Hypothesis(_dec(h["labels"]), _dec(h["assoc"]), h["weight"]) for h in doc["hypotheses"])
        tracks = {(_dec(t["assoc"]), tuple(t["label"])): _gm_from(t["spd"]) for t in doc["tracks"]}
        return DeltaGlmbDensity(hyps, tracks)
    if family == "m-glmb":
        hyps = tuple(LabelSetHypothesis(_dec(h["labels"]), h["weight"]) for h in doc["hypotheses"])
        tracks = {(_dec(t["labels"]), tuple(t["label"])): _gm_from(t["spd"]) for t in doc["tracks"]}
        return MglmbDensity(hyps, tracks)
    if family == "glmb":
        weights = {(_dec(w["index"]), _dec(w["labels"])): w["weight"] for w in doc["weights"]}
        tracks = {(_dec(t["index"]), tuple(t["label"])): _gm_from(t["spd"]) for t in doc["tracks"]}
        return GlmbDensity(tuple(_dec(c) for c in doc["indices"]), weights, tracks)
    if family == "gm":
        return _gm_from(doc["mixture"])
    raise SchemaError(f"unknown family {family!r}")


def dumps(density, **kwargs) -> str:
    return json.dumps(to_dict(density), **kwargs)


def loads(text: str):
    return from_dict(json.loads(text))
