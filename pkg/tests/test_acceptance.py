"""Acceptance criteria, each run at its stated tolerance and reported as one PASS/FAIL line."""

import time

import numpy as np
import pytest

from aafusion import (
    BernoulliComponent,
    GridDensity,
    delta_glmb_to_glmb,
    kl_grid,
    lphd_of,
    phd_of,
    set_density_eval,
)
from aafusion.consensus import ConsensusState, SensorGraph, metropolis_weights, run_consensus
from aafusion.fusion import (
    aa_fuse_grid,
    bfom_weights,
    fuse_bernoulli,
    fuse_delta_glmb,
    fuse_glmb,
    fuse_iidc,
    fuse_lmb,
    fuse_mb,
    fuse_mbm,
    fuse_mglmb,
    fuse_poisson,
    ga_fuse_grid,
)
from aafusion.grid import gridded_phd
from aafusion.oracle_suite import FAMILIES, ORACLE_TOL, run_oracle_suite
from aafusion.sim import (
    aggregate,
    crossing_scenario,
    misdetection_robustness_experiment,
    misdetection_scenario,
    mse_consistency_experiment,
    run_monte_carlo,
)
from factories import (
    LABELS,
    hypothesis_universe,
    plane_grid,
    random_delta_glmb,
    random_glmb,
    random_lmb,
    random_mglmb,
    random_spd,
    random_unlabeled,
    random_weights,
)

PLANE = plane_grid()
PLANE_PTS = PLANE.points


def _pointwise(gm):
    return gm.pdf(PLANE_PTS) if len(gm) else np.zeros(len(PLANE_PTS))


# 1 ---------------------------------------------------------------------------


def test_oracle_equivalence(acceptance):
    start = time.perf_counter()
    checks = run_oracle_suite(seed=2024, per_family=4)
    seconds = time.perf_counter() - start
    worst = max(c.max_error for c in checks)
    covered = sorted({c.family for c in checks}) == sorted(FAMILIES)
    ok = all(c.passed for c in checks) and covered and seconds < 60
    assert acceptance(1, "brute-force oracle equivalence", ok,
                      f"{len(checks)} instances over {len(FAMILIES)} families, max per-cell error {worst:.1e} "
                      f"(tol {ORACLE_TOL:.0e}), {seconds:.1f}s (limit 60s)")


# 2 ---------------------------------------------------------------------------

UNLABELED = {"poisson": fuse_poisson, "iidc": fuse_iidc, "bernoulli": fuse_bernoulli, "mb": fuse_mb, "mbm": fuse_mbm}


def _unlabeled_case(family, rng):
    n = int(rng.integers(2, 5))
    ds = [random_unlabeled(family, rng) for _ in range(n)]
    w = random_weights(rng, n)
    if family == "mbm":
        # the PHD identity concerns the full mixtures, so every hypothesis is kept
        fused = fuse_mbm(ds, w, top_k=max(len(d.hypotheses) for d in ds))
    else:
        fused = UNLABELED[family](ds, w)
    got = phd_of(fused)
    mass_err = abs(got.mass - sum(wi * phd_of(d).mass for wi, d in zip(w, ds)))
    point_err = np.max(np.abs(_pointwise(got) - sum(wi * _pointwise(phd_of(d)) for wi, d in zip(w, ds))))
    return mass_err, point_err


def _labeled_case(family, rng):
    n = int(rng.integers(2, 5))
    if family == "lmb":
        ds = [random_lmb(rng) for _ in range(n)]
        rule = fuse_lmb
    elif family == "delta-glmb":
        universe = hypothesis_universe(rng, 6)
        ds = [random_delta_glmb(rng, universe) for _ in range(n)]
        rule = fuse_delta_glmb
    elif family == "m-glmb":
        universe = list(dict.fromkeys(L for L, _ in hypothesis_universe(rng, 6, unique_assoc=True)))
        ds = [random_mglmb(rng, universe) for _ in range(n)]
        rule = fuse_mglmb
    else:
        ds = [random_glmb(rng) for _ in range(n)]
        rule = fuse_glmb
    w = random_weights(rng, n)
    fused = rule(ds, w)
    mass_err = point_err = 0.0
    for label in LABELS:
        parts = [(wi, lphd_of(d, label)) for wi, d in zip(w, ds) if label in d.labels]
        got = lphd_of(fused, label) if label in fused.labels else None
        if not parts:
            assert got is None or got.mass == 0
            continue
        mass_err = max(mass_err, abs(got.mass - sum(wi * g.mass for wi, g in parts)))
        point_err = max(point_err, np.max(np.abs(_pointwise(got) - sum(wi * _pointwise(g) for wi, g in parts))))
    return mass_err, point_err


def test_fusion_commutation(acceptance):
    rng = np.random.default_rng(7)
    worst = {}
    for family in UNLABELED:
        worst[family] = np.max([_unlabeled_case(family, rng) for _ in range(100)], axis=0)
    for family in ("lmb", "delta-glmb", "m-glmb", "glmb"):
        worst[family] = np.max([_labeled_case(family, rng) for _ in range(100)], axis=0)
    mass = max(m for m, _ in worst.values())
    point = max(p for _, p in worst.values())
    ok = mass <= 1e-9 and point <= 1e-6
    assert acceptance(2, "(L)PHD-AA commutation", ok,
                      f"100 instances x {len(worst)} families, 2-4 sensors: max mass error {mass:.1e} (tol 1e-9), "
                      f"max pointwise error {point:.1e} (tol 1e-6)")


# 3 ---------------------------------------------------------------------------


def test_bernoulli_mpd_identity(acceptance):
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(2, 5))
        bcs = [BernoulliComponent(rng.uniform(), random_spd(rng, 2)) for _ in range(n)]
        w = random_weights(rng, n)
        fused = fuse_bernoulli(bcs, w)
        x = rng.normal(scale=2.0, size=2)
        for X in ([], [x]):
            expected = sum(wi * set_density_eval(bc, X) for wi, bc in zip(w, bcs))
            got = set_density_eval(fused, X)
            if expected > 0:
                worst = max(worst, abs(got - expected) / expected)
            else:
                worst = max(worst, abs(got))
    assert acceptance(3, "Bernoulli MPD-AA identity", worst <= 1e-12,
                      f"1000 random draws, X in {{empty, {{x}}}}: max relative error {worst:.1e} (tol 1e-12)")


# 4 ---------------------------------------------------------------------------


def test_mse_consistency(acceptance):
    start = time.perf_counter()
    rows = mse_consistency_experiment([2, 4, 8, 16], 100_000, sigma=1.0)
    seconds = time.perf_counter() - start
    worst = max(r.relative_error for r in rows)
    decreasing = all(b.empirical < a.empirical for a, b in zip(rows, rows[1:]))
    ok = worst <= 0.05 and decreasing and seconds < 30
    table = ", ".join(f"I={r.sensors}: {r.empirical:.4f}" for r in rows)
    assert acceptance(4, "MSE consistency", ok,
                      f"{table}; max relative error {worst:.3f} (tol 0.05), strictly decreasing={decreasing}, "
                      f"{seconds:.1f}s (limit 30s)")


# 5 ---------------------------------------------------------------------------


def _random_grid_densities(rng, grid, n):
    out = []
    for _ in range(n):
        spd = random_spd(rng, 1, max_components=3, spread=3.0)
        out.append(gridded_phd(spd, grid).normalized())
    return out


def test_aa_minimizes_weighted_kl(acceptance):
    rng = np.random.default_rng(5)
    grid = GridDensity.regular(-10.0, 10.0, 201)
    margins = []
    for _ in range(25):
        n = int(rng.integers(2, 5))
        fs = _random_grid_densities(rng, grid, n)
        w = random_weights(rng, n)

        def objective(g):
            return sum(wi * kl_grid(f, g) for wi, f in zip(w, fs))

        aa = objective(aa_fuse_grid(fs, w))
        rivals = [objective(ga_fuse_grid(fs, w))] + [objective(f) for f in fs]
        margins.append(min(rivals) - aa)
    worst = min(margins)
    assert acceptance(5, "AA minimizes the weighted KL", worst >= 1e-9,
                      f"25 instances: smallest margin over GA and each input {worst:.2e} (required >= 1e-9)")


# 6 ---------------------------------------------------------------------------

LINE = GridDensity.regular(-10.0, 10.0, 201)


def _gaussian(grid, mean, var):
    pts = grid.points
    v = np.exp(-0.5 * np.sum((pts - mean) ** 2, axis=1) / var)
    return grid.with_values(v).normalized()


def _simplex_search(ps, step=0.001, chunk=20_000):
    """Exhaustive search over the open simplex at ``step`` resolution.

    Among grid points whose objective is within 1e-12 of the best one, the
    point closest to the uniform weights is returned (the maximizer is not
    unique when inputs repeat).
    """
    n = len(ps)
    vals = np.stack([p.values for p in ps])
    vol = ps[0].cell_volume
    k = int(round(1 / step))
    ticks = np.arange(1, k)
    if n == 2:
        W = np.stack([ticks, k - ticks], axis=1) / k
    else:
        a, b = np.meshgrid(ticks, ticks, indexing="ij")
        keep = a + b < k
        W = np.stack([a[keep], b[keep], k - a[keep] - b[keep]], axis=1) / k
    obj = np.empty(len(W))
    pos = vals > 0
    logf = np.where(pos, np.log(np.where(pos, vals, 1.0)), 0.0)
    for s in range(0, len(W), chunk):
        Wc = W[s:s + chunk]
        mix = Wc @ vals
        logm = np.log(mix)
        kl = np.sum(vals * logf, axis=1)[None, :] - logm @ vals.T
        obj[s:s + chunk] = np.sum(Wc * kl, axis=1) * vol
    best = obj.max()
    ties = np.flatnonzero(obj >= best - 1e-12)
    uniform = np.full(n, 1.0 / n)
    return W[ties[np.argmin(np.linalg.norm(W[ties] - uniform, axis=1))]]


def test_weight_optimizer(acceptance):
    cases = {
        "I=2 unequal widths": [_gaussian(LINE, -1.0, 1.0), _gaussian(LINE, 2.0, 4.0)],
        "I=2 shifted": [_gaussian(LINE, 0.0, 0.5), _gaussian(LINE, 1.5, 2.0)],
        "I=3 two identical + one distinct": [_gaussian(LINE, 0.0, 1.0), _gaussian(LINE, 0.0, 1.0),
                                             _gaussian(LINE, 3.0, 2.0)],
        "I=3 distinct": [_gaussian(LINE, -2.0, 1.0), _gaussian(LINE, 0.5, 3.0), _gaussian(LINE, 2.5, 0.7)],
    }
    worst = 0.0
    for ps in cases.values():
        w = bfom_weights(ps).as_array()
        ref = _simplex_search(ps)
        worst = max(worst, np.max(np.abs(w - ref)))
    plane = GridDensity.regular([-8.0, -8.0], [8.0, 8.0], 161)
    angles = np.deg2rad([90.0, 210.0, 330.0])
    symmetric = {
        "I=2 mirror images": [_gaussian(LINE, -2.0, 1.0), _gaussian(LINE, 2.0, 1.0)],
        "I=3 equilateral": [_gaussian(plane, 2.0 * np.array([np.cos(a), np.sin(a)]), 1.0) for a in angles],
    }
    sym = max(np.max(np.abs(bfom_weights(ps).as_array() - 1 / len(ps))) for ps in symmetric.values())
    ok = worst <= 0.01 and sym <= 0.01
    assert acceptance(6, "BFoM weight optimizer", ok,
                      f"{len(cases)} test sets vs 0.001 simplex grid search: max coordinate gap {worst:.4f} (tol 0.01); "
                      f"symmetric inputs max gap from uniform {sym:.4f} (tol 0.01)")


# 7 ---------------------------------------------------------------------------


def test_consensus_equals_centralized(acceptance):
    rng = np.random.default_rng(8)
    nodes = [random_spd(rng, 2, max_components=4, spread=5.0).scaled(rng.uniform(0.5, 4.0)) for _ in range(8)]
    central = float(np.mean([g.mass for g in nodes]))
    W = metropolis_weights(SensorGraph.ring(8))
    state = run_consensus(ConsensusState(tuple(nodes)), W, 50)
    gap = max(abs(m - central) / central for m in state.masses)
    totals = [sum(h) for h in state.mass_history]
    drift = max(abs(b - a) / a for a, b in zip(totals, totals[1:]))
    ok = gap <= 0.01 and drift <= 1e-3
    assert acceptance(7, "consensus equals centralized AA", ok,
                      f"8-node ring, 50 Metropolis iterations: max node mass gap {gap:.2e} (tol 1e-2), "
                      f"max per-step network mass drift {drift:.2e} (tol 1e-3)")


# 8 ---------------------------------------------------------------------------


def test_misdetection_robustness(acceptance):
    cfg = misdetection_scenario()
    start = time.perf_counter()
    checks = misdetection_robustness_experiment(cfg)
    seconds = time.perf_counter() - start
    I = cfg.sensor_count
    blind_steps = cfg.blind[0].end - cfg.blind[0].start
    bound_ok = all(c.aa_mass >= c.bound(I) for c in checks)
    ga_ok = all(c.ga_grid_mass < c.aa_grid_mass for c in checks)
    slack = min(c.aa_mass - c.bound(I) for c in checks)
    ok = len(checks) == blind_steps and bound_ok and ga_ok and seconds < 120
    assert acceptance(8, "misdetection robustness", ok,
                      f"{len(checks)}/{blind_steps} blind steps, AA gate mass bound met={bound_ok} (min slack {slack:.3f}), "
                      f"GA < AA at every step={ga_ok}, {seconds:.1f}s (limit 120s)")


# 9 ---------------------------------------------------------------------------


@pytest.mark.slow
def test_tracking_benefit(acceptance):
    cfg = crossing_scenario()
    start = time.perf_counter()
    results = run_monte_carlo(cfg, 100)
    seconds = time.perf_counter() - start
    summary = aggregate(results)
    local = {k: v for k, v in summary.items() if k.startswith("local-")}
    worst_local = max(v["mean_ospa"] for v in local.values())
    mean_local_card = float(np.mean([v["mean_card_err2"] for v in local.values()]))
    fused = summary["fused"]
    ok = fused["mean_ospa"] < worst_local and fused["mean_card_err2"] < mean_local_card and seconds < 600
    assert acceptance(9, "end-to-end tracking benefit", ok,
                      f"100 runs: fused OSPA {fused['mean_ospa']:.3f} vs worst local {worst_local:.3f}; "
                      f"fused card err^2 {fused['mean_card_err2']:.3f} vs local mean {mean_local_card:.3f}; "
                      f"{seconds:.0f}s (limit 600s)")


# 10 --------------------------------------------------------------------------


def test_cross_encoding(acceptance):
    rng = np.random.default_rng(10)
    w_err = l_err = 0.0
    for _ in range(50):
        n = int(rng.integers(2, 5))
        universe = hypothesis_universe(rng, 6)
        ds = [random_delta_glmb(rng, universe) for _ in range(n)]
        w = random_weights(rng, n)
        direct = fuse_delta_glmb(ds, w)
        encoded = fuse_glmb([delta_glmb_to_glmb(d) for d in ds], w)
        direct_w = {((h.labels, h.assoc), h.labels): h.weight for h in direct.hypotheses}
        for key in set(direct_w) | set(encoded.weights):
            w_err = max(w_err, abs(direct_w.get(key, 0.0) - encoded.weights.get(key, 0.0)))
        for label in set(direct.labels) | set(encoded.labels):
            a = _pointwise(lphd_of(direct, label))
            b = _pointwise(lphd_of(encoded, label))
            l_err = max(l_err, np.max(np.abs(a - b)))
    ok = w_err <= 1e-9 and l_err <= 1e-6
    assert acceptance(10, "delta-GLMB / GLMB cross-encoding", ok,
                      f"50 instances: max weight gap {w_err:.1e} (tol 1e-9), max gridded LPHD gap {l_err:.1e} (tol 1e-6)")
