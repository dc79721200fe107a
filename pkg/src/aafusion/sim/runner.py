"""Multi-sensor simulation loop with pluggable fusion."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..consensus import ConsensusState, Reduction, metropolis_weights, run_consensus
from ..densities import BernoulliComponent, LmbDensity
from ..filters import extract_states, lmb_predict, lmb_update, phd_predict, phd_update
from ..fusion import FusionWeights, aa_gm, bfom_weights, fuse_lmb, ga_fuse_phd_grid
from ..gaussian import GaussianMixture, gm_mass
from ..grid import GridDensity, evaluate_on_grid
from .config import BlindWindow, ScenarioConfig, SensorSpec, TargetScript
from .metrics import ospa
from .truth import generate_measurements, generate_truth

POSITION = [0, 2]


@dataclass(frozen=True)
class MetricsRecord:
    run: int
    step: int
    node: str
    ospa: float
    cardinality_estimate: float
    cardinality_truth: int

    @property
    def cardinality_error2(self) -> float:
        return (self.cardinality_estimate - self.cardinality_truth) ** 2


@dataclass(frozen=True)
class RunResult:
    run: int
    records: tuple[MetricsRecord, ...]

    def nodes(self) -> list[str]:
        return list(dict.fromkeys(r.node for r in self.records))

    def summary(self) -> dict[str, dict[str, float]]:
        """Per node: mean OSPA and mean squared cardinality error over the run."""
        out = {}
        for node in self.nodes():
            recs = [r for r in self.records if r.node == node]
            out[node] = {
                "mean_ospa": float(np.mean([r.ospa for r in recs])),
                "mean_card_err2": float(np.mean([r.cardinality_error2 for r in recs])),
            }
        return out


def run_streams(seed: int, run: int, sensors: int) -> tuple[np.random.Generator, list[np.random.Generator]]:
    """Truth stream and one measurement stream per sensor, split from ``(seed, run)``."""
    truth = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(run, 0)))
    per_sensor = [np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(run, 1 + i))) for i in range(sensors)]
    return truth, per_sensor


def position_grid(cfg: ScenarioConfig) -> GridDensity:
    lo, hi = (np.asarray(b, float) for b in cfg.region)
    num = np.round((hi - lo) / cfg.ga_resolution).astype(int) + 1
    return GridDensity.regular(lo, hi, num)


def grid_phd(phd: GaussianMixture, grid: GridDensity) -> GridDensity:
    return evaluate_on_grid(phd.marginal(POSITION), grid)


def grid_peaks(g: GridDensity, n: int, separation: float) -> np.ndarray:
    """Greedy ``n`` highest grid points at least ``separation`` apart."""
    pts, vals = g.points, g.values.copy()
    out = []
    for _ in range(n):
        k = int(np.argmax(vals))
        if vals[k] <= 0:
            break
        out.append(pts[k])
        vals[np.sum((pts - pts[k]) ** 2, axis=1) < separation**2] = 0.0
    return np.array(out).reshape(-1, g.dim)


class _LocalFilter:
    """Predict/update/estimate for one filter family with fixed models."""

    def __init__(self, cfg: ScenarioConfig):
        self.kind = cfg.filter
        self.motion = cfg.motion()
        self.birth = cfg.birth()
        self.reduction = Reduction()

    def initial(self):
        return GaussianMixture.empty(4) if self.kind == "phd" else LmbDensity({})

    def step(self, prior, Z, sensor, t: int):
        if self.kind == "phd":
            return phd_update(phd_predict(prior, self.motion, self.birth), Z, sensor, self.reduction)
        return lmb_update(lmb_predict(prior, self.motion, self.birth, t), Z, sensor, self.reduction)

    def estimate(self, post) -> tuple[np.ndarray, float]:
        states = extract_states(post)
        pos = np.array([x[POSITION] for x, _ in states]).reshape(-1, 2)
        if self.kind == "phd":
            return pos, post.mass
        return pos, float(sum(bc.existence for bc in post.tracks.values()))

    def phd(self, post) -> GaussianMixture:
        if self.kind == "phd":
            return post
        parts = [bc.spd.scaled(bc.existence) for bc in post.tracks.values() if bc.existence > 0]
        return GaussianMixture.concatenate(parts) if parts else GaussianMixture.empty(4)

    def fuse(self, posts, w: FusionWeights):
        if self.kind == "phd":
            return self.reduction(aa_gm(posts, w))
        fused = fuse_lmb(posts, w)
        tracks = {l: bc for l, bc in fused.tracks.items() if bc.existence >= 1e-4}
        return LmbDensity({l: BernoulliComponent(bc.existence, self.reduction(bc.spd).normalized())
                           for l, bc in tracks.items()})


def fusion_weights(cfg: ScenarioConfig, phds: list[GaussianMixture], grid: GridDensity) -> FusionWeights:
    """Uniform weights, or BFoM weights of the normalized position PHDs on the grid."""
    n = len(phds)
    if cfg.weights == "uniform" or n == 1:
        return FusionWeights.uniform(n)
    gs = [grid_phd(p, grid) for p in phds]
    if any(g.mass <= 0 for g in gs):
        return FusionWeights(FusionWeights.uniform(n).weights, fallback=True)
    return bfom_weights([g.normalized() for g in gs])


def run_scenario(cfg: ScenarioConfig, run: int = 0,
                 observer: Callable[[int, dict], None] | None = None) -> RunResult:
    """Simulate one Monte-Carlo run.

    Every sensor always runs a standalone local filter (nodes ``local-i``).
    Depending on ``cfg.fusion`` a fused estimate is added: ``aa`` fuses the
    sensor posteriors centrally and feeds the result back as every sensor's
    next prior (node ``fused``); ``ga`` fuses the standalone posteriors on
    the position grid (node ``fused``); ``consensus`` runs networked nodes
    that average with their neighbours after each update (nodes ``node-i``).
    ``observer`` receives the step index and the step's intermediate
    densities, for experiments that need more than the metrics.
    """
    filt = _LocalFilter(cfg)
    truth_rng, sensor_rngs = run_streams(cfg.seed, run, cfg.sensor_count)
    truth = generate_truth(cfg, truth_rng)
    sensors = [cfg.sensor_model(i) for i in range(cfg.sensor_count)]
    grid = position_grid(cfg) if cfg.fusion == "ga" or cfg.weights == "bfom" else None
    W = metropolis_weights(cfg.graph()) if cfg.fusion == "consensus" else None

    local = [filt.initial() for _ in sensors]
    networked = [filt.initial() for _ in sensors]
    records = []
    for t in range(cfg.duration):
        blind = [[b.target for b in cfg.blind if b.sensor == i and b.start <= t < b.end] for i in range(len(sensors))]
        scans = [generate_measurements(truth[t], s, rng, blind[i]) for i, (s, rng) in enumerate(zip(sensors, sensor_rngs))]
        truth_pos = np.array([x[POSITION] for x, _ in truth[t]]).reshape(-1, 2)

        def record(node, pos, card):
            records.append(MetricsRecord(run, t, node, ospa(pos, truth_pos, cfg.ospa_cutoff, cfg.ospa_order),
                                         float(card), len(truth[t])))

        local = [filt.step(p, Z, s, t) for p, Z, s in zip(local, scans, sensors)]
        for i, post in enumerate(local):
            record(f"local-{i}", *filt.estimate(post))
        info: dict = {"truth": truth[t], "local": local}

        if cfg.fusion == "aa":
            posts = [filt.step(p, Z, s, t) for p, Z, s in zip(networked, scans, sensors)]
            w = fusion_weights(cfg, [filt.phd(p) for p in posts] if cfg.weights == "bfom" else posts, grid)
            fused = filt.fuse(posts, w)
            networked = [fused] * len(sensors)
            record("fused", *filt.estimate(fused))
            info.update(networked_local=posts, fused=fused, weights=w)
        elif cfg.fusion == "ga":
            w = fusion_weights(cfg, local, grid)
            fused = ga_fuse_phd_grid([grid_phd(p, grid) for p in local], w)
            n = int(np.round(fused.mass))
            sep = 3.0 * max(s.sigma for s in cfg.sensors)
            record("fused", grid_peaks(fused, n, sep), fused.mass)
            info.update(fused=fused, weights=w)
        elif cfg.fusion == "consensus":
            posts = [filt.step(p, Z, s, t) for p, Z, s in zip(networked, scans, sensors)]
            state = run_consensus(ConsensusState(tuple(posts)), W, cfg.consensus_iters)
            networked = list(state.per_node)
            for i, post in enumerate(networked):
                record(f"node-{i}", *filt.estimate(post))
            info.update(networked_local=posts, consensus=state)
        if observer is not None:
            observer(t, info)
    return RunResult(run, tuple(records))


def run_monte_carlo(cfg: ScenarioConfig, runs: int | None = None) -> list[RunResult]:
    return [run_scenario(cfg, r) for r in range(cfg.mc_runs if runs is None else runs)]


def aggregate(results: list[RunResult]) -> dict[str, dict[str, float]]:
    """Per node: means over runs of the per-run mean OSPA and squared cardinality error."""
    per_run = [r.summary() for r in results]
    nodes = list(dict.fromkeys(n for s in per_run for n in s))
    return {
        n: {k: float(np.mean([s[n][k] for s in per_run])) for k in ("mean_ospa", "mean_card_err2")}
        for n in nodes
    }


# ---------------------------------------------------------------------------
# misdetection robustness


@dataclass(frozen=True)
class GateCheck:
    step: int
    aa_mass: float
    detecting_mean: float
    aa_grid_mass: float
    ga_grid_mass: float

    def bound(self, sensors: int) -> float:
        return (sensors - 1) / sensors * self.detecting_mean - 0.05

    def ok(self, sensors: int) -> bool:
        return self.aa_mass >= self.bound(sensors) and self.ga_grid_mass < self.aa_grid_mass


def misdetection_robustness_experiment(cfg: ScenarioConfig, run: int = 0, gate_sigmas: float = 3.0,
                                       gate_points: int = 61) -> list[GateCheck]:
    """Gate masses of the AA and GA fusion while one sensor is blind to one target.

    ``cfg`` must use AA fusion of PHD filters and define exactly one blind
    window.  At each blind step the gate is the box of ±``gate_sigmas``
    measurement standard deviations around the target's true position.
    The AA mass is exact; both fusions are also integrated on a fine grid
    over the gate so that they are compared under the same quadrature.
    """
    if cfg.fusion != "aa" or cfg.filter != "phd" or len(cfg.blind) != 1:
        raise ValueError("the experiment needs AA fusion of PHD filters and one blind window")
    win = cfg.blind[0]
    half = gate_sigmas * cfg.sensors[win.sensor].sigma
    checks: list[GateCheck] = []

    def observe(t, info):
        if not win.start <= t < win.end:
            return
        pos = next((x[POSITION] for x, tid in info["truth"] if tid == win.target), None)
        if pos is None:
            return
        lo, hi = pos - half, pos + half
        posts, fused, w = info["networked_local"], info["fused"], info["weights"]
        box = GridDensity.regular(lo, hi, gate_points)
        # trapezoid rule over the gate box
        edge = np.ones(gate_points)
        edge[[0, -1]] = 0.5
        wts = np.multiply.outer(edge, edge).reshape(-1) * box.cell_volume
        local_grids = [grid_phd(p, box) for p in posts]
        ga = ga_fuse_phd_grid(local_grids, w)
        aa_grid = sum(wi * g.values for wi, g in zip(w, local_grids))
        detecting = [gm_mass(p.marginal(POSITION), (lo, hi)) for i, p in enumerate(posts) if i != win.sensor]
        checks.append(GateCheck(
            step=t,
            aa_mass=gm_mass(fused.marginal(POSITION), (lo, hi)),
            detecting_mean=float(np.mean(detecting)),
            aa_grid_mass=float(wts @ aa_grid),
            ga_grid_mass=float(wts @ ga.values),
        ))

    run_scenario(cfg, run, observer=observe)
    return checks


def misdetection_scenario(**changes) -> ScenarioConfig:
    """Four sensors tracking two targets; sensor 3 misses target 0 for steps 10 to 19."""
    base = dict(
        duration=25,
        sensors=tuple(SensorSpec(0.95, 5.0, 1.0) for _ in range(4)),
        targets=(TargetScript(0, 25, (-30.0, 1.0, 0.0, 0.5)), TargetScript(0, 25, (30.0, -1.0, 20.0, -0.5))),
        blind=(BlindWindow(sensor=3, target=0, start=10, end=20),),
        fusion="aa",
    )
    base.update(changes)
    return ScenarioConfig(**base)
