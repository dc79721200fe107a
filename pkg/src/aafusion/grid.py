"""Densities tabulated on finite grids, plus brute-force set-integral oracles.

The oracles discretize the set integral

    D(y) = Σ_n 1/n! Σ_{x_1..x_n} (Σ_k δ_{x_k}(y)) f({x_1..x_n}) vol^n

over a small grid.  Before enumerating, every SPD of the density is
replaced by its cell-averaged version: the Gaussian mass of each grid cell
divided by the cell volume, with the outermost cells absorbing the tails.
The discretized SPDs then sum to exactly one, so the enumeration is an
exact discrete set integral, and the result must equal the closed-form PHD
projected onto the same cells.
"""

from __future__ import annotations

import functools
import itertools
import math
from collections import Counter
from dataclasses import dataclass

import numpy as np
from scipy import stats
from scipy.special import ndtr

from .densities import (
    BernoulliComponent,
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
from .phd import labeled_set_density_eval, set_density_eval

ORACLE_MAX_POINTS = 12


class GridTooLarge(ContractError):
    pass


@dataclass(frozen=True, eq=False)
class GridDensity:
    """Nonnegative values on a regular axis-aligned grid.

    ``axes`` holds the coordinate vector of each dimension; ``points`` is
    their Cartesian product in C order.  ``values`` are density values, so
    the mass of the grid is ``values.sum() * cell_volume``.
    """

    axes: tuple[np.ndarray, ...]
    values: np.ndarray

    def __post_init__(self):
        axes = tuple(np.asarray(a, dtype=float).reshape(-1) for a in self.axes)
        for a in axes:
            if a.size < 1 or (a.size > 1 and not np.allclose(np.diff(a), a[1] - a[0], rtol=1e-9, atol=0)):
                raise ContractError("grid axes must be evenly spaced")
            a.setflags(write=False)
        values = np.asarray(self.values, dtype=float).reshape(-1)
        if values.size != math.prod(a.size for a in axes):
            raise ContractError("value count does not match the grid size")
        if not np.all(np.isfinite(values)):
            raise ContractError("grid values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "values", values)

    @classmethod
    def regular(cls, lower, upper, num) -> GridDensity:
        """Zero-valued grid with ``num`` points per axis spanning ``[lower, upper]``."""
        lower, upper = np.atleast_1d(lower).astype(float), np.atleast_1d(upper).astype(float)
        num = np.broadcast_to(np.atleast_1d(num), lower.shape)
        axes = tuple(np.linspace(lo, hi, int(k)) for lo, hi, k in zip(lower, upper, num))
        return cls(axes, np.zeros(math.prod(int(k) for k in num)))

    # geometry ---------------------------------------------------------------

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(a.size for a in self.axes)

    def __len__(self) -> int:
        return self.values.size

    @property
    def spacing(self) -> np.ndarray:
        return np.array([a[1] - a[0] if a.size > 1 else 1.0 for a in self.axes])

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def points(self) -> np.ndarray:
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack([m.reshape(-1) for m in mesh], axis=1)

    def cell_boxes(self, open_edges: bool = True) -> tuple[np.ndarray, np.ndarray]:
        """Lower and upper corners of every cell; edge cells extend to infinity."""
        lows, highs = [], []
        for a, h in zip(self.axes, self.spacing):
            lo, hi = a - h / 2, a + h / 2
            if open_edges:
                lo = lo.copy()
                hi = hi.copy()
                lo[0], hi[-1] = -np.inf, np.inf
            lows.append(lo)
            highs.append(hi)
        lo_mesh = np.meshgrid(*lows, indexing="ij")
        hi_mesh = np.meshgrid(*highs, indexing="ij")
        return (np.stack([m.reshape(-1) for m in lo_mesh], axis=1),
                np.stack([m.reshape(-1) for m in hi_mesh], axis=1))

    def same_grid(self, other: GridDensity) -> bool:
        return len(self.axes) == len(other.axes) and all(
            a.shape == b.shape and np.allclose(a, b, rtol=0, atol=1e-12) for a, b in zip(self.axes, other.axes))

    def index_of(self, x) -> int | None:
        """Flat index of the cell containing ``x``, or ``None`` outside the grid."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        idx = []
        for xi, a, h in zip(x, self.axes, self.spacing):
            k = int(np.floor((xi - a[0]) / h + 0.5))
            if k < 0 or k >= a.size:
                return None
            idx.append(k)
        return int(np.ravel_multi_index(idx, self.shape))

    # density interface ----------------------------------------------------

    @property
    def mass(self) -> float:
        return float(self.values.sum() * self.cell_volume)

    @property
    def is_degenerate(self) -> bool:
        return not np.any(self.values > 0)

    def with_values(self, values) -> GridDensity:
        return GridDensity(self.axes, values)

    def normalized(self) -> GridDensity:
        m = self.mass
        return self if m <= 0 else self.with_values(self.values / m)

    def scaled(self, factor: float) -> GridDensity:
        return self.with_values(self.values * factor)

    def pdf(self, x):
        """Value of the cell containing each point (zero outside the grid)."""
        x = np.asarray(x, dtype=float)
        pts = x.reshape(-1, self.dim)
        out = np.array([self.values[k] if (k := self.index_of(p)) is not None else 0.0 for p in pts])
        return float(out[0]) if (x.ndim <= 1 and x.size == self.dim) else out

    def region_mass(self, lower, upper) -> float:
        """Mass of the grid points falling inside the box ``[lower, upper]``."""
        pts = self.points
        inside = np.all((pts >= np.asarray(lower)) & (pts <= np.asarray(upper)), axis=1)
        return float(self.values[inside].sum() * self.cell_volume)


# ---------------------------------------------------------------------------
# mixtures on grids


def evaluate_on_grid(gm: GaussianMixture, grid: GridDensity) -> GridDensity:
    """Pointwise evaluation of a mixture at the grid points."""
    if gm.dim != grid.dim:
        raise ContractError("mixture and grid dimensions differ")
    return grid.with_values(gm.pdf(grid.points))


def project_onto_grid(gm: GaussianMixture, grid: GridDensity) -> GridDensity:
    """Cell-averaged mixture: cell mass / cell volume, edge cells absorbing the tails.

    Each component's CDF is evaluated once on the lattice of cell corners;
    cell masses are its differences along every axis.
    """
    if gm.dim != grid.dim:
        raise ContractError("mixture and grid dimensions differ")
    edges = []
    for a, h in zip(grid.axes, grid.spacing):
        e = np.r_[a - h / 2, a[-1] + h / 2]
        e[0], e[-1] = -np.inf, np.inf
        edges.append(e)
    corners = np.stack([m.reshape(-1) for m in np.meshgrid(*edges, indexing="ij")], axis=1)
    at_minus_inf = np.any(corners == -np.inf, axis=1)
    shape = tuple(e.size for e in edges)
    mass = np.zeros(grid.shape)
    for w, mean, cov in zip(gm.weights, gm.means, gm.covs):
        sd = np.sqrt(np.diag(cov))
        if np.allclose(cov, np.diag(np.diag(cov)), rtol=0, atol=1e-12 * sd.max() ** 2):
            per_axis = [np.diff(ndtr((e - m) / s)) for e, m, s in zip(edges, mean, sd)]
            cell = functools.reduce(np.multiply.outer, per_axis)
        else:
            cdf = np.zeros(len(corners))
            cdf[~at_minus_inf] = stats.multivariate_normal(mean, cov).cdf(corners[~at_minus_inf])
            cell = cdf.reshape(shape)
            for axis in range(grid.dim):
                cell = np.diff(cell, axis=axis)
        mass += w * np.clip(cell, 0.0, None)
    return grid.with_values(mass.reshape(-1) / grid.cell_volume)


def map_spds(density, fn):
    """Rebuild ``density`` with every SPD replaced by ``fn(spd)``."""
    if isinstance(density, PoissonDensity):
        return PoissonDensity(density.rate, fn(density.spd))
    if isinstance(density, IidcDensity):
        return IidcDensity(density.cardinality, fn(density.spd))
    if isinstance(density, BernoulliComponent):
        return BernoulliComponent(density.existence, fn(density.spd))
    if isinstance(density, MultiBernoulli):
        return MultiBernoulli(tuple(map_spds(bc, fn) for bc in density))
    if isinstance(density, MbMixture):
        return MbMixture(tuple((w, map_spds(mb, fn)) for w, mb in density.hypotheses))
    if isinstance(density, LmbDensity):
        return LmbDensity({l: map_spds(bc, fn) for l, bc in density.tracks.items()})
    if isinstance(density, DeltaGlmbDensity):
        return DeltaGlmbDensity(density.hypotheses, {k: fn(s) for k, s in density.track_densities.items()})
    if isinstance(density, MglmbDensity):
        return MglmbDensity(density.hypotheses, {k: fn(s) for k, s in density.track_densities.items()})
    if isinstance(density, GlmbDensity):
        return GlmbDensity(density.indices, density.weights, {k: fn(s) for k, s in density.track_densities.items()})
    raise TypeError(f"unsupported density type {type(density).__name__}")


def discretize(density, grid: GridDensity):
    """Replace Gaussian SPDs by their cell averages on ``grid``; grid SPDs pass through."""
    def fn(spd):
        if isinstance(spd, GridDensity):
            if not spd.same_grid(grid):
                raise ContractError("SPD tabulated on a different grid")
            return spd
        if spd.mass == 0:
            return grid.with_values(np.zeros(len(grid)))
        return project_onto_grid(spd, grid)
    return map_spds(density, fn)


# ---------------------------------------------------------------------------
# oracles


def _check_oracle_grid(grid: GridDensity, max_points: int):
    if len(grid) > max_points:
        raise GridTooLarge(f"oracle grid has {len(grid)} points; at most {max_points} allowed")


def brute_force_phd(density, grid: GridDensity, n_max: int = 4, max_points: int = ORACLE_MAX_POINTS) -> GridDensity:
    """PHD by exhaustive enumeration of the discretized set integral.

    Enumerates every multiset of grid points of size at most ``n_max``; a
    multiset with multiplicities ``c_j`` stands for ``n!/Π c_j!`` ordered
    tuples, which cancels the ``1/n!`` of the set integral.
    """
    _check_oracle_grid(grid, max_points)
    disc = discretize(density, grid)
    pts = grid.points
    vol = grid.cell_volume
    phd = np.zeros(len(grid))
    for n in range(1, n_max + 1):
        for combo in itertools.combinations_with_replacement(range(len(grid)), n):
            f = set_density_eval(disc, pts[list(combo)], n_max=n_max)
            if f == 0.0:
                continue
            counts = Counter(combo)
            coeff = f * vol ** n / math.prod(math.factorial(c) for c in counts.values())
            for k, c in counts.items():
                phd[k] += c * coeff
    return grid.with_values(phd / vol)


def brute_force_lphd(density, label, grid: GridDensity, n_max: int = 4,
                     max_points: int = ORACLE_MAX_POINTS) -> GridDensity:
    """Labeled PHD D(y, l) = ∫ π({(y, l)} ∪ X̃) δX̃ by exhaustive enumeration.

    Label sets are enumerated over the density's label universe; the states
    of the other tracks run over all grid points.
    """
    _check_oracle_grid(grid, max_points)
    label = Label(*label)
    disc = discretize(density, grid)
    pts = grid.points
    vol = grid.cell_volume
    others = [l for l in density.labels if l != label]
    out = np.zeros(len(grid))
    for k, y in enumerate(pts):
        total = 0.0
        for size in range(0, min(len(others), n_max - 1) + 1):
            for rest in itertools.combinations(others, size):
                for states in itertools.product(range(len(grid)), repeat=size):
                    X = [(y, label)] + [(pts[s], l) for s, l in zip(states, rest)]
                    total += labeled_set_density_eval(disc, X) * vol ** size
        out[k] = total
    return grid.with_values(out)


def gridded_phd(gm: GaussianMixture, grid: GridDensity) -> GridDensity:
    """Closed-form PHD projected onto the oracle's cells, for comparison with the brute force."""
    return project_onto_grid(gm, grid) if len(gm) else grid.with_values(np.zeros(len(grid)))


def kl_grid(p: GridDensity, q: GridDensity) -> float:
    """Σ p log(p/q) · vol, with 0 log 0 = 0 and +inf where q = 0 < p."""
    if not p.same_grid(q):
        raise ContractError("KL divergence needs both densities on the same grid")
    pv, qv = p.values, q.values
    pos = pv > 0
    if np.any(qv[pos] <= 0):
        return math.inf
    kl = float(np.sum(pv[pos] * np.log(pv[pos] / qv[pos])) * p.cell_volume)
    # rounding can push a zero divergence slightly negative
    return 0.0 if -1e-12 < kl < 0 else kl
