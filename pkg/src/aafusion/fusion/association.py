"""Cross-sensor grouping of Bernoulli components that describe the same target."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..densities import MultiBernoulli
from ..gaussian import ContractError

DEFAULT_GATE = 9.21  # chi-square 99% quantile, 2 degrees of freedom


@dataclass(frozen=True)
class AssociationResult:
    """Groups of ``(sensor, component)`` pairs, at most one per sensor in each group."""

    groups: tuple[tuple[tuple[int, int], ...], ...]

    def __len__(self) -> int:
        return len(self.groups)


class _Group:
    __slots__ = ("members", "sensors", "moments")

    def __init__(self):
        self.members: list[tuple[int, int]] = []
        self.sensors: set[int] = set()
        self.moments: list[tuple[float, np.ndarray, np.ndarray]] = []

    def add(self, sensor, comp, r, mean, cov):
        self.members.append((sensor, comp))
        self.sensors.add(sensor)
        self.moments.append((r, mean, cov))

    def mean_cov(self):
        w = np.array([max(r, 0.0) for r, _, _ in self.moments])
        w = w / w.sum() if w.sum() > 0 else np.full(w.size, 1.0 / w.size)
        means = np.stack([m for _, m, _ in self.moments])
        mean = w @ means
        d = means - mean
        cov = sum(wi * P for wi, (_, _, P) in zip(w, self.moments)) + np.einsum("n,ni,nj->ij", w, d, d)
        return mean, cov


def associate_components(mbs: Sequence[MultiBernoulli], gate: float = DEFAULT_GATE) -> AssociationResult:
    """Greedy gated grouping of Bernoulli components across sensors.

    Sensors are visited in index order.  Each component joins the existing
    group whose moment-matched mean is closest in squared Mahalanobis
    distance (under the sum of both covariances), provided the distance is
    below ``gate`` and the group holds nothing from the same sensor;
    otherwise it opens a new group.  Components with an empty SPD always
    form singleton groups.
    """
    if gate <= 0:
        raise ContractError("gate must be positive")
    groups: list[_Group] = []
    for i, mb in enumerate(mbs):
        for j, bc in enumerate(mb):
            g = _Group()
            if bc.spd.mass == 0:
                g.add(i, j, bc.existence, None, None)
                groups.append(g)
                continue
            mean, cov = bc.spd.moments()
            best, best_d2 = None, gate
            for cand in groups:
                if i in cand.sensors or cand.moments[0][1] is None:
                    continue
                gm, gP = cand.mean_cov()
                diff = gm - mean
                d2 = float(diff @ np.linalg.solve(gP + cov, diff))
                if d2 < best_d2:
                    best, best_d2 = cand, d2
            if best is None:
                g.add(i, j, bc.existence, mean, cov)
                groups.append(g)
            else:
                best.add(i, j, bc.existence, mean, cov)
    return AssociationResult(tuple(tuple(g.members) for g in groups))
