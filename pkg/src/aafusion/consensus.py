"""Synchronous average consensus of GM-PHDs over a sensor graph."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .fusion.rules import aa_gm
from .fusion.weights import FusionWeights
from .gaussian import ContractError, GaussianMixture, gm_reduce


class DisconnectedGraph(ContractError):
    pass


@dataclass(frozen=True)
class SensorGraph:
    node_count: int
    edges: frozenset[frozenset[int]]

    def __post_init__(self):
        if self.node_count < 1:
            raise ContractError("a graph needs at least one node")
        edges = set()
        for e in self.edges:
            i, j = tuple(e) if len(e) == 2 else (None, None)
            if i is None or i == j:
                raise ContractError(f"invalid edge {tuple(e)}: self-loops are not allowed")
            if not (0 <= i < self.node_count and 0 <= j < self.node_count):
                raise ContractError(f"edge {tuple(e)} refers to a missing node")
            edges.add(frozenset((int(i), int(j))))
        object.__setattr__(self, "edges", frozenset(edges))

    @classmethod
    def from_edge_list(cls, node_count: int, edges: Iterable[Sequence[int]]) -> SensorGraph:
        return cls(node_count, frozenset(frozenset(e) for e in edges))

    @classmethod
    def ring(cls, n: int) -> SensorGraph:
        return cls.from_edge_list(n, [(i, (i + 1) % n) for i in range(n) if (i + 1) % n != i])

    @classmethod
    def complete(cls, n: int) -> SensorGraph:
        return cls.from_edge_list(n, [(i, j) for i in range(n) for j in range(i + 1, n)])

    @classmethod
    def star(cls, leaves: int) -> SensorGraph:
        return cls.from_edge_list(leaves + 1, [(0, k) for k in range(1, leaves + 1)])

    def adjacency(self) -> np.ndarray:
        A = np.zeros((self.node_count, self.node_count))
        for e in self.edges:
            i, j = tuple(e)
            A[i, j] = A[j, i] = 1.0
        return A

    @property
    def connected(self) -> bool:
        if self.node_count == 1:
            return True
        n, _ = connected_components(csr_matrix(self.adjacency()), directed=False)
        return n == 1


def metropolis_weights(g: SensorGraph) -> np.ndarray:
    """W_ij = 1/(1 + max(deg_i, deg_j)) on edges, W_ii = 1 - Σ_{j≠i} W_ij."""
    if not g.connected:
        raise DisconnectedGraph("Metropolis weights need a connected graph")
    A = g.adjacency()
    deg = A.sum(axis=1)
    W = np.where(A > 0, 1.0 / (1.0 + np.maximum.outer(deg, deg)), 0.0)
    W[np.diag_indices_from(W)] = 1.0 - W.sum(axis=1)
    return W


@dataclass(frozen=True)
class Reduction:
    prune_threshold: float = 1e-5
    merge_threshold: float = 4.0
    max_components: int = 100

    def __call__(self, gm: GaussianMixture) -> GaussianMixture:
        return gm_reduce(gm, self.prune_threshold, self.merge_threshold, self.max_components)


@dataclass(frozen=True)
class ConsensusState:
    """One PHD per node.  ``mass_history`` holds the per-node masses of every iteration so far."""

    per_node: tuple[GaussianMixture, ...]
    iteration: int = 0
    mass_history: tuple[tuple[float, ...], ...] = field(default=(), compare=False)

    def __post_init__(self):
        nodes = tuple(self.per_node)
        if not nodes:
            raise ContractError("consensus needs at least one node")
        if len({g.dim for g in nodes}) != 1:
            raise ContractError("all node PHDs must share one dimension")
        object.__setattr__(self, "per_node", nodes)
        if not self.mass_history:
            object.__setattr__(self, "mass_history", (self.masses,))

    @property
    def masses(self) -> tuple[float, ...]:
        return tuple(g.mass for g in self.per_node)

    def disagreement(self) -> float:
        m = np.array(self.masses)
        return float(m.max() - m.min())


def _check_doubly_stochastic(W: np.ndarray, n: int):
    if W.shape != (n, n):
        raise ContractError(f"weight matrix shape {W.shape} does not match {n} nodes")
    if np.any(W < -1e-15) or not np.allclose(W.sum(axis=0), 1, atol=1e-9) or not np.allclose(W.sum(axis=1), 1, atol=1e-9):
        raise ContractError("consensus weights must be doubly stochastic")


def consensus_step(state: ConsensusState, W: np.ndarray, reduction: Reduction | None = None) -> ConsensusState:
    """Every node replaces its PHD by the AA of its neighbours' PHDs with row weights W[i]."""
    W = np.asarray(W, dtype=float)
    n = len(state.per_node)
    _check_doubly_stochastic(W, n)
    reduction = reduction or Reduction()
    new = []
    for i in range(n):
        nbrs = np.flatnonzero(W[i] > 0)
        fused = aa_gm([state.per_node[j] for j in nbrs], FusionWeights.normalize(W[i, nbrs]))
        new.append(reduction(fused))
    masses = tuple(g.mass for g in new)
    return ConsensusState(tuple(new), state.iteration + 1, state.mass_history + (masses,))


def run_consensus(initial: ConsensusState, W: np.ndarray, iterations: int,
                  reduction: Reduction | None = None) -> ConsensusState:
    if iterations < 0:
        raise ContractError("iterations must be nonnegative")
    state = initial
    for _ in range(iterations):
        state = consensus_step(state, W, reduction)
    return state
