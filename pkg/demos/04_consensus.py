"""
Distributed averaging
=====================

Without a fusion centre each node repeatedly averages with its neighbours
using Metropolis weights.  Every round is a local AA fusion, so the node
PHDs converge to the centralized uniform average while the network's total
mass is conserved.
"""

import numpy as np

from aafusion import GaussianMixture
from aafusion.consensus import ConsensusState, SensorGraph, metropolis_weights, run_consensus

rng = np.random.default_rng(1)
graph = SensorGraph.ring(8)
W = metropolis_weights(graph)
phds = tuple(GaussianMixture.single(rng.normal(size=2), np.eye(2)).scaled(m) for m in rng.uniform(0.5, 3.0, 8))
target = np.mean([g.mass for g in phds])

state = run_consensus(ConsensusState(phds), W, 30)
print(f"centralized average mass {target:.4f}")
for k in (0, 1, 5, 10, 20, 30):
    masses = np.array(state.mass_history[k])
    print(f"round {k:>2}: spread {masses.max() - masses.min():.2e}, total {masses.sum():.6f}")
