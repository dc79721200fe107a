"""
Averaging multi-target densities
================================

Three sensors report on the same scene.  Their posteriors are fused by the
arithmetic average D_AA = sum_i w_i D_i, applied family by family.  The
fused PHD is always the weighted sum of the input PHDs, which is what
makes the rule cheap and easy to reason about.
"""

import numpy as np

from aafusion import BernoulliComponent, GaussianMixture, MultiBernoulli, PoissonDensity, phd_of
from aafusion.fusion import FusionWeights, fuse_bernoulli, fuse_mb, fuse_poisson

w = FusionWeights((0.5, 0.3, 0.2))


def blob(x, y, var=1.0):
    return GaussianMixture.single([x, y], np.eye(2) * var)


# Poisson posteriors: rates average, the SPD becomes a rate-weighted mixture.
sensors = [PoissonDensity(2.0, blob(0, 0)), PoissonDensity(3.0, blob(0.5, 0)), PoissonDensity(1.0, blob(9, 9))]
fused = fuse_poisson(sensors, w)
print(f"Poisson: rates {[d.rate for d in sensors]} -> fused rate {fused.rate:.2f}")

# A Bernoulli target: existence averages, so one sensor missing the target
# only pulls the fused existence down by its own weight.
bcs = [BernoulliComponent(0.95, blob(0, 0)), BernoulliComponent(0.9, blob(0.2, 0.1)), BernoulliComponent(0.05, blob(0, 0))]
print(f"Bernoulli: r = {[bc.existence for bc in bcs]} -> {fuse_bernoulli(bcs, w).existence:.3f}")

# Multi-Bernoulli: components are grouped target-wise before averaging.
mbs = [
    MultiBernoulli((BernoulliComponent(0.9, blob(0, 0)), BernoulliComponent(0.8, blob(20, 5)))),
    MultiBernoulli((BernoulliComponent(0.85, blob(0.3, -0.2)),)),
    MultiBernoulli((BernoulliComponent(0.9, blob(19.5, 5.2)), BernoulliComponent(0.6, blob(-30, 0)))),
]
fused_mb = fuse_mb(mbs, w)
print(f"MB: {[len(mb) for mb in mbs]} components -> {len(fused_mb)} fused")
for bc in fused_mb:
    print(f"   r={bc.existence:.3f} at {np.round(bc.spd.means.mean(axis=0), 2)}")

# The PHD identity: the fused PHD mass is the weighted average of the input masses.
expected = sum(wi * phd_of(mb).mass for wi, mb in zip(w, mbs))
print(f"PHD mass of fused MB {phd_of(fused_mb).mass:.6f}, weighted input average {expected:.6f}")
