"""
Why the arithmetic average, and how to weight it
================================================

For fixed weights the AA density minimizes the weighted KL divergence
sum_i w_i KL(f_i || g) over g.  The geometric average (GA) reverses the
direction of the divergence and behaves very differently when one input
misses a target.  The BFoM weights push the AA towards diverse inputs.
"""

import numpy as np

from aafusion import GridDensity, kl_grid
from aafusion.fusion import FusionWeights, aa_fuse_grid, bfom_weights, ga_fuse_grid

grid = GridDensity.regular(-10.0, 10.0, 401)


def gauss(m, v):
    return grid.with_values(np.exp(-0.5 * (grid.axes[0] - m) ** 2 / v)).normalized()


# two sensors agree on a target at 0; the third has a second peak at 5 the others missed
fs = [gauss(0, 1), gauss(0.3, 1.2), grid.with_values(gauss(0, 1).values + gauss(5, 1).values).normalized()]
w = FusionWeights.uniform(3)
aa, ga = aa_fuse_grid(fs, w), ga_fuse_grid(fs, w)
for name, g in (("AA", aa), ("GA", ga)):
    objective = sum(wi * kl_grid(f, g) for wi, f in zip(w, fs))
    near5 = g.values[np.abs(grid.axes[0] - 5) < 2].sum() * grid.cell_volume
    print(f"{name}: weighted KL {objective:.4f}, probability near x=5: {near5:.3f}")
print("the third sensor put half its mass near x=5: the AA keeps a third of that, the GA almost none")

bw = bfom_weights(fs)
print(f"BFoM weights {np.round(bw.as_array(), 3)}")
