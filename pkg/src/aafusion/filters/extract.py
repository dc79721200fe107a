"""State extraction from filter posteriors."""

from __future__ import annotations

import numpy as np

from ..densities import BernoulliComponent, Label, LmbDensity, MultiBernoulli
from ..gaussian import ContractError, GaussianMixture


def _track_state(spd: GaussianMixture) -> np.ndarray:
    # mean of the heaviest component, robust to a stray low-weight mode
    return spd.means[int(np.argmax(spd.weights))].copy()


def extract_states(density, threshold: float = 0.5) -> list[tuple[np.ndarray, Label | None]]:
    """PHD: means of the round(mass) heaviest components.  Existence families: tracks with r > threshold."""
    if isinstance(density, GaussianMixture):
        n = min(int(np.round(density.mass)), len(density))
        order = np.argsort(-density.weights, kind="stable")[:n]
        return [(density.means[i].copy(), None) for i in order]
    if not 0.0 < threshold < 1.0:
        raise ContractError("existence threshold must lie in (0, 1)")
    if isinstance(density, BernoulliComponent):
        density = MultiBernoulli((density,))
    if isinstance(density, MultiBernoulli):
        return [(_track_state(bc.spd), None) for bc in density if bc.existence > threshold]
    if isinstance(density, LmbDensity):
        return [(_track_state(bc.spd), label) for label, bc in density.tracks.items() if bc.existence > threshold]
    raise ContractError(f"cannot extract states from {type(density).__name__}")
