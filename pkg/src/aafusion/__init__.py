"""Arithmetic-average fusion of random finite set densities."""

from .consensus import (
    ConsensusState,
    DisconnectedGraph,
    Reduction,
    SensorGraph,
    consensus_step,
    metropolis_weights,
    run_consensus,
)
from .densities import (
    BernoulliComponent,
    CardinalityPmf,
    DeltaGlmbDensity,
    GlmbDensity,
    Hypothesis,
    IidcDensity,
    Label,
    LabelSetHypothesis,
    LmbDensity,
    MbMixture,
    MglmbDensity,
    MultiBernoulli,
    PoissonDensity,
    delta_glmb_to_glmb,
    lmb_from_delta_glmb,
    marginalize_delta_glmb,
)
from .gaussian import ContractError, GaussianComponent, GaussianMixture, gm_mass, gm_reduce
from .grid import GridDensity, brute_force_lphd, brute_force_phd, kl_grid
from .phd import cardinality_of, label_marginals, labeled_set_density_eval, lphd_of, phd_of, set_density_eval

__version__ = "0.1.0"

__all__ = [
    "BernoulliComponent",
    "CardinalityPmf",
    "ConsensusState",
    "ContractError",
    "DeltaGlmbDensity",
    "DisconnectedGraph",
    "GaussianComponent",
    "GaussianMixture",
    "GlmbDensity",
    "GridDensity",
    "Hypothesis",
    "IidcDensity",
    "Label",
    "LabelSetHypothesis",
    "LmbDensity",
    "MbMixture",
    "MglmbDensity",
    "MultiBernoulli",
    "PoissonDensity",
    "Reduction",
    "SensorGraph",
    "brute_force_lphd",
    "brute_force_phd",
    "cardinality_of",
    "consensus_step",
    "delta_glmb_to_glmb",
    "gm_mass",
    "gm_reduce",
    "kl_grid",
    "label_marginals",
    "labeled_set_density_eval",
    "lmb_from_delta_glmb",
    "lphd_of",
    "marginalize_delta_glmb",
    "metropolis_weights",
    "phd_of",
    "run_consensus",
    "set_density_eval",
]
