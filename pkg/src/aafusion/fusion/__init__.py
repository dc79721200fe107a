from .association import DEFAULT_GATE, AssociationResult, associate_components
from .rules import (
    FusionConfig,
    aa_cardinality,
    aa_gm,
    fuse_bernoulli,
    fuse_delta_glmb,
    fuse_glmb,
    fuse_iidc,
    fuse_lmb,
    fuse_mb,
    fuse_mbm,
    fuse_mglmb,
    fuse_poisson,
)
from .weights import (
    FusionWeights,
    aa_fuse_grid,
    bfom_objective,
    bfom_weights,
    ga_fuse_grid,
    ga_fuse_phd_grid,
)

__all__ = [
    "DEFAULT_GATE",
    "AssociationResult",
    "FusionConfig",
    "FusionWeights",
    "aa_cardinality",
    "aa_fuse_grid",
    "aa_gm",
    "associate_components",
    "bfom_objective",
    "bfom_weights",
    "fuse_bernoulli",
    "fuse_delta_glmb",
    "fuse_glmb",
    "fuse_iidc",
    "fuse_lmb",
    "fuse_mb",
    "fuse_mbm",
    "fuse_mglmb",
    "fuse_poisson",
    "ga_fuse_grid",
    "ga_fuse_phd_grid",
]
