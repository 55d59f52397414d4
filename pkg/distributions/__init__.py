from distributions.rng import RngState, as_generator
from distributions.families import (
    DistSpec,
    MixtureSpec,
    FunctionalDist,
    from_cdf,
    sample,
    log_cdf,
    log_density,
    log_continuous_density,
    log_mass,
    atom_locations,
    standard_deviation,
)
from distributions.multivariate import (
    lkj_partial_to_cholesky,
    sample_lkj_cholesky,
    sample_mv_skew_normal,
    skew_normal_marginal_sd,
)
