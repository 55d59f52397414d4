from targets.target import (
    Support,
    SupportKind,
    TargetSpec,
    CovariateRow,
    CovariateSet,
    TargetSet,
    target_log_cdf,
    target_sample,
    target_from_config,
    require_supported,
    TargetSupportError,
)
