"""
Prior Translation Constants

Constants:
    LOG_FLOOR (float): Log-scale floor returned when a discrepancy term is exactly zero.
        -745 is just below log of the smallest subnormal double.
    IMPORTANCE_WIDENING (float): Default widening factor c for the importance proposal.
    GAMMA_VARIANCE_CAP (float): Upper clamp for the moment-matched gamma variance.
    BETA_VARIANCE_FLOOR (float): Lower clamp for the moment-matched beta variance.
    MIN_PROPOSAL_VARIANCE (float): Variance used when a sample set has zero spread.
    MIN_BETA_SHAPE (float): Shape used when the beta moment formulas go non-positive.
    BOUNDED_COMPONENT_WEIGHT (float): Stated weight of each beta component on a bounded support.
    BOUNDED_ATOM_WEIGHT (float): Stated weight of the proposal atom at the upper end of a bounded support.
        The three stated weights sum to 0.95; the fitted mixture rescales them to one.
    STUDENT_T_DF (float): Degrees of freedom of the real-line proposal components.
    QN_CONSTANT (float): Normal-consistency factor of the pairwise-difference scale.
    QN_PAIRS (int): Number of random pairs drawn by the pairwise-difference scale.
    GP_NUGGET_FLOOR (float): Smallest white-noise variance allowed in a surrogate.
    GP_LENGTHSCALE_BOUNDS (tuple): Lengthscale bounds, in unit-cube units.
    GP_RESTARTS (int): Multistart restarts used when fitting surrogate hyperparameters.
    HYPERVOLUME_MARGIN (float): Fraction of the candidate range added to the reference point.
    DEFAULT_KAPPA_GRID (tuple): kappa values used when none are configured.
    SUPPORT_CHECK_DRAWS (int): Draws per covariate row when checking that targets stay on their support.
"""

LOG_FLOOR = -745.0

IMPORTANCE_WIDENING = 1.05
GAMMA_VARIANCE_CAP = 1e5
BETA_VARIANCE_FLOOR = 1e-6
MIN_PROPOSAL_VARIANCE = 1e-6
MIN_BETA_SHAPE = 1e-2
BOUNDED_ATOM_WEIGHT = 0.05
BOUNDED_COMPONENT_WEIGHT = 0.45
STUDENT_T_DF = 5.0

QN_CONSTANT = 2.2219
QN_PAIRS = 10**6

GP_NUGGET_FLOOR = 1e-6
GP_LENGTHSCALE_BOUNDS = (1e-2, 1e2)
GP_RESTARTS = 5
HYPERVOLUME_MARGIN = 0.1

DEFAULT_KAPPA_GRID = (0.1, 0.2, 0.3, 0.5, 1.0, 2.0)

SUPPORT_CHECK_DRAWS = 1_000
