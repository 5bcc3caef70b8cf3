from typing import Final

DEBUG = False

# Tolerances, keyed the way ResidualReport names its identities.
TOL_ALGEBRAIC: Final[float] = 1e-10
TOL_COMPOSED: Final[float] = 1e-9
TOL_AGREEMENT: Final[float] = 1e-10
TOL_NORMALITY: Final[float] = 5e-7
TOL_WEINGARTEN: Final[float] = 5e-8
TOL_COMMUTATION: Final[float] = 5e-7
TOL_SELF_ADJOINT: Final[float] = 1e-7
TOL_CONNECTION: Final[float] = 5e-7

# Membership and tangency.
TOL_CONTAINS: Final[float] = 1e-10
TOL_TANGENT: Final[float] = 1e-10
TOL_RADII_CONSISTENCY: Final[float] = 1e-12

# Finite differences.
FD_STEP: Final[float] = 1e-5
FD_STEP_MIN: Final[float] = 1e-8
FD_STEP_MAX: Final[float] = 1e-2

# Off-manifold evaluation needs every family radius above this floor.
RADIUS_FLOOR: Final[float] = 1e-8

# sample_tangent resamples when the projected Gaussian is shorter than this.
TANGENT_RESAMPLE_FLOOR: Final[float] = 1e-8

# Preconditions treat a point as on-manifold within this distance.
TOL_ON_MANIFOLD: Final[float] = 1e-9

# Normality residuals are only accumulated where |det(I - a^2)| exceeds this.
NORMALITY_DET_FLOOR: Final[float] = 1e-3
