"""Linear sections of Gr(2,6) and the inverse lifting problem.

The forward path slices the Plücker-embedded Grassmannian with a linear
subspace of P^14 to produce a self-dual configuration of 14 points in P^6;
the inverse path recovers a linear embedding mapping such a configuration
back onto a linear section, both via numerical homotopy continuation.
"""

from .errors import (
    BezoutOverflow,
    CayleySingular,
    DegenerateConfig,
    InputError,
    MukaiError,
    NotSelfDual,
    PathFailed,
    RankDeficient,
    RecoveryFailed,
    ResidualCheckFailed,
    SingularMatrix,
    StartResidualTooLarge,
    WrongCount,
    ZeroVector,
)
from .linalg import (
    DEFAULT_TOLS,
    Tolerances,
    lu_solve,
    nullspace,
    proj_distance,
    qr_least_squares,
)
from .tracker import (
    DEFAULT_OPTIONS,
    EvaluatedSystem,
    PathResult,
    PathStatus,
    StraightLinePath,
    TrackerOptions,
    newton_refine,
    total_degree_start,
    track_all,
    track_path,
)

__version__ = "0.1.0"

from .grassmann import (
    pluecker_embed,
    pluecker_embed_jacobian,
    pluecker_embed_u,
    pluecker_relations,
    pluecker_relations_jacobian,
)
from .lifting import (
    LiftProblem,
    LiftResult,
    build_lift_system,
    lift,
    make_start_pair,
    verify_lift,
)
from .selfdual import (
    NormalFormCert,
    cayley,
    config_from_skew,
    gale_transform,
    is_linearly_general,
    is_semistable,
    orthogonal_normal_form,
    projective_equivalent,
    self_dual_witness,
    skew_normal_form,
)
from .slicing import (
    CensusTable,
    SliceResult,
    SliceStart,
    build_slicing_system,
    census,
    prepare_start,
    slice_section,
    solve_toric_start,
)

__all__ = [
    "BezoutOverflow",
    "CayleySingular",
    "DEFAULT_OPTIONS",
    "DEFAULT_TOLS",
    "DegenerateConfig",
    "EvaluatedSystem",
    "InputError",
    "MukaiError",
    "NotSelfDual",
    "PathFailed",
    "PathResult",
    "PathStatus",
    "RankDeficient",
    "RecoveryFailed",
    "ResidualCheckFailed",
    "SingularMatrix",
    "StartResidualTooLarge",
    "StraightLinePath",
    "Tolerances",
    "TrackerOptions",
    "WrongCount",
    "ZeroVector",
    "__version__",
    "lu_solve",
    "newton_refine",
    "nullspace",
    "proj_distance",
    "qr_least_squares",
    "total_degree_start",
    "track_all",
    "track_path",
]
