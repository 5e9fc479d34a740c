"""stabgi: generalized inverses with prescribed complements and the
analysis of stably perturbed rank-deficient linear maps."""

from .dense import (
    RankFactorization,
    as_matrix,
    rank_factorization,
    singular_extremes,
    solve_square,
    spectral_norm,
)
from .diagonal import DiagAnalysis, DiagonalOperator, diag_analyze, diag_gi, diag_tbound, embed
from .errors import (
    ComplementError,
    DimensionError,
    InputError,
    PreconditionError,
    SingularMatrixError,
    StabgiError,
)
from .geninv import (
    ComplementChoice,
    GiBundle,
    GiResiduals,
    build_gi,
    moore_penrose,
    oblique_projector,
    orthogonal_choice,
    random_choice,
    range_projector_norm,
    verify_gi,
)
from .oracle import (
    BatteryFailure,
    BatteryReport,
    InstanceSpec,
    battery,
    margin_filter,
    random_instance,
)
from .perturb import (
    AnalysisReport,
    BijectivityCertificate,
    Decision,
    PerturbedSystem,
    analyze,
    bijectivity_conditions,
    bijectivity_pair,
    decomposition_check,
    minimal_a,
    norm_condition,
    perturbed_inverse,
    perturbed_projectors,
    stability_conditions,
    stable_range_condition,
)
from .subspaces import Subspace

__version__ = "0.1.0"
