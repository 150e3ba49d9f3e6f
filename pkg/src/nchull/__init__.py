"""Noncommutative convex hulls of compact self-adjoint tuples at finite
truncation scale: witnessed hull membership, contraction-to-isometry lifts,
linear pencils, commutant analysis and refutation of absolute extremeness."""

from .config import TOL, GuardError, InvariantBreach, Tolerances, with_overrides
from .extreme import (
    INCONCLUSIVE,
    NOT_ABSOLUTE_EXTREME,
    DilationCertificate,
    EscapeRow,
    RefutationCertificate,
    RefutationReasons,
    canonical_dilation,
    diag_invariant_support,
    escape_experiment,
    reducing_dimensions,
    refute_absolute_extreme,
)
from .hull import (
    HullPoint,
    IsometryLiftResult,
    SweepRow,
    convergence_sweep,
    hull_point,
    lift_contraction_to_isometry,
    matrix_convex_combine,
    verify_hull_point,
)
from .linalg import (
    CommutantReport,
    SelfAdjointTuple,
    commutant,
    complete_to_unitary,
    compress,
    direct_sum,
    equivalence_probe,
    hermitize,
    is_psd,
    kron,
    opnorm,
    random_contraction,
    random_hermitian,
    random_isometry,
    sqrt_psd,
)
from .model import (
    CompactTupleModel,
    FiniteInteriorWitness,
    build_diag_shift_example,
    embed_witness,
    finite_interior_witness,
)
from .pencils import (
    LinearPencil,
    eval_at_scalars,
    eval_pencil,
    identity_pencil,
    in_spectrahedron,
    map_affine_residual,
    matrix_affine_residual,
    random_symmetric_pencil,
    reconstruct_pencil_from_affine,
    shuffle_permutation,
    ucp_decomposition_residual,
    ucp_eval,
)

__version__ = "0.1.0"
