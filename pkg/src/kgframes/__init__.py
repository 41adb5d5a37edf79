"""Computational laboratory for operator-weighted frames in Hilbert
modules over finite direct sums of complex matrix blocks.

Everything is executable linear algebra: algebra elements are block
matrices, module vectors are per-block row stacks, operators carry one
realization matrix per block, and every claimed property is decided
numerically with explicit tolerances and certificates.
"""

from .algebra import (
    TOL_HERM,
    TOL_PSD,
    TOL_RANK,
    AlgebraElement,
    AlgebraShape,
    PositivityVerdict,
    leq,
    psd_verdict,
)
from .docio import (
    DOCUMENT_VERSION,
    InstanceDocument,
    build_document,
    document_from_json,
    document_to_json,
    parse_document,
)
from .duality import (
    CanonicalDualResult,
    CombinedDualResult,
    DualCertificate,
    IsometryTransformReport,
    PerturbationReport,
    TransformReport,
    TransportedDualResult,
    canonical_k_dual,
    coisometry_transport,
    combine_duals,
    dual_via_g_operators,
    isometry_left_transform,
    transform_by_q,
    verify_k_dual,
    zero_overlap_perturbation,
)
from .errors import (
    BasisError,
    CommutationError,
    DocumentError,
    DualityError,
    InfeasibleSpec,
    InvertibilityError,
    IsometryError,
    KGFrameError,
    PartitionError,
    ShapeMismatch,
)
from .generators import (
    Caps,
    GenSpec,
    Instance,
    draw_spec,
    generate,
    sub_seed,
)
from .gframes import (
    FrameBounds,
    GFrame,
    basis_axiom_report,
    canonical_basis,
    embed_direction,
    frame_distance,
    g_operator,
    is_g_complete,
    optimal_g_bounds,
    reconstruct_from_g_operator,
    validate_basis,
)
from .kganalysis import (
    CounterexampleCertificate,
    FactorReport,
    KGFrameReport,
    QuotientReport,
    ResolutionReport,
    TightnessReport,
    is_kg_frame,
    kg_via_range,
    optimal_kg_lower_bound,
    quotient_bounded,
    reevaluate_counterexample,
    resolution_check,
    sqrt_factor_check,
    tightness_check,
)
from .modules import ModuleVector, inner, max_vector_seminorm, vector_seminorm
from .operators import (
    TOL_EQ,
    DouglasCertificate,
    EnvelopeReport,
    ModuleOperator,
    PencilResult,
    douglas,
    largest_lower_scale,
    norm_envelope_check,
    operator_distance,
    psd_quotient_max,
)
from .suite import (
    FailureRecord,
    SuiteConfig,
    SuiteResult,
    TheoremReport,
    document_json,
    list_check_ids,
    result_to_document,
    revalidate,
    run_check,
    run_theorem_suite,
)
from .version import __version__

__all__ = [
    "__version__",
    # algebra
    "TOL_HERM",
    "TOL_PSD",
    "TOL_RANK",
    "TOL_EQ",
    "AlgebraElement",
    "AlgebraShape",
    "PositivityVerdict",
    "leq",
    "psd_verdict",
    # modules
    "ModuleVector",
    "inner",
    "max_vector_seminorm",
    "vector_seminorm",
    # operators
    "DouglasCertificate",
    "EnvelopeReport",
    "ModuleOperator",
    "PencilResult",
    "douglas",
    "largest_lower_scale",
    "norm_envelope_check",
    "operator_distance",
    "psd_quotient_max",
    # frames
    "FrameBounds",
    "GFrame",
    "basis_axiom_report",
    "canonical_basis",
    "embed_direction",
    "frame_distance",
    "g_operator",
    "is_g_complete",
    "optimal_g_bounds",
    "reconstruct_from_g_operator",
    "validate_basis",
    # analysis
    "CounterexampleCertificate",
    "FactorReport",
    "KGFrameReport",
    "QuotientReport",
    "ResolutionReport",
    "TightnessReport",
    "is_kg_frame",
    "kg_via_range",
    "optimal_kg_lower_bound",
    "quotient_bounded",
    "reevaluate_counterexample",
    "resolution_check",
    "sqrt_factor_check",
    "tightness_check",
    # duality
    "CanonicalDualResult",
    "CombinedDualResult",
    "DualCertificate",
    "IsometryTransformReport",
    "PerturbationReport",
    "TransformReport",
    "TransportedDualResult",
    "canonical_k_dual",
    "coisometry_transport",
    "combine_duals",
    "dual_via_g_operators",
    "isometry_left_transform",
    "transform_by_q",
    "verify_k_dual",
    "zero_overlap_perturbation",
    # generators
    "Caps",
    "GenSpec",
    "Instance",
    "draw_spec",
    "generate",
    "sub_seed",
    # suite
    "FailureRecord",
    "SuiteConfig",
    "SuiteResult",
    "TheoremReport",
    "document_json",
    "list_check_ids",
    "result_to_document",
    "revalidate",
    "run_check",
    "run_theorem_suite",
    # documents
    "DOCUMENT_VERSION",
    "InstanceDocument",
    "build_document",
    "document_from_json",
    "document_to_json",
    "parse_document",
    # errors
    "BasisError",
    "CommutationError",
    "DocumentError",
    "DualityError",
    "InfeasibleSpec",
    "InvertibilityError",
    "IsometryError",
    "KGFrameError",
    "PartitionError",
    "ShapeMismatch",
]
