"""Finite-model verification toolkit for Fell-bundle crossed-product duality.

Realizes Fell bundles over finite groups and groupoids as block matrix
structures, builds their section C*-algebras, coactions, and crossed
products, and numerically certifies the isomorphism chain that exhibits the
double crossed product as sections tensor a full matrix algebra — the
bijectivity of the canonical map, verified on desk-scale examples.
"""

from .bundles import (
    BundleError,
    RealizedFellBundle,
    UnitaryAction,
    bundle_from_json_dict,
    bundle_to_json_dict,
    cocycle_line_bundle,
    groupoid_semidirect_bundle,
    load_bundle,
    product_bundle,
    pullback_bundle,
    right_translation_action,
    save_bundle,
    semidirect_bundle_from_group_action,
    transformation_bundle,
    trivial_cocycle,
    trivial_line_bundle_over_groupoid,
    validate_bundle,
)
from .crossed import (
    Coaction,
    CrossedError,
    CrossedProduct,
    action_crossed_product,
    automorphism_from_unitary,
    bundle_coaction,
    check_bundle_covariance,
    coaction_crossed_product,
    dual_action,
    group_algebra,
    induced_section_action,
    semidirect_coaction_compat,
)
from .demos import DEMOS, demo_bundle
from .duality import (
    DualityPipeline,
    DualityReport,
    product_factorization_iso,
    semidirect_section_isos,
    verify_duality_pipeline,
)
from .groupoids import (
    FiniteGroup,
    FiniteGroupoid,
    GroupoidAction,
    GroupoidError,
    check_haar_invariance,
    group_as_groupoid,
    pair_groupoid,
    product_groupoid,
    semidirect_groupoid,
    transformation_groupoid,
)
from .linalg import (
    CStarRealization,
    IsomorphismReport,
    LinalgError,
    StarMap,
    Subspace,
    define_map_on_span,
    full_matrix_algebra,
    orthonormalize,
    star_closure,
    tensor_realization,
    verify_isomorphism,
)
from .sections import (
    Section,
    SectionAlgebra,
    SectionError,
    canonical_trace,
    convolve,
    enveloping_cstar,
    involute,
    left_multiplier,
)

__version__ = "0.1.0"
