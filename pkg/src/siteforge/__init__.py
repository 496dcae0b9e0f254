"""Finite sites, sheaves over them, and chain points that separate sections."""

from .fincat import (
    Cochain,
    CompositionUndefined,
    Cospan,
    FinCategory,
    FinCatError,
    InvalidCategory,
    LawViolation,
    NotFound,
    Span,
    SquareCorner,
    UnknownMorphism,
    UnknownObject,
    cochain_limit,
    is_mono,
    pullback,
    pushout,
    unique_mediator_to_cocone,
    validate_category,
)
from .sites import (
    CoamalgamationData,
    Cotree,
    DepthExceeded,
    GrothendieckTopology,
    Presieve,
    Sieve,
    Site,
    SizeBudgetExceeded,
    Warp,
    check_coamalgamation,
    close_under_pullbacks,
    coamalgamation_from_pullbacks,
    is_warp,
    is_woven,
    multicomposite,
    pullback_sieve,
    saturate,
    sieve_generated,
    sieves_on,
)
from .presheaf import (
    Presheaf,
    PresheafMap,
    Subpresheaf,
    build_omega,
    check_natural,
    check_presheaf,
    image_factorization,
    is_dense_mono,
    is_separated,
    is_sheaf,
    plus_construction,
    sheaf_check,
    sheafify,
    sub_as_presheaf,
    yoneda,
    yoneda_map,
    yoneda_sieve_sub,
)
from .point import (
    ChainPoint,
    Evaluation,
    Germ,
    check_cocontinuity,
    check_lexity,
    check_projectivity,
    concat_certified,
    eval_on_map,
    eval_point,
    extend_chain,
    push_classes,
)
from .improve import (
    DenseTarget,
    Improvement,
    ImprovementData,
    NoDistinguishingLeg,
    NotAPullback,
    PresieveTarget,
    SubobjectSquare,
    base_change_improvement,
    check_improvement,
    compose_improvements,
    improve_dense,
    improve_step,
    improve_step_coamalg,
    pair_index,
    pair_unindex,
    reduce_to_warp,
    synthesize_point,
)
from .enough import (
    NotPosetal,
    NotSubterminal,
    closed_subtopology,
    distinguish_pair,
    enough_points_report,
    locale_points,
    oracle_enumerate_points,
    points_equivalent,
    tiny_objects,
    transfer_points,
)
from .specfile import BundleInvalid, SiteBundle, SpecError, load_bundle

__version__ = "0.1.0"
