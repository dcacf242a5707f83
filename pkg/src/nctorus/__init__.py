"""Rational rotation-algebra toolkit: matrix torus representations,
flux-operator spectra, gap labeling, and quantized-conductance checks."""

from .algebra import (
    AlgebraElement,
    IrrationalTheta,
    RationalTheta,
    ThetaMismatchError,
    connes_chern_symbolic,
    derivation,
    element_from_json_dict,
    element_mul,
    element_star,
    element_to_json_dict,
    hofstadter_element,
    monomial,
    nc_integral_symbolic,
    projection_defect,
    random_element,
    random_selfadjoint_element,
    unit,
    zero,
)
from .arithmetic import (
    DegenerateRepresentationError,
    InvalidTwistError,
    NoConstrainedSolutionError,
    TKNNRecord,
    WeylContext,
    gap_label_d,
    make_weyl_context,
    tknn_rhs_value,
    tknn_solve,
)
from .chern import (
    ChernResidualError,
    ChernResult,
    GridTooCoarseError,
    VerificationError,
    ambient_chern_analytic,
    connes_chern_numeric,
    connes_chern_via_derivatives,
    fhs_chern,
    fhs_chern_twisted,
    gap_certificates,
    nc_integral_numeric,
    pullback_field,
    symbolic_numeric_crosscheck,
    tknn_gap_records,
    verify_generalized_tknn,
)
from .representations import (
    FiberedRep,
    check_pseudoperiodicity,
    clock_matrix,
    evaluate_at_k,
    evaluate_on_grid,
    matrix_to_json,
    reference_fibered_rep,
    shift_matrix,
    shift_matrix_power,
    twist_matrix,
    twist_transport,
    weyl_fibered_rep,
)
from .spectral import (
    BandData,
    GapInfo,
    GapReport,
    GapViolationError,
    ProjectorField,
    SelfAdjointnessError,
    bands_on_grid,
    constant_projector_field,
    detect_gaps,
    detect_gaps_refined,
    export_bands_csv,
    fermi_projector_field,
    identity_field,
    spectral_hausdorff,
)
from .suite import CheckResult, run_invariant_suite

__version__ = "0.1.0"
