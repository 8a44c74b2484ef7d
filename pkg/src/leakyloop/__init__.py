"""Ground states of leaky quantum loops and the mean-chord inequalities behind
their isoperimetric optimisation."""

from .errors import (
    ArgumentError,
    ConvergenceError,
    LeakyLoopError,
    NoBoundStateError,
    NonClosableError,
    OnSupportError,
    PreconditionError,
    SingularChordError,
)
from .specfun import DomainError, bessel_k0, free_kernel
from .geometry import (
    ArcLengthCurve,
    CurvatureSpec,
    Polygon,
    build_circle,
    build_closed_from_curvature,
    build_ellipse,
    build_from_curvature,
    build_lens,
    build_paperclip,
    build_regular_polygon,
    close_curve,
    random_curvature_spec,
    resample,
    rhomboid,
)
from .spectral import (
    BSMatrix,
    GroundStateResult,
    assemble_bs_matrix,
    eigenfunction_at,
    ground_state,
    max_eigenpair,
    strong_coupling_reference,
)
from .chords import (
    ChordMoment,
    InequalityReport,
    check_continuous,
    check_discrete,
    chord_moment,
    implication_audit,
    jensen_chain_audit,
    lens_c2_closed_form,
)
from .perturb import F_n, I_g, ModeContribution, c2_from_curvature, second_order_expansion_audit

__version__ = "0.1.0"
