"""Symbolic symmetry calculus for the differential-difference KP equation."""

__version__ = "0.1.0"

from .algebra import (  # noqa: E402
    Atom,
    Expression,
    Jet,
    Monomial,
    add,
    apply_dinv,
    counting_sums,
    dx,
    equal_nf,
    mul,
    normalize,
    shift,
    theta,
    u,
)
from .calculus import ad_power, directional_derivative, frechet_operator, lie_bracket  # noqa: E402
from .dsl import from_json, parse, print_canonical, print_latex, to_json  # noqa: E402
from .errors import (  # noqa: E402
    BasePointViolation,
    DDKPError,
    DepthBlowup,
    DSLSyntaxError,
    NonSummableAtom,
    NotNilpotent,
)
from .oracle import LatticeState, ZeroTestConfig, directional_eval, eval_expr, random_state, zero_test  # noqa: E402
from .symmetries import (  # noqa: E402
    TimePolynomial,
    VerificationReport,
    builtin,
    hierarchy,
    is_master_symmetry,
    is_symmetry,
    nilpotency_verify,
    sl2_verify,
    time_symmetry,
    verify_time_symmetry,
    weight_verify,
)
