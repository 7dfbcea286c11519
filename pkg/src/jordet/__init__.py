"""Exact tools for Jordan product determined points of full matrix algebras."""

from .applications import (
    DerivableSpaceReport,
    LinMap,
    MultReport,
    PreconditionFailed,
    derivable_space,
    inner_automorphism,
    inner_derivation,
    is_jordan_derivation,
    multiplicative_check,
)
from .decision import (
    Certificate,
    DecisionReport,
    Strategy,
    certificate_extract,
    certificate_validate,
    decide,
)
from .jordan import jordan, kernel_of_jordan, sigma, unit
from .linalg import (
    QQ,
    CapabilityError,
    Matrix,
    NotInvertible,
    Ring,
    RingRejected,
    SpanAccumulator,
    parse_ring,
    ring_create,
)
from .replay import ReplayReport, load_bundled, load_catalog, run_catalog

__version__ = "0.1.0"
