from .assemble import AssemblyOptions, RestrictionError, assemble_lp, decode_witness, default_restriction
from .certify import (
    CONTRADICTION_SETS,
    BisectionError,
    BisectionResult,
    CertifyConfig,
    FeasibilityOutcome,
    certify,
    inequality_decider,
    inequality_threshold,
    lp_decider,
    monotone_verdicts,
    threshold_bisect,
)
from .graph import (
    InflationError,
    InflationGraph,
    InjectableSet,
    build_cut_inflation,
    build_ring_inflation,
    environment_classes,
    injectable_sets,
    ring_symmetries,
)

__all__ = [
    "CONTRADICTION_SETS",
    "AssemblyOptions",
    "BisectionError",
    "BisectionResult",
    "CertifyConfig",
    "FeasibilityOutcome",
    "InflationError",
    "InflationGraph",
    "InjectableSet",
    "RestrictionError",
    "assemble_lp",
    "build_cut_inflation",
    "build_ring_inflation",
    "certify",
    "decode_witness",
    "default_restriction",
    "environment_classes",
    "inequality_decider",
    "inequality_threshold",
    "injectable_sets",
    "lp_decider",
    "monotone_verdicts",
    "ring_symmetries",
    "threshold_bisect",
]
