"""Delay-independent stability certificates, guaranteed decay rates, and
trajectory validation for positive time-delay systems."""

from .certify import (
    StabilityCertificate,
    majorant_continuous,
    majorant_discrete,
    synthesize_linear_continuous,
    synthesize_linear_discrete,
    verify_continuous,
    verify_discrete,
    verify_general_continuous,
    verify_general_discrete,
)
from .decay import (
    RateResult,
    eta_components,
    eta_components_general,
    gamma_components,
    gamma_components_general,
)
from .document import SystemDocument, load_document, parse_document
from .expr import parse_expression, parse_field
from .fields import (
    HomogeneousField,
    ProbeVerdict,
    probe_cooperative,
    probe_homogeneity,
    probe_order_preserving,
)
from .linalg import (
    MetzlerMatrix,
    NonnegativeMatrix,
    PositiveVector,
    hurwitz_certificate,
    is_irreducible,
    perron_root,
    perron_vector,
    perturb_irreducible,
    spectral_abscissa,
    weighted_inf_norm,
)
from .optimize import OptimalRate, optimize_eta, optimize_gamma, optimize_general
from .simulate import (
    DelaySignal,
    EnvelopeReport,
    InitialHistory,
    Trajectory,
    check_envelope,
    positivity_monitor,
    simulate_continuous,
    simulate_discrete,
    write_trajectory_csv,
)

__version__ = "0.1.0"

__all__ = [
    "DelaySignal",
    "EnvelopeReport",
    "HomogeneousField",
    "InitialHistory",
    "MetzlerMatrix",
    "NonnegativeMatrix",
    "OptimalRate",
    "PositiveVector",
    "ProbeVerdict",
    "RateResult",
    "StabilityCertificate",
    "SystemDocument",
    "Trajectory",
    "check_envelope",
    "eta_components",
    "eta_components_general",
    "gamma_components",
    "gamma_components_general",
    "hurwitz_certificate",
    "is_irreducible",
    "load_document",
    "majorant_continuous",
    "majorant_discrete",
    "optimize_eta",
    "optimize_gamma",
    "optimize_general",
    "parse_document",
    "parse_expression",
    "parse_field",
    "perron_root",
    "perron_vector",
    "perturb_irreducible",
    "positivity_monitor",
    "probe_cooperative",
    "probe_homogeneity",
    "probe_order_preserving",
    "simulate_continuous",
    "simulate_discrete",
    "spectral_abscissa",
    "synthesize_linear_continuous",
    "synthesize_linear_discrete",
    "verify_continuous",
    "verify_discrete",
    "verify_general_continuous",
    "verify_general_discrete",
    "weighted_inf_norm",
    "write_trajectory_csv",
]
