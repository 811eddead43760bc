"""Existence tests and verification for stability certificates.

A certificate is a positive vector v whose image under the system's
aggregate map is strictly negative (continuous time) or strictly below v
(discrete time).  Synthesis is only available for linear systems, where
the all-ones solve gives a canonical interior point; for nonlinear fields
only verification of a supplied v is possible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import HomogeneousField
from .linalg import (
    STRICT_TOL,
    DimensionMismatchError,
    MetzlerMatrix,
    NonnegativeMatrix,
    PositiveVector,
    _positive_solve,
)

CONT_NONLINEAR = "cont-nonlinear"
CONT_LINEAR = "cont-linear"
CONT_GENERAL = "cont-general"
DISC_NONLINEAR = "disc-nonlinear"
DISC_LINEAR = "disc-linear"
DISC_GENERAL = "disc-general"

# Smoothness away from the origin cannot be established by point probes;
# certificates over expression fields carry the assumption explicitly.
SMOOTHNESS_NOTE = (
    "assumes f, g continuously differentiable away from the origin"
    " (not machine-checked)"
)


@dataclass(frozen=True, eq=False)
class StabilityCertificate:
    """Positive vector v plus the value of its defining inequality."""

    v: PositiveVector
    slack: np.ndarray
    kind: str
    assumptions: tuple[str, ...] = ()

    def __post_init__(self):
        s = np.asarray(self.slack, dtype=float)
        if not _strictly_negative(s):
            raise ValueError(f"certificate slack must be strictly negative: {s}")
        s = s.copy()
        s.flags.writeable = False
        object.__setattr__(self, "slack", s)


def _strictly_negative(s: np.ndarray) -> bool:
    """Entrywise s < 0 with the floating-point margin of STRICT_TOL."""
    if s.size == 0 or not np.all(np.isfinite(s)):
        return False
    return bool(np.all(s < -STRICT_TOL * np.max(np.abs(s))))


def _check_pair(f: HomogeneousField, g: HomogeneousField, v: PositiveVector):
    if f.dimension != g.dimension or f.dimension != v.dim:
        raise DimensionMismatchError(
            f"fields of dimension {f.dimension}/{g.dimension} with"
            f" {v.dim} weights"
        )
    for name, field in (("f", f), ("g", g)):
        if field.degree != 1.0:
            raise ValueError(
                f"certification requires degree one, {name} has degree"
                f" {field.degree}"
            )


def _nonlinear(f: HomogeneousField, g: HomogeneousField) -> bool:
    return not (f.is_linear and g.is_linear)


def verify_continuous(
    f: HomogeneousField, g: HomogeneousField, v: PositiveVector
) -> StabilityCertificate | None:
    """Accept v when f(v) + g(v) < 0 strictly; the slack is that value."""
    _check_pair(f, g, v)
    slack = f(v.entries) + g(v.entries)
    if not _strictly_negative(slack):
        return None
    if _nonlinear(f, g):
        return StabilityCertificate(v, slack, CONT_NONLINEAR, (SMOOTHNESS_NOTE,))
    return StabilityCertificate(v, slack, CONT_LINEAR)


def verify_discrete(
    f: HomogeneousField, g: HomogeneousField, v: PositiveVector
) -> StabilityCertificate | None:
    """Accept v when f(v) + g(v) < v strictly; slack is f(v)+g(v)-v."""
    _check_pair(f, g, v)
    slack = f(v.entries) + g(v.entries) - v.entries
    if not _strictly_negative(slack):
        return None
    if _nonlinear(f, g):
        return StabilityCertificate(v, slack, DISC_NONLINEAR, (SMOOTHNESS_NOTE,))
    return StabilityCertificate(v, slack, DISC_LINEAR)


def synthesize_linear_continuous(
    A: MetzlerMatrix, B: NonnegativeMatrix
) -> StabilityCertificate | None:
    """Canonical v with (A+B)v = -1 when A+B is Hurwitz, else None.

    None means the positive linear system is not exponentially stable for
    all bounded delays; the zero-delay system is already unstable.
    """
    if A.dim != B.dim:
        raise DimensionMismatchError(f"A is {A.dim}x{A.dim}, B is {B.dim}x{B.dim}")
    m = A.entries + B.entries
    v = _positive_solve(m)
    if v is None:
        return None
    return StabilityCertificate(PositiveVector(v), m @ v, CONT_LINEAR)


def synthesize_linear_discrete(
    A: NonnegativeMatrix, B: NonnegativeMatrix
) -> StabilityCertificate | None:
    """Canonical v with (A+B)v = v - 1 when rho(A+B) < 1, else None."""
    if A.dim != B.dim:
        raise DimensionMismatchError(f"A is {A.dim}x{A.dim}, B is {B.dim}x{B.dim}")
    s = A.entries + B.entries
    # (A+B) - I is Metzler; its Hurwitz solve is exactly the Schur test
    v = _positive_solve(s - np.eye(A.dim))
    if v is None:
        return None
    return StabilityCertificate(PositiveVector(v), s @ v - v, DISC_LINEAR)


def majorant_continuous(A, B) -> tuple[MetzlerMatrix, NonnegativeMatrix]:
    """Dominating positive pair for a general continuous linear system.

    Keeps the diagonal of A, takes absolute values elsewhere.
    """
    a = np.array(A, dtype=float)
    b = np.array(B, dtype=float)
    if a.shape != b.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatchError(
            f"expected equal square shapes, got {a.shape} and {b.shape}"
        )
    am = np.abs(a)
    np.fill_diagonal(am, np.diag(a))
    return MetzlerMatrix(am), NonnegativeMatrix(np.abs(b))


def majorant_discrete(A, B) -> tuple[NonnegativeMatrix, NonnegativeMatrix]:
    """Entrywise absolute values, the discrete-time dominating pair."""
    a = np.array(A, dtype=float)
    b = np.array(B, dtype=float)
    if a.shape != b.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatchError(
            f"expected equal square shapes, got {a.shape} and {b.shape}"
        )
    return NonnegativeMatrix(np.abs(a)), NonnegativeMatrix(np.abs(b))


def verify_general_continuous(A, B, v: PositiveVector) -> StabilityCertificate | None:
    """Accept v when (A^M + |B|) v < 0 for general real matrices A, B."""
    am, babs = majorant_continuous(A, B)
    if am.dim != v.dim:
        raise DimensionMismatchError(f"{am.dim}x{am.dim} matrices, {v.dim} weights")
    slack = (am.entries + babs.entries) @ v.entries
    if not _strictly_negative(slack):
        return None
    return StabilityCertificate(v, slack, CONT_GENERAL)


def verify_general_discrete(A, B, v: PositiveVector) -> StabilityCertificate | None:
    """Accept v when (|A| + |B|) v < v for general real matrices A, B."""
    aabs, babs = majorant_discrete(A, B)
    if aabs.dim != v.dim:
        raise DimensionMismatchError(f"{aabs.dim}x{aabs.dim} matrices, {v.dim} weights")
    slack = (aabs.entries + babs.entries) @ v.entries - v.entries
    if not _strictly_negative(slack):
        return None
    return StabilityCertificate(v, slack, DISC_GENERAL)
