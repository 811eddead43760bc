"""Per-component decay-rate equations and their aggregation.

Continuous time: eta_i solves  f_i(v)/v_i + (g_i(v)/v_i) e^{eta tau} + eta = 0,
a strictly increasing equation with a sign change on [0, -(f_i+g_i)(v)/v_i].
Discrete time: gamma_i in (0,1) solves  f_i(v)/v_i + (g_i(v)/v_i) gamma^{-d}
= gamma, strictly decreasing minus strictly increasing.  Both are bisected;
the equations are monotone with cheap evaluations, so guaranteed bracketing
beats Newton's quadratic order at these sizes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .certify import verify_continuous, verify_discrete
from .fields import HomogeneousField
from .linalg import DEFAULT_TOL, STRICT_TOL, PositiveVector
from . import certify

CONTINUOUS = "continuous"
DISCRETE = "discrete"

_MAX_BISECT = 512


class CertificateRequiredError(ValueError):
    """The weight vector does not certify the system, so no rate exists."""


@dataclass(frozen=True, eq=False)
class RateResult:
    """Componentwise guaranteed rates plus the aggregate bound.

    Continuous: rates are eta_i > 0 (units 1/time) and the aggregate is
    min eta_i.  Discrete: rates are gamma_i in (0,1) (per step) and the
    aggregate is max gamma_i.  Components with f_i(v) = g_i(v) = 0 decay
    faster than any rate; they appear in `excluded` and as inf (continuous)
    or 0 (discrete) in per_component, and do not enter the aggregate.
    """

    per_component: np.ndarray
    aggregate: float
    delay_bound: float | int
    kind: str
    excluded: tuple[int, ...] = ()

    def __post_init__(self):
        p = np.asarray(self.per_component, dtype=float).copy()
        p.flags.writeable = False
        object.__setattr__(self, "per_component", p)

    def envelope_expression(self) -> str:
        if self.kind == CONTINUOUS:
            return f"exp(-{self.aggregate!r}*t)"
        return f"{self.aggregate!r}^k"


def _exp(z: float) -> float:
    try:
        return math.exp(z)
    except OverflowError:
        return math.inf


def _negligible(values: np.ndarray, i: int) -> bool:
    return abs(values[i]) <= STRICT_TOL * max(1.0, float(np.max(np.abs(values))))


def _eta_scalar(a: float, b: float, tau: float, tol: float) -> float:
    """Root of a + b e^{eta tau} + eta = 0 for a + b < 0, b > 0."""
    if tau == 0.0:
        return -(a + b)
    lo, hi = 0.0, -(a + b)
    r_lo = a + b
    r_hi = b * (_exp(hi * tau) - 1.0)
    assert r_lo < 0.0 <= r_hi, "bracket endpoints must straddle the root"
    for _ in range(_MAX_BISECT):
        mid = 0.5 * (lo + hi)
        r = a + b * _exp(mid * tau) + mid
        if abs(r) <= tol:
            return mid
        if r < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-16 * max(1.0, hi):
            return mid
    raise ArithmeticError("rate bisection did not converge")


def _pow_neg(base: float, d: int) -> float:
    try:
        return base ** (-d)
    except OverflowError:
        return math.inf


def _gamma_scalar(a: float, b: float, d: int, tol: float) -> float:
    """Root in (0,1) of a + b gamma^{-d} = gamma for a + b < 1, b > 0."""
    if d == 0:
        return a + b
    lo, hi = max(a, 1e-12), 1.0
    r_lo = a + b * _pow_neg(lo, d) - lo
    r_hi = a + b - 1.0
    assert r_hi < 0.0 < r_lo, "bracket endpoints must straddle the root"
    for _ in range(_MAX_BISECT):
        mid = 0.5 * (lo + hi)
        r = a + b * _pow_neg(mid, d) - mid
        if abs(r) <= tol:
            return mid
        if r > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-16:
            return mid
    raise ArithmeticError("rate bisection did not converge")


def eta_components(
    f: HomogeneousField,
    g: HomogeneousField,
    v: PositiveVector,
    tau_max: float,
    tol: float = DEFAULT_TOL,
) -> RateResult:
    """Continuous-time guaranteed rates for a certifying v.

    Requires f(v) + g(v) < 0 (re-verified here) and tau_max >= 0.  The
    aggregate is the supremum min_i eta_i; certified decay holds for every
    rate strictly below it, so envelope consumers shrink it by (1 - 1e-6).
    """
    if tau_max < 0:
        raise ValueError("tau_max must be nonnegative")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if verify_continuous(f, g, v) is None:
        raise CertificateRequiredError("v does not satisfy f(v) + g(v) < 0")
    fv = f(v.entries)
    gv = g(v.entries)
    per = np.empty(v.dim)
    excluded = []
    for i in range(v.dim):
        a = fv[i] / v.entries[i]
        b = gv[i] / v.entries[i]
        if _negligible(gv, i):
            if _negligible(fv, i):
                # component decays faster than any finite rate
                per[i] = math.inf
                excluded.append(i)
            else:
                per[i] = -a
        else:
            per[i] = _eta_scalar(a, b, float(tau_max), tol)
    active = [p for i, p in enumerate(per) if i not in excluded]
    aggregate = float(min(active)) if active else math.inf
    return RateResult(per, aggregate, float(tau_max), CONTINUOUS, tuple(excluded))


def gamma_components(
    f: HomogeneousField,
    g: HomogeneousField,
    v: PositiveVector,
    d_max: int,
    tol: float = DEFAULT_TOL,
) -> RateResult:
    """Discrete-time guaranteed rates for a certifying v.

    Requires f(v) + g(v) < v (re-verified here) and integer d_max >= 0.
    The aggregate max_i gamma_i bounds the per-step contraction directly.
    """
    if not isinstance(d_max, (int, np.integer)) or isinstance(d_max, bool):
        raise ValueError("d_max must be an integer")
    if d_max < 0:
        raise ValueError("d_max must be nonnegative")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if verify_discrete(f, g, v) is None:
        raise CertificateRequiredError("v does not satisfy f(v) + g(v) < v")
    fv = f(v.entries)
    gv = g(v.entries)
    per = np.empty(v.dim)
    excluded = []
    for i in range(v.dim):
        a = max(fv[i] / v.entries[i], 0.0)
        b = gv[i] / v.entries[i]
        if _negligible(gv, i):
            if _negligible(fv, i):
                per[i] = 0.0
                excluded.append(i)
            else:
                per[i] = min(a, 1.0 - STRICT_TOL)
        else:
            per[i] = _gamma_scalar(a, b, int(d_max), tol)
    active = [p for i, p in enumerate(per) if i not in excluded]
    aggregate = float(max(active)) if active else 0.0
    return RateResult(per, aggregate, int(d_max), DISCRETE, tuple(excluded))


def eta_components_general(
    A, B, v: PositiveVector, tau_max: float, tol: float = DEFAULT_TOL
) -> RateResult:
    """Rates for a general continuous linear system via its majorant.

    Identical solver applied to rows a_ii + sum_{j!=i} |a_ij| v_j / v_i and
    sum_j |b_ij| v_j / v_i; requires (A^M + |B|) v < 0.
    """
    am, babs = certify.majorant_continuous(A, B)
    if certify.verify_general_continuous(A, B, v) is None:
        raise CertificateRequiredError("v does not satisfy (A^M + |B|) v < 0")
    return eta_components(
        HomogeneousField.from_matrix(am.entries),
        HomogeneousField.from_matrix(babs.entries),
        v,
        tau_max,
        tol,
    )


def gamma_components_general(
    A, B, v: PositiveVector, d_max: int, tol: float = DEFAULT_TOL
) -> RateResult:
    """Rates for a general discrete linear system via entrywise absolute
    values; requires (|A| + |B|) v < v."""
    aabs, babs = certify.majorant_discrete(A, B)
    if certify.verify_general_discrete(A, B, v) is None:
        raise CertificateRequiredError("v does not satisfy (|A| + |B|) v < v")
    return gamma_components(
        HomogeneousField.from_matrix(aabs.entries),
        HomogeneousField.from_matrix(babs.entries),
        v,
        d_max,
        tol,
    )
