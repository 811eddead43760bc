"""Best guaranteed decay rate over all weight vectors, for linear systems.

The search for the optimal rate is convex after a logarithmic change of
variables, but it collapses to one-dimensional monotone root finding: for
a fixed candidate rate the constraints are a Metzler feasibility question
with an exact linear-algebra answer.  Continuous time bisects the root of

    phi(eta) = spectral_abscissa(A + e^{eta tau} B) + eta

(strictly increasing, negative at 0 exactly when the system is stable);
discrete time bisects the fixed point of psi(gamma) = perron_root(A +
gamma^{-d} B), nonincreasing in gamma.  The optimizing weights are the
dominant eigenvector at the optimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import certify
from .linalg import (
    DEFAULT_TOL,
    MetzlerMatrix,
    NonnegativeMatrix,
    PositiveVector,
    _positive_solve,
    is_irreducible,
    perron_vector,
    spectral_abscissa,
)

_MAX_BISECT = 256
_RATE_BACKOFF = 1e-6
_GAMMA_FLOOR = 1e-6


@dataclass(frozen=True, eq=False)
class OptimalRate:
    rate: float
    v_star: PositiveVector  # unit 2-norm
    iterations: int
    residual: float
    degenerate: bool = False
    warnings: tuple[str, ...] = ()


def _exp(z: float) -> float:
    try:
        return math.exp(z)
    except OverflowError:
        return math.inf


def _pow_neg(base: float, d: int) -> float:
    try:
        return base ** (-d)
    except OverflowError:
        return math.inf


def _scaled_sum(a, scale: float, b, b_zero: bool) -> "np.ndarray | None":
    """a + scale * b, or None when the product overflows (b nonzero)."""
    if b_zero:
        return a
    if math.isinf(scale):
        return None
    out = a + scale * b
    if not np.all(np.isfinite(out)):
        return None
    return out


def optimize_eta(
    A: MetzlerMatrix,
    B: NonnegativeMatrix,
    tau_max: float,
    tol: float = DEFAULT_TOL,
) -> OptimalRate | None:
    """Largest guaranteed continuous-time rate, or None when A+B is not
    Hurwitz (no positive weights certify the system at any rate)."""
    if tau_max < 0:
        raise ValueError("tau_max must be nonnegative")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if certify.synthesize_linear_continuous(A, B) is None:
        return None
    a, b = A.entries, B.entries
    b_zero = not b.any()
    inner = tol / 4.0

    def phi(eta: float) -> float:
        shifted = _scaled_sum(a, _exp(eta * tau_max), b, b_zero)
        if shifted is None:
            return math.inf  # delayed part overflows; abscissa dominates eta
        return spectral_abscissa(MetzlerMatrix(shifted), tol=inner) + eta

    iterations = 0
    hi = 1.0
    while phi(hi) <= 0.0:
        hi *= 2.0
        iterations += 1
        if hi > 2.0**60:
            raise ArithmeticError("failed to bracket the optimal rate")
    lo = 0.0
    mid, residual = lo, phi(lo)
    if residual >= -tol / 2.0:
        # stability margin below solver resolution; rate is effectively 0
        return _finish_eta(a, b, tau_max, 0.0, iterations, residual, tol,
                           degenerate=True)
    for _ in range(_MAX_BISECT):
        mid = 0.5 * (lo + hi)
        residual = phi(mid)
        iterations += 1
        if abs(residual) <= tol / 2.0:
            break
        if residual < 0.0:
            lo = mid
        else:
            hi = mid
    return _finish_eta(a, b, tau_max, mid, iterations, residual, tol)


def _finish_eta(a, b, tau_max, eta_star, iterations, residual, tol,
                degenerate=False) -> OptimalRate:
    matrix = MetzlerMatrix(
        _scaled_sum(a, _exp(eta_star * tau_max), b, not b.any())
    )
    if is_irreducible(matrix):
        v = perron_vector(matrix, tol=min(tol, DEFAULT_TOL))
        return OptimalRate(eta_star, v, iterations, residual, degenerate)
    # reducible optimum: no positive dominant eigenvector; certify at a
    # slightly reduced rate through the all-ones solve instead
    rate = eta_star * (1.0 - _RATE_BACKOFF)
    for _ in range(80):
        m = a + _exp(rate * tau_max) * b + rate * np.eye(a.shape[0])
        sol = _positive_solve(m)
        if sol is not None:
            v = PositiveVector(sol / np.linalg.norm(sol))
            return OptimalRate(
                rate, v, iterations, residual, degenerate,
                ("optimal matrix is reducible; weights from the all-ones"
                 " solve at a slightly reduced rate",),
            )
        rate = rate * (1.0 - _RATE_BACKOFF) - tol
    raise ArithmeticError("could not certify a rate near the optimum")


def optimize_gamma(
    A: NonnegativeMatrix,
    B: NonnegativeMatrix,
    d_max: int,
    tol: float = DEFAULT_TOL,
) -> OptimalRate | None:
    """Smallest guaranteed discrete-time contraction factor, or None when
    rho(A+B) >= 1."""
    if not isinstance(d_max, (int, np.integer)) or isinstance(d_max, bool):
        raise ValueError("d_max must be an integer")
    if d_max < 0:
        raise ValueError("d_max must be nonnegative")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if certify.synthesize_linear_discrete(A, B) is None:
        return None
    a, b = A.entries, B.entries
    b_zero = not b.any()
    inner = tol / 4.0

    def h(gamma: float) -> float:
        shifted = _scaled_sum(a, _pow_neg(gamma, int(d_max)), b, b_zero)
        if shifted is None:
            return math.inf  # delayed part overflows; radius dominates gamma
        return spectral_abscissa(MetzlerMatrix(shifted), tol=inner) - gamma

    iterations = 0
    lo, hi = _GAMMA_FLOOR, 1.0
    residual = h(lo)
    if residual <= 0.0:
        # spectral radius below the floor everywhere (A and B essentially 0)
        return _finish_gamma(a, b, d_max, _GAMMA_FLOOR, iterations, residual,
                             tol, degenerate=True)
    mid = lo
    for _ in range(_MAX_BISECT):
        mid = 0.5 * (lo + hi)
        residual = h(mid)
        iterations += 1
        if abs(residual) <= tol / 2.0:
            break
        if residual > 0.0:
            lo = mid
        else:
            hi = mid
    return _finish_gamma(a, b, d_max, mid, iterations, residual, tol)


def _finish_gamma(a, b, d_max, gamma_star, iterations, residual, tol,
                  degenerate=False) -> OptimalRate:
    def shifted(gamma: float) -> np.ndarray:
        return _scaled_sum(a, _pow_neg(gamma, int(d_max)), b, not b.any())

    matrix = MetzlerMatrix(shifted(gamma_star))
    if not degenerate and is_irreducible(matrix):
        v = perron_vector(matrix, tol=min(tol, DEFAULT_TOL))
        return OptimalRate(gamma_star, v, iterations, residual, degenerate)
    # reducible (or degenerate) optimum: certify at a slightly larger
    # contraction factor via the all-ones solve
    rate = min(gamma_star * (1.0 + _RATE_BACKOFF), 0.5 * (1.0 + gamma_star))
    for _ in range(80):
        sol = _positive_solve(shifted(rate) - rate * np.eye(a.shape[0]))
        if sol is not None:
            v = PositiveVector(sol / np.linalg.norm(sol))
            note = (
                "optimal matrix is reducible; weights from the all-ones"
                " solve at a slightly increased contraction factor",
            )
            return OptimalRate(rate, v, iterations, residual, degenerate, note)
        rate = min(rate * (1.0 + _RATE_BACKOFF) + tol, 0.5 * (1.0 + rate))
    raise ArithmeticError("could not certify a contraction factor near the optimum")


def optimize_general(
    A, B, *, tau_max: float | None = None, d_max: int | None = None,
    tol: float = DEFAULT_TOL,
) -> OptimalRate | None:
    """Optimal rate for general (possibly sign-indefinite) linear systems.

    Builds the dominating positive pair first, then optimizes it.  Supply
    exactly one of tau_max (continuous) or d_max (discrete).
    """
    if (tau_max is None) == (d_max is None):
        raise ValueError("supply exactly one of tau_max or d_max")
    if tau_max is not None:
        am, babs = certify.majorant_continuous(A, B)
        return optimize_eta(am, babs, tau_max, tol)
    aabs, babs = certify.majorant_discrete(A, B)
    return optimize_gamma(aabs, babs, d_max, tol)
