"""Validated matrix/vector carriers and Perron-Frobenius spectral primitives.

Everything here is specialized to Metzler / nonnegative matrices, where
stability questions reduce to linear solves with positive right-hand sides.
No general eigensolver is used: the Hurwitz test is an M-matrix solve, and
spectral quantities come from bisecting that test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Relative margin used for every strict inequality on floats: "v > 0" means
# v_i > STRICT_TOL * ||v||_inf, and "Mv < 0" is read the same way.
STRICT_TOL = 1e-12

# Default absolute tolerance for bisected scalars.
DEFAULT_TOL = 1e-9


class DimensionMismatchError(ValueError):
    pass


class ReducibleMatrixError(ValueError):
    """Operation needs an irreducible matrix (strongly connected sparsity)."""


def _validated_square(entries, what: str) -> np.ndarray:
    m = np.array(entries, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise ValueError(f"{what} must be a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{what} entries must be finite")
    m.flags.writeable = False
    return m


@dataclass(frozen=True, eq=False)
class PositiveVector:
    """Strictly positive weight vector.

    Positivity carries a floating-point margin: every entry must exceed
    STRICT_TOL times the largest entry.
    """

    entries: np.ndarray

    def __post_init__(self):
        v = np.array(self.entries, dtype=float)
        if v.ndim != 1 or v.size < 1:
            raise ValueError(f"expected a nonempty vector, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("vector entries must be finite")
        if np.min(v) <= STRICT_TOL * np.max(np.abs(v)):
            raise ValueError("vector entries must be strictly positive")
        v.flags.writeable = False
        object.__setattr__(self, "entries", v)

    @property
    def dim(self) -> int:
        return self.entries.size

    def __len__(self) -> int:
        return self.entries.size

    def unit(self) -> "PositiveVector":
        """Copy scaled to unit 2-norm."""
        return PositiveVector(self.entries / np.linalg.norm(self.entries))

    def __repr__(self) -> str:
        return f"PositiveVector({self.entries.tolist()})"


@dataclass(frozen=True, eq=False)
class MetzlerMatrix:
    """Square matrix with nonnegative off-diagonal entries."""

    entries: np.ndarray

    def __post_init__(self):
        m = _validated_square(self.entries, "Metzler matrix")
        off = m.copy()
        np.fill_diagonal(off, 0.0)
        if np.min(off) < 0.0:
            i, j = np.unravel_index(np.argmin(off), off.shape)
            raise ValueError(
                f"off-diagonal entry ({i},{j})={m[i, j]} is negative; not Metzler"
            )
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __repr__(self) -> str:
        return f"MetzlerMatrix({self.entries.tolist()})"


@dataclass(frozen=True, eq=False)
class NonnegativeMatrix:
    """Square matrix with all entries nonnegative."""

    entries: np.ndarray

    def __post_init__(self):
        m = _validated_square(self.entries, "nonnegative matrix")
        if np.min(m) < 0.0:
            i, j = np.unravel_index(np.argmin(m), m.shape)
            raise ValueError(f"entry ({i},{j})={m[i, j]} is negative")
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def as_metzler(self) -> MetzlerMatrix:
        return MetzlerMatrix(self.entries)

    def __repr__(self) -> str:
        return f"NonnegativeMatrix({self.entries.tolist()})"


def weighted_inf_norm(x, v: PositiveVector) -> float:
    """max_i |x_i| / v_i."""
    x = np.asarray(x, dtype=float)
    if x.shape != (v.dim,):
        raise DimensionMismatchError(
            f"vector of shape {x.shape} against {v.dim} weights"
        )
    return float(np.max(np.abs(x) / v.entries))


def _positive_solve(m: np.ndarray) -> np.ndarray | None:
    """Solve m v = -1 (all-ones right side, negated); keep v only if v > 0.

    For a Metzler m this is the Hurwitz test: a solution with v > 0 gives
    m v = -1 < 0, and conversely a Hurwitz Metzler matrix has -m^{-1} >= 0
    with strictly positive row sums, so v = -m^{-1} 1 > 0.  LAPACK's
    partially pivoted LU does the factorization.
    """
    try:
        v = np.linalg.solve(m, -np.ones(m.shape[0]))
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(v)):
        return None
    if np.min(v) <= STRICT_TOL * np.max(np.abs(v)):
        return None
    return v


def hurwitz_certificate(M: MetzlerMatrix) -> PositiveVector | None:
    """Positive v with Mv < 0 when M is Hurwitz, else None.

    Singular M maps to None: zero is then an eigenvalue, so M is not
    Hurwitz.
    """
    v = _positive_solve(M.entries)
    return None if v is None else PositiveVector(v)


def spectral_abscissa(M: MetzlerMatrix, tol: float = DEFAULT_TOL) -> float:
    """Largest real part of the eigenvalues of a Metzler matrix, within tol.

    Bisects the shift s using the Hurwitz solve of M - s I as a monotone
    feasibility oracle: M - s I is Hurwitz exactly when s exceeds the
    abscissa.  The initial bracket is [min_i m_ii, max row sum + 1]; both
    ends are valid because the abscissa of a Metzler matrix dominates every
    diagonal entry and is dominated by the largest row sum.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    m = M.entries
    diag = np.diag(m)
    lo = float(np.min(diag))
    off = m - np.diag(diag)
    hi = float(np.max(diag + off.sum(axis=1))) + 1.0
    eye = np.eye(m.shape[0])
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break  # float resolution floor at this magnitude
        if _positive_solve(m - mid * eye) is not None:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def perron_root(N: NonnegativeMatrix, tol: float = DEFAULT_TOL) -> float:
    """Spectral radius of a nonnegative matrix, within tol.

    For nonnegative matrices the spectral radius is itself an eigenvalue
    with maximal real part, so the Metzler abscissa applies directly.
    """
    return max(0.0, spectral_abscissa(N.as_metzler(), tol))


def _reachable_from_first(adj: np.ndarray) -> np.ndarray:
    n = adj.shape[0]
    reached = np.zeros(n, dtype=bool)
    reached[0] = True
    for _ in range(n):
        grown = reached | adj[reached].any(axis=0)
        if np.array_equal(grown, reached):
            break
        reached = grown
    return reached


def is_irreducible(M: MetzlerMatrix | NonnegativeMatrix) -> bool:
    """Strong connectivity of the off-diagonal sparsity digraph."""
    adj = M.entries != 0.0
    adj = adj.copy()
    np.fill_diagonal(adj, False)
    return bool(
        _reachable_from_first(adj).all() and _reachable_from_first(adj.T).all()
    )


def perturb_irreducible(M: MetzlerMatrix, epsilon: float = 1e-12) -> MetzlerMatrix:
    """Copy of M with every zero off-diagonal entry raised to epsilon.

    Opt-in helper for callers that insist on a Perron vector of a reducible
    matrix.  The perturbation changes any rate certified afterwards, which
    is why perron_vector refuses to do this silently.
    """
    m = M.entries.copy()
    off_zero = (m == 0.0)
    np.fill_diagonal(off_zero, False)
    m[off_zero] = epsilon
    return MetzlerMatrix(m)


def perron_vector(M: MetzlerMatrix, tol: float = DEFAULT_TOL) -> PositiveVector:
    """Dominant eigenvector of an irreducible Metzler matrix, unit 2-norm.

    Power iteration on M + s I with shift s = 1 + max_i |m_ii|; the shifted
    matrix is nonnegative with positive diagonal, hence primitive, so the
    iteration converges from the all-ones start.  Convergence target:
    ||Mv - mu v||_inf <= tol * ||M||_inf with mu the spectral abscissa.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    m = M.entries
    n = m.shape[0]
    if n == 1:
        return PositiveVector(np.ones(1))
    if not is_irreducible(M):
        raise ReducibleMatrixError(
            "matrix is reducible; perturb_irreducible() can be used explicitly"
        )
    scale = float(np.max(np.abs(m).sum(axis=1)))  # ||M||_inf, > 0 here
    target = tol * scale
    mu = spectral_abscissa(M, tol=target / 4.0)
    shift = 1.0 + float(np.max(np.abs(np.diag(m))))
    p = m + shift * np.eye(n)
    x = np.full(n, 1.0 / math.sqrt(n))
    for _ in range(200_000):
        y = p @ x
        x = y / np.linalg.norm(y)
        if np.max(np.abs(m @ x - mu * x)) <= target:
            return PositiveVector(x)
    raise ArithmeticError("power iteration did not reach the residual target")
