"""Evaluable vector fields and randomized class probes.

A HomogeneousField is either a list of expression ASTs or a linear form.
The probes gather statistical evidence that a field is homogeneous of a
given degree, cooperative, or order-preserving; they are evidence, not
proofs, and every caller that certifies stability from them says so.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .expr import (
    EvaluationDomainError,
    Node,
    compile_expr,
    format_expr,
    parse_field,
)
from .linalg import DimensionMismatchError

COOPERATIVE = "cooperative"
ORDER_PRESERVING = "order-preserving"
UNCLASSIFIED = "unclassified"

_CLASSES = (COOPERATIVE, ORDER_PRESERVING, UNCLASSIFIED)

# Scaling factors exercised by the homogeneity probe.
_PROBE_LAMBDAS = (0.5, 2.0, 3.7)


@dataclass(frozen=True, eq=False)
class HomogeneousField:
    """n-dimensional vector field with a declared homogeneity degree.

    Exactly one of exprs / matrix is set.  Fields vanish at the origin;
    construction checks this by evaluation.  Components whose defining
    expression is undefined at 0 (such as x1*x2/sqrt(x1^2+x2^2)) are
    extended there by continuity to 0.
    """

    dimension: int
    degree: float
    exprs: tuple[Node, ...] | None = None
    matrix: np.ndarray | None = None
    declared_class: str = UNCLASSIFIED

    def __post_init__(self):
        if (self.exprs is None) == (self.matrix is None):
            raise ValueError("exactly one of exprs / matrix must be given")
        if self.dimension < 1:
            raise ValueError("dimension must be at least 1")
        if not (self.degree > 0):
            raise ValueError("degree must be positive")
        if self.declared_class not in _CLASSES:
            raise ValueError(f"unknown class {self.declared_class!r}")
        if self.matrix is not None:
            m = np.array(self.matrix, dtype=float)
            if m.shape != (self.dimension, self.dimension):
                raise DimensionMismatchError(
                    f"linear form of shape {m.shape} for dimension {self.dimension}"
                )
            if not np.all(np.isfinite(m)):
                raise ValueError("linear form entries must be finite")
            m.flags.writeable = False
            object.__setattr__(self, "matrix", m)
        at_zero = self(np.zeros(self.dimension))
        if np.any(at_zero != 0.0):
            raise ValueError(f"field does not vanish at the origin: f(0)={at_zero}")

    @classmethod
    def from_strings(
        cls,
        sources: list[str],
        degree: float = 1.0,
        declared_class: str = UNCLASSIFIED,
    ) -> "HomogeneousField":
        n = len(sources)
        return cls(n, degree, exprs=parse_field(sources, n),
                   declared_class=declared_class)

    @classmethod
    def from_matrix(
        cls, matrix, declared_class: str = UNCLASSIFIED
    ) -> "HomogeneousField":
        m = np.asarray(matrix, dtype=float)
        return cls(m.shape[0], 1.0, matrix=m, declared_class=declared_class)

    @cached_property
    def _compiled(self):
        return tuple(compile_expr(e) for e in self.exprs)

    @property
    def is_linear(self) -> bool:
        return self.matrix is not None

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dimension,):
            raise DimensionMismatchError(
                f"state of shape {x.shape} for dimension {self.dimension}"
            )
        if self.matrix is not None:
            return self.matrix @ x
        at_zero = not np.any(x)
        out = np.empty(self.dimension)
        for i, component in enumerate(self._compiled):
            try:
                out[i] = component(x)
            except EvaluationDomainError:
                if at_zero:
                    out[i] = 0.0  # continuity extension
                else:
                    raise
        return out

    def describe(self) -> str:
        """Canonical one-line source form, stable across runs."""
        if self.matrix is not None:
            body = f"linear{self.matrix.tolist()!r}"
        else:
            body = "; ".join(format_expr(e) for e in self.exprs)
        return f"[n={self.dimension} deg={self.degree!r}] {body}"


@dataclass(frozen=True)
class ProbeVerdict:
    passed: bool
    counterexample: tuple | None = None
    note: str = ""

    def __bool__(self) -> bool:
        return self.passed


def _sample_positive(rng: np.random.Generator, n: int) -> np.ndarray:
    # log-uniform over [1e-2, 1e2]: homogeneity is a scaling law, so the
    # samples must span scales
    return 10.0 ** rng.uniform(-2.0, 2.0, size=n)


def probe_homogeneity(
    field: HomogeneousField, alpha: float, trials: int = 32, seed: int = 0
) -> ProbeVerdict:
    """Check f(lambda x) = lambda^alpha f(x) on random positive samples."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        x = _sample_positive(rng, field.dimension)
        fx = field(x)
        bound = 1e-9 * (1.0 + np.max(np.abs(fx)))
        for lam in _PROBE_LAMBDAS:
            gap = np.max(np.abs(field(lam * x) - lam**alpha * fx))
            if gap > bound:
                return ProbeVerdict(
                    False, (x, lam),
                    f"scaling gap {gap:.3g} at lambda={lam}",
                )
    return ProbeVerdict(True)


def probe_cooperative(
    field: HomogeneousField, trials: int = 32, seed: int = 0
) -> ProbeVerdict:
    """Check the finite-difference Jacobian is Metzler at random x > 0."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    rng = np.random.default_rng(seed)
    n = field.dimension
    for _ in range(trials):
        x = _sample_positive(rng, n)
        h = 1e-6 * max(1.0, float(np.max(np.abs(x))))
        for j in range(n):
            step = np.zeros(n)
            step[j] = h
            column = (field(x + step) - field(x - step)) / (2.0 * h)
            for i in range(n):
                if i != j and column[i] < -1e-6:
                    return ProbeVerdict(
                        False, (x, (i, j)),
                        f"Jacobian entry ({i},{j})={column[i]:.3g} negative",
                    )
    return ProbeVerdict(True)


def probe_order_preserving(
    field: HomogeneousField, trials: int = 32, seed: int = 0
) -> ProbeVerdict:
    """Check x >= y >= 0 implies g(x) >= g(y) on random pairs."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    rng = np.random.default_rng(seed)
    n = field.dimension
    for _ in range(trials):
        y = _sample_positive(rng, n)
        y[rng.random(n) < 0.25] = 0.0
        x = y + _sample_positive(rng, n) * (rng.random(n) < 0.5)
        if np.min(field(x) - field(y)) < -1e-9:
            return ProbeVerdict(False, (x, y), "order reversed")
    return ProbeVerdict(True)
