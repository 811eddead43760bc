"""Trajectory generation under bounded time-varying delays, plus envelope
and positivity checks.

Continuous systems integrate with fixed-step classical Runge-Kutta; the
delayed state comes from cubic Hermite interpolation of the stored grid
(the initial history serves arguments below zero).  Fixed step keeps the
history lookup O(1).  Derivative kinks propagating from t = 0 are not
tracked; the envelope tolerance absorbs the local degradation near them.
Discrete systems run the exact recursion.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .expr import parse_expression, compile_expr
from .fields import HomogeneousField
from .linalg import DimensionMismatchError, PositiveVector, weighted_inf_norm

DEFAULT_ENVELOPE_TOL_CONTINUOUS = 1e-3  # absorbs discretization error
DEFAULT_ENVELOPE_TOL_DISCRETE = 1e-9    # recursion is exact

# Guaranteed rates are open bounds in continuous time: decay holds for
# every rate strictly below the reported aggregate.  Envelope consumers
# shrink by this factor to restore the open-interval semantics.
RATE_SHRINK = 1.0 - 1e-6


class DelayBoundError(ValueError):
    """Delay signal left [0, declared bound], or is fractional when an
    integer delay is required."""


class DelaySignal:
    """Bounded delay profile tau(t) (or d(k)) with a declared bound.

    Every evaluation checks 0 <= value <= bound.  Continuous kinds are
    continuous by construction (constants, sinusoids, linearly
    interpolated tables).
    """

    def __init__(self, fn, bound: float, description: str):
        if bound < 0:
            raise ValueError("delay bound must be nonnegative")
        self._fn = fn
        self.bound = float(bound)
        self.description = description

    @classmethod
    def constant(cls, value: float, bound: float | None = None) -> "DelaySignal":
        bound = value if bound is None else bound
        return cls(lambda t: value, bound, f"constant {value!r}")

    @classmethod
    def sinusoid(
        cls,
        offset: float,
        amplitude: float,
        omega: float,
        phase: float = 0.0,
        bound: float | None = None,
    ) -> "DelaySignal":
        bound = offset + abs(amplitude) if bound is None else bound

        def fn(t):
            return offset + amplitude * math.sin(omega * t + phase)

        return cls(
            fn, bound,
            f"{offset!r} + {amplitude!r}*sin({omega!r}*t + {phase!r})",
        )

    @classmethod
    def table(cls, points, bound: float | None = None) -> "DelaySignal":
        pts = np.array(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 1:
            raise ValueError("table must be a nonempty list of (t, tau) pairs")
        times, values = pts[:, 0], pts[:, 1]
        if np.any(np.diff(times) <= 0):
            raise ValueError("table times must be strictly increasing")
        bound = float(np.max(values)) if bound is None else bound
        # np.interp clamps outside the table, keeping the signal continuous
        return cls(
            lambda t: float(np.interp(t, times, values)),
            bound,
            f"table[{pts.shape[0]} points]",
        )

    @classmethod
    def sequence(
        cls, values, bound: float | None = None, periodic: bool = False
    ) -> "DelaySignal":
        vals = [float(v) for v in values]
        if not vals:
            raise ValueError("sequence must be nonempty")
        bound = max(vals) if bound is None else bound

        def fn(k):
            i = int(k)
            if periodic:
                i %= len(vals)
            elif not 0 <= i < len(vals):
                raise DelayBoundError(
                    f"delay sequence has no value at step {i}"
                )
            return vals[i]

        word = "periodic sequence" if periodic else "sequence"
        return cls(fn, bound, f"{word}[{len(vals)} values]")

    def __call__(self, t: float) -> float:
        value = self._fn(t)
        if not 0.0 <= value <= self.bound:
            raise DelayBoundError(
                f"delay {value!r} at t={t!r} outside [0, {self.bound!r}]"
            )
        return value

    def integer_value(self, k: int) -> int:
        """Delay at step k, validated to be an integer within 1e-9.

        Genuinely fractional values are an error; rounding a discrete
        delay would silently change the system.
        """
        value = self(k)
        nearest = round(value)
        if abs(value - nearest) > 1e-9:
            raise DelayBoundError(
                f"discrete delay {value!r} at step {k} is not an integer"
            )
        return int(nearest)


class InitialHistory:
    """State on [-bound, 0] (continuous) or {-bound, ..., 0} (discrete)."""

    def __init__(self, fn, dimension: int, description: str, constant=None):
        self._fn = fn
        self.dimension = dimension
        self.description = description
        self._constant = constant

    @classmethod
    def constant(cls, value) -> "InitialHistory":
        vec = np.array(value, dtype=float)
        if vec.ndim != 1 or vec.size < 1:
            raise ValueError("constant history must be a nonempty vector")
        vec.flags.writeable = False
        return cls(
            lambda t: vec, vec.size, f"constant {vec.tolist()}", constant=vec
        )

    @classmethod
    def from_expressions(cls, sources: list[str]) -> "InitialHistory":
        # per-component expressions in the single variable t
        compiled = [
            compile_expr(parse_expression(s, 1, aliases={"t": 1}))
            for s in sources
        ]

        def fn(t):
            arg = (t,)
            return np.array([c(arg) for c in compiled])

        return cls(fn, len(sources), f"expressions {sources}")

    @classmethod
    def table(cls, times, values) -> "InitialHistory":
        ts = np.array(times, dtype=float)
        vals = np.array(values, dtype=float)
        if ts.ndim != 1 or vals.ndim != 2 or vals.shape[0] != ts.size:
            raise ValueError("need times (k,) and values (k, n)")
        if np.any(np.diff(ts) <= 0):
            raise ValueError("history times must be strictly increasing")

        def fn(t):
            return np.array(
                [np.interp(t, ts, vals[:, j]) for j in range(vals.shape[1])]
            )

        return cls(fn, vals.shape[1], f"table[{ts.size} samples]")

    def __call__(self, t: float) -> np.ndarray:
        out = np.asarray(self._fn(t), dtype=float)
        if out.shape != (self.dimension,):
            raise DimensionMismatchError(
                f"history returned shape {out.shape}, expected ({self.dimension},)"
            )
        return out

    def weighted_norm(
        self, v: PositiveVector, bound: float, resolution: float | None = None
    ) -> float:
        """sup over the history interval of the weighted norm.

        Sampled at the given resolution; exact for constant histories.
        """
        if self._constant is not None:
            return weighted_inf_norm(self._constant, v)
        if bound == 0:
            return weighted_inf_norm(self(0.0), v)
        if resolution is None:
            resolution = bound / 1000.0
        samples = np.linspace(-bound, 0.0, max(2, int(round(bound / resolution)) + 1))
        return max(weighted_inf_norm(self(t), v) for t in samples)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled state history.

    times are strictly increasing (integers for discrete systems); states
    are finite (a diverging run is truncated before the first non-finite
    sample, with metadata["diverged_at"] set).
    """

    times: np.ndarray
    states: np.ndarray
    discrete: bool
    norm_track: np.ndarray | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        x = np.asarray(self.states, dtype=float)
        if t.ndim != 1 or x.ndim != 2 or x.shape[0] != t.size:
            raise ValueError("need times (k,) and states (k, n)")
        if np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")
        if not np.all(np.isfinite(x)):
            raise ValueError("states must be finite")
        t.flags.writeable = False
        x.flags.writeable = False
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "states", x)

    @property
    def dimension(self) -> int:
        return self.states.shape[1]

    def with_norms(self, v: PositiveVector) -> "Trajectory":
        norms = np.array([weighted_inf_norm(x, v) for x in self.states])
        return Trajectory(self.times, self.states, self.discrete, norms,
                          dict(self.metadata))


def _system_hash(f: HomogeneousField, g: HomogeneousField,
                 delay: DelaySignal) -> str:
    text = "|".join((f.describe(), g.describe(), delay.description,
                     repr(delay.bound)))
    return hashlib.sha256(text.encode()).hexdigest()[:12]


def _hermite(t, t0, t1, y0, y1, d0, d1):
    w = t1 - t0
    s = (t - t0) / w
    s2, s3 = s * s, s * s * s
    return ((2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * w * d0
            + (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * w * d1)


def simulate_continuous(
    f: HomogeneousField,
    g: HomogeneousField,
    delay: DelaySignal,
    history: InitialHistory,
    t_end: float,
    h: float | None = None,
    v: PositiveVector | None = None,
) -> Trajectory:
    """Integrate dx/dt = f(x(t)) + g(x(t - tau(t))) from the given history.

    Classical 4-stage Runge-Kutta with fixed step h (default
    min(1e-2, bound/100)); the dense grid with node derivatives is kept
    for the whole run so delayed arguments interpolate in O(1).
    """
    n = f.dimension
    if g.dimension != n or history.dimension != n:
        raise DimensionMismatchError("f, g, and history dimensions differ")
    if t_end <= 0:
        raise ValueError("t_end must be positive")
    if h is None:
        h = 1e-2 if delay.bound == 0 else min(1e-2, delay.bound / 100.0)
    if h <= 0:
        raise ValueError("step size must be positive")

    steps = int(math.ceil(t_end / h - 1e-12))
    times = np.minimum(np.arange(steps + 1) * h, t_end)
    states = np.empty((steps + 1, n))
    derivs = np.empty((steps + 1, n))
    states[0] = history(0.0)
    completed = 0  # index of the last filled grid node

    def lookup(td: float, t_stage: float, y_stage: np.ndarray) -> np.ndarray:
        if td <= 0.0:
            return history(td)
        t_done = times[completed]
        if td <= t_done:
            j = int(np.searchsorted(times[: completed + 1], td, side="right")) - 1
            j = min(j, completed - 1)
            return _hermite(td, times[j], times[j + 1], states[j],
                            states[j + 1], derivs[j], derivs[j + 1])
        if td >= t_stage - 1e-12 * max(1.0, t_stage):
            return y_stage
        # delayed argument inside the current (incomplete) step: linear
        # extrapolation from the last node; only reachable when tau < h
        return states[completed] + derivs[completed] * (td - t_done)

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        td = t - delay(t)
        return f(y) + g(lookup(td, t, y))

    derivs[0] = rhs(0.0, states[0])
    diverged_at = None
    for k in range(steps):
        t0, t1 = times[k], times[k + 1]
        dt = t1 - t0
        y = states[k]
        k1 = derivs[k]
        k2 = rhs(t0 + dt / 2.0, y + dt / 2.0 * k1)
        k3 = rhs(t0 + dt / 2.0, y + dt / 2.0 * k2)
        k4 = rhs(t1, y + dt * k3)
        y_next = y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y_next)):
            diverged_at = float(t1)
            break
        states[k + 1] = y_next
        completed = k + 1
        derivs[k + 1] = rhs(t1, y_next)

    last = completed + 1
    meta = {
        "step": float(h),
        "delay": delay.description,
        "system": _system_hash(f, g, delay),
        "t_end": float(times[completed]),
    }
    if diverged_at is not None:
        meta["diverged_at"] = diverged_at
    traj = Trajectory(times[:last], states[:last], discrete=False,
                      metadata=meta)
    return traj.with_norms(v) if v is not None else traj


def simulate_discrete(
    f: HomogeneousField,
    g: HomogeneousField,
    delay: DelaySignal,
    history: InitialHistory,
    k_end: int,
    v: PositiveVector | None = None,
) -> Trajectory:
    """Run x(k+1) = f(x(k)) + g(x(k - d(k))) exactly for k_end steps."""
    n = f.dimension
    if g.dimension != n or history.dimension != n:
        raise DimensionMismatchError("f, g, and history dimensions differ")
    if k_end < 1:
        raise ValueError("k_end must be at least 1")
    d_max = int(delay.bound)
    if delay.bound != d_max:
        raise DelayBoundError("discrete delay bound must be an integer")

    buf = np.empty((d_max + 1 + k_end, n))
    for k in range(-d_max, 1):
        buf[k + d_max] = history(float(k))
    diverged_at = None
    for k in range(k_end):
        d = delay.integer_value(k)
        if d > d_max:
            raise DelayBoundError(f"delay {d} exceeds declared bound {d_max}")
        x_now = buf[k + d_max]
        x_del = buf[k - d + d_max]
        x_next = f(x_now) + g(x_del)
        if not np.all(np.isfinite(x_next)):
            diverged_at = k + 1
            break
        buf[k + 1 + d_max] = x_next

    stop = k_end if diverged_at is None else diverged_at - 1
    meta = {
        "step": 1,
        "delay": delay.description,
        "system": _system_hash(f, g, delay),
        "k_end": int(stop),
    }
    if diverged_at is not None:
        meta["diverged_at"] = diverged_at
    traj = Trajectory(
        np.arange(stop + 1, dtype=float),
        buf[d_max : d_max + stop + 1].copy(),
        discrete=True,
        metadata=meta,
    )
    return traj.with_norms(v) if v is not None else traj


@dataclass(frozen=True)
class EnvelopeReport:
    passed: bool
    max_ratio: float
    first_violation: float | None
    tol: float


def envelope_values(traj: Trajectory, rate: float, phi_norm: float) -> np.ndarray:
    """Certified bound sampled on the trajectory grid."""
    if traj.discrete:
        return phi_norm * rate ** traj.times
    return phi_norm * np.exp(-rate * traj.times)


def check_envelope(
    traj: Trajectory,
    v: PositiveVector,
    rate: float,
    phi_norm: float,
    tol: float | None = None,
) -> EnvelopeReport:
    """Compare the weighted norm of a trajectory against its envelope.

    rate is e-folding (continuous) or the per-step factor (discrete);
    continuous callers pass the reported aggregate already shrunk by
    RATE_SHRINK.  phi_norm is the sup of the weighted norm over the
    initial history.
    """
    if tol is None:
        tol = (DEFAULT_ENVELOPE_TOL_DISCRETE if traj.discrete
               else DEFAULT_ENVELOPE_TOL_CONTINUOUS)
    norms = traj.norm_track
    if norms is None:
        norms = np.array([weighted_inf_norm(x, v) for x in traj.states])
    if phi_norm == 0.0:
        max_ratio = 0.0 if not np.any(norms) else math.inf
        first = None if max_ratio == 0.0 else float(traj.times[np.argmax(norms > 0)])
        return EnvelopeReport(max_ratio <= 1.0 + tol, max_ratio, first, tol)
    env = envelope_values(traj, rate, phi_norm)
    ratios = norms / env
    max_ratio = float(np.max(ratios))
    violations = np.nonzero(ratios > 1.0 + tol)[0]
    first = float(traj.times[violations[0]]) if violations.size else None
    return EnvelopeReport(first is None, max_ratio, first, tol)


@dataclass(frozen=True)
class PositivityReport:
    passed: bool
    min_entry: float
    threshold: float


def positivity_monitor(traj: Trajectory) -> PositivityReport:
    """Numerical positivity: entries may only dip below zero by round-off
    relative to the trajectory's magnitude."""
    peak = float(np.max(np.abs(traj.states))) if traj.states.size else 0.0
    threshold = -1e-9 * peak
    min_entry = float(np.min(traj.states))
    return PositivityReport(min_entry >= threshold, min_entry, threshold)


def write_trajectory_csv(traj: Trajectory, target, envelope=None) -> None:
    """CSV with header t,x1,...,xn,norm_v,envelope.

    norm_v appears when the trajectory carries its weighted-norm track;
    the envelope column only when envelope values are supplied.
    """
    own = isinstance(target, (str, bytes))
    out = open(target, "w", newline="") if own else target
    try:
        columns = ["t"] + [f"x{i + 1}" for i in range(traj.dimension)]
        if traj.norm_track is not None:
            columns.append("norm_v")
        if envelope is not None:
            envelope = np.asarray(envelope, dtype=float)
            columns.append("envelope")
        out.write(",".join(columns) + "\n")
        for j in range(traj.times.size):
            t = traj.times[j]
            row = [repr(int(t)) if traj.discrete else repr(float(t))]
            row += [repr(float(x)) for x in traj.states[j]]
            if traj.norm_track is not None:
                row.append(repr(float(traj.norm_track[j])))
            if envelope is not None:
                row.append(repr(float(envelope[j])))
            out.write(",".join(row) + "\n")
    finally:
        if own:
            out.close()
