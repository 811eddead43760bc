"""System-description documents: JSON ingestion and validation.

A document names one of four system kinds, carries its matrices or
component expressions plus a delay bound, and optionally a candidate
weight vector, a delay profile, an initial history, and simulation
settings.  Field names and shapes are pinned by schema/system.json;
cross-field dimension checks happen here.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import jsonschema
import numpy as np

from .fields import HomogeneousField
from .linalg import MetzlerMatrix, NonnegativeMatrix
from .simulate import DelaySignal, InitialHistory

CONTINUOUS_LINEAR = "continuous-linear"
DISCRETE_LINEAR = "discrete-linear"
CONTINUOUS_HOMOGENEOUS = "continuous-homogeneous"
DISCRETE_HOMOGENEOUS = "discrete-homogeneous"


class DocumentError(ValueError):
    """Invalid document; message carries the JSON location when known."""


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    text = resources.files("posdelay").joinpath(f"schema/{name}").read_text()
    return json.loads(text)


@dataclass(frozen=True, eq=False)
class SystemDocument:
    kind: str
    dimension: int
    A: np.ndarray | None
    B: np.ndarray | None
    f: HomogeneousField
    g: HomogeneousField
    delay_bound: float | int
    v: np.ndarray | None
    delay: DelaySignal | None
    history: InitialHistory | None
    simulation: dict

    @property
    def is_continuous(self) -> bool:
        return self.kind.startswith("continuous")

    @property
    def is_linear(self) -> bool:
        return self.kind.endswith("linear")

    def positive_matrices(self) -> tuple[MetzlerMatrix, NonnegativeMatrix] | None:
        """Typed (A, B) when the linear system is positive, else None.

        Continuous: A Metzler and B nonnegative.  Discrete: both
        nonnegative.
        """
        if not self.is_linear:
            return None
        try:
            a = (MetzlerMatrix(self.A) if self.is_continuous
                 else NonnegativeMatrix(self.A))
            b = NonnegativeMatrix(self.B)
        except ValueError:
            return None
        return a, b


def _square_matrix(raw, name: str) -> np.ndarray:
    m = np.array(raw, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DocumentError(f"{name} must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise DocumentError(f"{name} entries must be finite")
    return m


def _build_delay(block: dict, bound: float, continuous: bool) -> DelaySignal:
    kind = block["kind"]
    if continuous and kind == "sequence":
        raise DocumentError("sequence delays are for discrete systems")
    if not continuous and kind == "table":
        raise DocumentError("table delays are for continuous systems")
    if kind == "constant":
        return DelaySignal.constant(block["value"], bound=bound)
    if kind == "sinusoid":
        return DelaySignal.sinusoid(
            block["offset"], block["amplitude"], block["omega"],
            block.get("phase", 0.0), bound=bound,
        )
    if kind == "table":
        return DelaySignal.table(block["points"], bound=bound)
    return DelaySignal.sequence(
        block["values"], bound=bound, periodic=block.get("periodic", False)
    )


def _build_history(block: dict, dimension: int) -> InitialHistory:
    kind = block["kind"]
    if kind == "constant":
        hist = InitialHistory.constant(block["value"])
    elif kind == "expression":
        hist = InitialHistory.from_expressions(block["components"])
    else:
        hist = InitialHistory.table(block["times"], block["values"])
    if hist.dimension != dimension:
        raise DocumentError(
            f"history has dimension {hist.dimension}, system has {dimension}"
        )
    return hist


def parse_document(data: dict) -> SystemDocument:
    """Validate a decoded JSON object and build the typed document."""
    try:
        jsonschema.validate(data, load_schema("system.json"))
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "(root)"
        raise DocumentError(f"at {path}: {exc.message}") from exc

    kind = data["kind"]
    continuous = kind.startswith("continuous")
    linear = kind.endswith("linear")

    if linear:
        a = _square_matrix(data["A"], "A")
        b = _square_matrix(data["B"], "B")
        if a.shape != b.shape:
            raise DocumentError(f"A is {a.shape}, B is {b.shape}")
        n = a.shape[0]
        try:
            f = HomogeneousField.from_matrix(a)
            g = HomogeneousField.from_matrix(b)
        except ValueError as exc:
            raise DocumentError(str(exc)) from exc
    else:
        a = b = None
        if len(data["f"]) != len(data["g"]):
            raise DocumentError(
                f"f has {len(data['f'])} components, g has {len(data['g'])}"
            )
        n = len(data["f"])
        try:
            f = HomogeneousField.from_strings(data["f"])
            g = HomogeneousField.from_strings(data["g"])
        except ValueError as exc:
            raise DocumentError(str(exc)) from exc

    bound = data["tau_max"] if continuous else data["d_max"]

    v = None
    if "v" in data:
        v = np.array(data["v"], dtype=float)
        if v.size != n:
            raise DocumentError(f"v has {v.size} entries, system has {n}")

    delay = None
    if "delay" in data:
        try:
            delay = _build_delay(data["delay"], bound, continuous)
        except ValueError as exc:
            raise DocumentError(str(exc)) from exc

    history = None
    if "history" in data:
        try:
            history = _build_history(data["history"], n)
        except ValueError as exc:
            raise DocumentError(str(exc)) from exc

    simulation = dict(data.get("simulation", {}))
    if continuous and "k_end" in simulation:
        raise DocumentError("k_end applies to discrete systems; use t_end")
    if not continuous and ("t_end" in simulation or "dt" in simulation):
        raise DocumentError("t_end/dt apply to continuous systems; use k_end")

    return SystemDocument(
        kind=kind, dimension=n, A=a, B=b, f=f, g=g,
        delay_bound=bound, v=v, delay=delay, history=history,
        simulation=simulation,
    )


def load_document(path: str) -> SystemDocument:
    """Read, decode, and validate a system document from a JSON file."""
    with open(path, encoding="utf-8") as handle:
        text = handle.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(
            f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(data, dict):
        raise DocumentError("document must be a JSON object")
    return parse_document(data)
