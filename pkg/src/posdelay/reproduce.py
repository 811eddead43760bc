"""Built-in benchmark systems with published reference values.

Three systems ship as compiled-in constants so `posdelay reproduce` needs
no external files: a continuous nonlinear positive system, a continuous
linear positive system, and a discrete linear positive system.  Each
reproduction row compares a computed quantity against its reference at
the tolerance the acceptance suite pins.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import decay, optimize
from .document import SystemDocument, parse_document
from .linalg import MetzlerMatrix, PositiveVector, perron_vector, spectral_abscissa

EXAMPLE1 = "example1"
EXAMPLE2 = "example2"
EXAMPLE3 = "example3"

_DOCUMENTS = {
    EXAMPLE1: {
        "kind": "continuous-homogeneous",
        "f": [
            "-3*x1 + 6*x2 - 3*sqrt(x1^2 + x2^2)",
            "2*x1 - 2*x2 - sqrt(x1^2 + x2^2)",
        ],
        "g": [
            "x1*x2/sqrt(x1^2 + x2^2)",
            "x1*x2/sqrt(2*x1^2 + 3*x2^2)",
        ],
        "tau_max": 6.0,
        "v": [1.0, 1.0],
        "delay": {"kind": "sinusoid", "offset": 5.0, "amplitude": 1.0,
                  "omega": 1.0},
        "history": {"kind": "constant", "value": [1.0, 1.0]},
        "simulation": {"t_end": 60.0, "dt": 0.01},
    },
    EXAMPLE2: {
        "kind": "continuous-linear",
        "A": [[-6.0, 2.0], [1.0, -3.0]],
        "B": [[3.0, 0.0], [0.0, 0.5]],
        "tau_max": 6.0,
        "delay": {"kind": "sinusoid", "offset": 5.0, "amplitude": 1.0,
                  "omega": 1.0},
        "history": {"kind": "constant", "value": [0.7645, 0.6446]},
        "simulation": {"t_end": 60.0, "dt": 0.01},
    },
    EXAMPLE3: {
        "kind": "discrete-linear",
        "A": [[0.4, 0.1], [0.2, 0.6]],
        "B": [[0.3, 0.0], [0.0, 0.1]],
        "d_max": 5,
        "delay": {"kind": "sinusoid", "offset": 4.0, "amplitude": 1.0,
                  "omega": 1.5707963267948966},
        "history": {"kind": "constant", "value": [0.6884, 0.7254]},
        "simulation": {"k_end": 200},
    },
}

EXAMPLE_NAMES = tuple(_DOCUMENTS)

# reference tolerances pinned by the acceptance criteria
TOL_RATE = 1e-3
TOL_WEIGHTS = 1e-2


def builtin_document(name: str) -> SystemDocument:
    if name not in _DOCUMENTS:
        raise KeyError(f"unknown example {name!r}; choose from {EXAMPLE_NAMES}")
    return parse_document(_DOCUMENTS[name])


@dataclass(frozen=True)
class ReproRow:
    quantity: str
    reference: float
    computed: float
    tolerance: float

    @property
    def delta(self) -> float:
        return abs(self.computed - self.reference)

    @property
    def passed(self) -> bool:
        return self.delta <= self.tolerance


@dataclass(frozen=True)
class ReproReport:
    example: str
    rows: tuple[ReproRow, ...]

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows)


def _rows_example1() -> list[ReproRow]:
    doc = builtin_document(EXAMPLE1)
    rates = decay.eta_components(
        doc.f, doc.g, PositiveVector(doc.v), doc.delay_bound
    )
    return [
        ReproRow("eta_1", 0.0825, float(rates.per_component[0]), TOL_RATE),
        ReproRow("eta_2", 0.1705, float(rates.per_component[1]), TOL_RATE),
    ]


def _rows_example2() -> list[ReproRow]:
    doc = builtin_document(EXAMPLE2)
    a, b = doc.positive_matrices()
    m = MetzlerMatrix(a.entries + b.entries)
    abscissa = spectral_abscissa(m)
    v1 = perron_vector(m)
    rates = decay.eta_components_general(
        a.entries, b.entries, v1, doc.delay_bound
    )
    best = optimize.optimize_eta(a, b, doc.delay_bound)
    return [
        ReproRow("abscissa(A+B)", -1.3139, abscissa, TOL_RATE),
        ReproRow("v1_1", 0.7645, float(v1.entries[0]), TOL_RATE),
        ReproRow("v1_2", 0.6446, float(v1.entries[1]), TOL_RATE),
        ReproRow("eta_1", 0.0583, float(rates.per_component[0]), TOL_RATE),
        ReproRow("eta_2", 0.1957, float(rates.per_component[1]), TOL_RATE),
        ReproRow("eta_star", 0.0838, best.rate, TOL_RATE),
        ReproRow("v_star_1", 0.9020, float(best.v_star.entries[0]), TOL_WEIGHTS),
        ReproRow("v_star_2", 0.4317, float(best.v_star.entries[1]), TOL_WEIGHTS),
    ]


def _rows_example3() -> list[ReproRow]:
    doc = builtin_document(EXAMPLE3)
    a, b = doc.positive_matrices()
    best = optimize.optimize_gamma(a, b, doc.delay_bound)
    return [
        ReproRow("gamma_star", 0.9320, best.rate, TOL_RATE),
        ReproRow("v_star_1", 0.6884, float(best.v_star.entries[0]), TOL_WEIGHTS),
        ReproRow("v_star_2", 0.7254, float(best.v_star.entries[1]), TOL_WEIGHTS),
    ]


def reproduce(name: str) -> ReproReport:
    rows = {
        EXAMPLE1: _rows_example1,
        EXAMPLE2: _rows_example2,
        EXAMPLE3: _rows_example3,
    }[name]()
    return ReproReport(name, tuple(rows))
