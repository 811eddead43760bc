"""Command-line front end.

    posdelay check     DOC.json            certify stability
    posdelay rate      DOC.json [--v ...]  guaranteed decay rates
    posdelay optimize  DOC.json            best rate over all weights
    posdelay simulate  DOC.json --out ...  trajectory CSV (+ figure)
    posdelay reproduce exampleN            built-in benchmark table

All commands print JSON to stdout (reproduce prints a table unless
--json).  Exit codes: 0 success, 1 analysis negative, 2 input error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import decay, optimize, reproduce as repro
from .certify import (
    StabilityCertificate,
    synthesize_linear_continuous,
    synthesize_linear_discrete,
    verify_continuous,
    verify_discrete,
    verify_general_continuous,
    verify_general_discrete,
)
from .decay import CertificateRequiredError
from .document import DocumentError, SystemDocument, load_document
from .expr import ExpressionError
from .fields import (
    probe_cooperative,
    probe_homogeneity,
    probe_order_preserving,
)
from .linalg import DEFAULT_TOL, PositiveVector
from .simulate import (
    RATE_SHRINK,
    DelayBoundError,
    DelaySignal,
    InitialHistory,
    check_envelope,
    envelope_values,
    positivity_monitor,
    simulate_continuous,
    simulate_discrete,
    write_trajectory_csv,
)

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_INPUT = 2


class AnalysisNegative(Exception):
    """Valid input whose analysis concludes 'no' (exit code 1)."""


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _emit(payload: dict) -> None:
    json.dump(payload, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _positive_vector(values, what: str) -> PositiveVector:
    try:
        return PositiveVector(np.asarray(values, dtype=float))
    except ValueError as exc:
        raise DocumentError(f"{what}: {exc}") from exc


def _parse_vector_flag(text: str, what: str) -> np.ndarray:
    try:
        return np.array([float(p) for p in text.split(",")], dtype=float)
    except ValueError as exc:
        raise DocumentError(f"{what}: expected comma-separated numbers") from exc


# --- check ---------------------------------------------------------------


def _run_probes(doc: SystemDocument, trials: int, seed: int) -> dict:
    probes = {}
    probes["f_homogeneous_deg1"] = probe_homogeneity(doc.f, 1.0, trials, seed)
    probes["g_homogeneous_deg1"] = probe_homogeneity(doc.g, 1.0, trials,
                                                     seed + 1)
    if doc.is_continuous:
        probes["f_cooperative"] = probe_cooperative(doc.f, trials, seed + 2)
    else:
        probes["f_order_preserving"] = probe_order_preserving(
            doc.f, trials, seed + 2
        )
    probes["g_order_preserving"] = probe_order_preserving(doc.g, trials,
                                                          seed + 3)
    return probes


def _certificate_for(doc: SystemDocument, v: PositiveVector | None,
                     notes: list) -> StabilityCertificate | None:
    """Verify the given v, or synthesize one for linear systems."""
    if v is not None:
        if doc.is_linear and doc.positive_matrices() is None:
            cert = (verify_general_continuous(doc.A, doc.B, v)
                    if doc.is_continuous
                    else verify_general_discrete(doc.A, doc.B, v))
        else:
            cert = (verify_continuous(doc.f, doc.g, v) if doc.is_continuous
                    else verify_discrete(doc.f, doc.g, v))
        if cert is None:
            notes.append("supplied v does not certify the system")
        return cert
    if not doc.is_linear:
        notes.append(
            "no candidate v supplied; synthesis needs a linear system"
        )
        return None
    pair = doc.positive_matrices()
    if pair is not None:
        a, b = pair
        cert = (synthesize_linear_continuous(a, b) if doc.is_continuous
                else synthesize_linear_discrete(a, b))
        if cert is None:
            notes.append(
                "zero-delay system is unstable; no positive weights exist"
            )
        return cert
    # general linear system: certify its dominating positive pair
    from .certify import majorant_continuous, majorant_discrete

    if doc.is_continuous:
        am, babs = majorant_continuous(doc.A, doc.B)
        inner = synthesize_linear_continuous(am, babs)
        rebuild = verify_general_continuous
    else:
        am, babs = majorant_discrete(doc.A, doc.B)
        inner = synthesize_linear_discrete(am, babs)
        rebuild = verify_general_discrete
    notes.append("system is not positive; certified through its majorant")
    if inner is None:
        notes.append("majorant condition infeasible")
        return None
    return rebuild(doc.A, doc.B, inner.v)


def cmd_check(args) -> int:
    doc = load_document(args.document)
    notes: list[str] = []
    probes_payload = None
    if not doc.is_linear:
        if args.assume_classes:
            notes.append("class probes skipped (--assume-classes)")
        else:
            probes = _run_probes(doc, args.trials, args.seed)
            probes_payload = {
                name: {"passed": p.passed, "note": p.note}
                for name, p in probes.items()
            }
            failed = [name for name, p in probes.items() if not p.passed]
            if failed:
                notes.append(f"class probes failed: {', '.join(failed)}")
                _emit({
                    "command": "check", "stable": False, "v": None,
                    "slack": None, "certificate_kind": None,
                    "probes": probes_payload, "notes": notes,
                })
                return EXIT_NEGATIVE
            notes.append(
                "classes probed on random samples, not proven"
            )
    else:
        pair = doc.positive_matrices()
        if pair is not None:
            notes.append(
                "positive system: A "
                + ("Metzler" if doc.is_continuous else "nonnegative")
                + ", B nonnegative"
            )

    v = _positive_vector(doc.v, "v") if doc.v is not None else None
    cert = _certificate_for(doc, v, notes)
    stable = cert is not None
    notes.extend(cert.assumptions if cert else ())
    _emit({
        "command": "check",
        "stable": stable,
        "v": cert.v.entries.tolist() if cert else None,
        "slack": cert.slack.tolist() if cert else None,
        "certificate_kind": cert.kind if cert else None,
        "probes": probes_payload,
        "notes": notes,
    })
    return EXIT_OK if stable else EXIT_NEGATIVE


# --- rate ----------------------------------------------------------------


def _resolve_rate_inputs(doc, args, notes) -> tuple[PositiveVector, float | int]:
    bound = doc.delay_bound
    if doc.is_continuous and args.tau_max is not None:
        bound = args.tau_max
    if not doc.is_continuous and args.d_max is not None:
        bound = args.d_max
    if args.v is not None:
        v = _positive_vector(_parse_vector_flag(args.v, "--v"), "--v")
    elif doc.v is not None:
        v = _positive_vector(doc.v, "v")
    else:
        if not doc.is_linear:
            raise AnalysisNegative(
                "rate needs a candidate v for nonlinear systems"
            )
        cert = _certificate_for(doc, None, notes)
        if cert is None:
            raise AnalysisNegative("system is not certifiable; no rate exists")
        v = cert.v
        notes.append("v synthesized from the all-ones solve")
    return v, bound


def cmd_rate(args) -> int:
    doc = load_document(args.document)
    notes: list[str] = []
    v, bound = _resolve_rate_inputs(doc, args, notes)
    positive = (not doc.is_linear) or doc.positive_matrices() is not None
    try:
        if doc.is_continuous:
            result = (
                decay.eta_components(doc.f, doc.g, v, bound, args.tol)
                if positive else
                decay.eta_components_general(doc.A, doc.B, v, bound, args.tol)
            )
        else:
            result = (
                decay.gamma_components(doc.f, doc.g, v, int(bound), args.tol)
                if positive else
                decay.gamma_components_general(doc.A, doc.B, v, int(bound),
                                               args.tol)
            )
    except CertificateRequiredError as exc:
        raise AnalysisNegative(str(exc)) from exc
    if not positive:
        notes.append("general linear system; rates from the majorant")
    if result.excluded:
        notes.append(
            "components decaying faster than any finite rate: "
            + ", ".join(str(i + 1) for i in result.excluded)
        )
    _emit({
        "command": "rate",
        "kind": result.kind,
        "per_component": result.per_component.tolist(),
        "aggregate": result.aggregate,
        "delay_bound": float(result.delay_bound),
        "v": v.entries.tolist(),
        "excluded_components": list(result.excluded),
        "envelope": (result.envelope_expression()
                     if doc.is_continuous else None),
        "notes": notes,
    })
    return EXIT_OK


# --- optimize ------------------------------------------------------------


def cmd_optimize(args) -> int:
    doc = load_document(args.document)
    if not doc.is_linear:
        raise AnalysisNegative("optimization requires linear kind")
    notes: list[str] = []
    pair = doc.positive_matrices()
    if pair is not None:
        a, b = pair
        best = (optimize.optimize_eta(a, b, doc.delay_bound, args.tol)
                if doc.is_continuous
                else optimize.optimize_gamma(a, b, doc.delay_bound, args.tol))
    else:
        notes.append("general linear system; optimum over the majorant")
        best = (
            optimize.optimize_general(doc.A, doc.B, tau_max=doc.delay_bound,
                                      tol=args.tol)
            if doc.is_continuous else
            optimize.optimize_general(doc.A, doc.B, d_max=doc.delay_bound,
                                      tol=args.tol)
        )
    kind = "continuous" if doc.is_continuous else "discrete"
    if best is None:
        _emit({
            "command": "optimize", "feasible": False, "kind": kind,
            "rate": None, "v_star": None,
            "notes": notes + ["zero-delay stability condition infeasible"],
        })
        return EXIT_NEGATIVE
    notes.extend(best.warnings)
    _emit({
        "command": "optimize",
        "feasible": True,
        "kind": kind,
        "rate": best.rate,
        "v_star": best.v_star.entries.tolist(),
        "iterations": best.iterations,
        "residual": best.residual,
        "degenerate": best.degenerate,
        "notes": notes,
    })
    return EXIT_OK


# --- simulate ------------------------------------------------------------


def _resolve_simulation(doc, args):
    delay = doc.delay
    if delay is None:
        delay = DelaySignal.constant(doc.delay_bound)
    history = doc.history
    if history is None:
        history = InitialHistory.constant(np.ones(doc.dimension))
    if doc.is_continuous:
        t_end = args.t_end or doc.simulation.get("t_end")
        if t_end is None:
            raise DocumentError("simulate needs --t-end or a simulation block")
        dt = args.dt or doc.simulation.get("dt")
        return delay, history, float(t_end), dt
    k_end = args.k_end or doc.simulation.get("k_end")
    if k_end is None:
        raise DocumentError("simulate needs --k-end or a simulation block")
    return delay, history, int(k_end), None


def cmd_simulate(args) -> int:
    doc = load_document(args.document)
    notes: list[str] = []
    delay, history, horizon, dt = _resolve_simulation(doc, args)

    envelope_rate = None
    v = None
    if args.envelope is not None:
        parts = _parse_vector_flag(args.envelope, "--envelope")
        if parts.size != doc.dimension + 1:
            raise DocumentError(
                "--envelope takes rate,v1,...,vn matching the dimension"
            )
        envelope_rate = float(parts[0])
        v = _positive_vector(parts[1:], "--envelope weights")
    elif doc.v is not None:
        v = _positive_vector(doc.v, "v")

    try:
        if doc.is_continuous:
            traj = simulate_continuous(doc.f, doc.g, delay, history, horizon,
                                       h=dt, v=v)
        else:
            traj = simulate_discrete(doc.f, doc.g, delay, history, horizon,
                                     v=v)
    except DelayBoundError as exc:
        raise DocumentError(str(exc)) from exc

    env_payload = None
    env_column = None
    exit_code = EXIT_OK
    if envelope_rate is not None:
        effective = (envelope_rate * RATE_SHRINK if doc.is_continuous
                     else envelope_rate)
        phi_norm = history.weighted_norm(v, delay.bound,
                                         traj.metadata.get("step"))
        report = check_envelope(traj, v, effective, phi_norm)
        env_column = envelope_values(traj, effective, phi_norm)
        env_payload = {
            "rate": effective,
            "history_norm": phi_norm,
            "passed": report.passed,
            "max_ratio": report.max_ratio,
            "first_violation": report.first_violation,
            "tol": report.tol,
        }
        if not report.passed:
            notes.append(
                f"envelope violated from t={_fmt(report.first_violation)}"
            )
            exit_code = EXIT_NEGATIVE

    positivity = positivity_monitor(traj)
    if "diverged_at" in traj.metadata:
        notes.append(
            f"trajectory diverged at t={_fmt(traj.metadata['diverged_at'])};"
            " output truncated"
        )

    write_trajectory_csv(traj, args.out, envelope=env_column)

    plot_path = None
    if args.plot:
        from . import plots

        if v is not None and envelope_rate is not None:
            plot_path = plots.render_decay_figure(
                traj, env_payload["rate"], env_payload["history_norm"],
                args.plot,
            )
        else:
            plot_path = plots.render_states_figure(traj, args.plot)

    _emit({
        "command": "simulate",
        "kind": "continuous" if doc.is_continuous else "discrete",
        "samples": int(traj.times.size),
        "t_end": float(traj.times[-1]),
        "step": float(traj.metadata["step"]),
        "csv": args.out,
        "plot": plot_path,
        "diverged_at": traj.metadata.get("diverged_at"),
        "positivity": {
            "passed": positivity.passed,
            "min_entry": positivity.min_entry,
            "threshold": positivity.threshold,
        },
        "envelope": env_payload,
        "notes": notes,
    })
    return exit_code


# --- reproduce -----------------------------------------------------------


def cmd_reproduce(args) -> int:
    report = repro.reproduce(args.example)
    if args.json:
        _emit({
            "command": "reproduce",
            "example": report.example,
            "passed": report.passed,
            "rows": [
                {
                    "quantity": row.quantity,
                    "reference": row.reference,
                    "computed": row.computed,
                    "delta": row.delta,
                    "tolerance": row.tolerance,
                    "pass": row.passed,
                }
                for row in report.rows
            ],
        })
    else:
        header = f"{'quantity':<16}{'reference':>12}{'computed':>12}" \
                 f"{'|delta|':>12}  pass"
        print(header)
        print("-" * len(header))
        for row in report.rows:
            print(
                f"{row.quantity:<16}{_fmt(row.reference):>12}"
                f"{_fmt(row.computed):>12}{_fmt(row.delta):>12}"
                f"  {'yes' if row.passed else 'NO'}"
            )
    if args.plot:
        _plot_reproduction(args.example, args.plot)
    return EXIT_OK if report.passed else EXIT_NEGATIVE


def _plot_reproduction(name: str, out_path: str) -> None:
    """Simulate the example under its published delay and render the
    norm-versus-envelope figure."""
    from . import plots

    doc = repro.builtin_document(name)
    if doc.v is not None:
        v = _positive_vector(doc.v, "v")
        rates = decay.eta_components(doc.f, doc.g, v, doc.delay_bound)
        rate = rates.aggregate * RATE_SHRINK
    else:
        pair = doc.positive_matrices()
        best = (optimize.optimize_eta(*pair, doc.delay_bound)
                if doc.is_continuous
                else optimize.optimize_gamma(*pair, doc.delay_bound))
        v = best.v_star
        rate = best.rate * RATE_SHRINK if doc.is_continuous else best.rate
    if doc.is_continuous:
        traj = simulate_continuous(
            doc.f, doc.g, doc.delay, doc.history,
            doc.simulation["t_end"], h=doc.simulation.get("dt"), v=v,
        )
    else:
        traj = simulate_discrete(doc.f, doc.g, doc.delay, doc.history,
                                 doc.simulation["k_end"], v=v)
    phi_norm = doc.history.weighted_norm(v, doc.delay.bound)
    plots.render_decay_figure(traj, rate, phi_norm, out_path, title=name)


# --- entry point ----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="posdelay",
        description="Stability certificates, guaranteed decay rates, and"
                    " trajectory validation for positive time-delay systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--tol", type=float, default=DEFAULT_TOL,
                       help="solver tolerance (default 1e-9)")
        p.add_argument("--seed", type=int, default=0,
                       help="seed for randomized class probes")

    p = sub.add_parser("check", help="certify delay-independent stability")
    p.add_argument("document", help="system document (JSON)")
    p.add_argument("--assume-classes", action="store_true",
                   help="skip the randomized class probes")
    p.add_argument("--trials", type=int, default=32,
                   help="samples per class probe")
    common(p)
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("rate", help="guaranteed decay rates for a weight vector")
    p.add_argument("document")
    p.add_argument("--v", help="comma-separated positive weights")
    p.add_argument("--tau-max", type=float, dest="tau_max",
                   help="override the continuous delay bound")
    p.add_argument("--d-max", type=int, dest="d_max",
                   help="override the discrete delay bound")
    common(p)
    p.set_defaults(fn=cmd_rate)

    p = sub.add_parser("optimize",
                       help="best guaranteed rate over all weight vectors")
    p.add_argument("document")
    common(p)
    p.set_defaults(fn=cmd_optimize)

    p = sub.add_parser("simulate", help="integrate and validate a trajectory")
    p.add_argument("document")
    p.add_argument("--out", required=True, help="trajectory CSV path")
    p.add_argument("--t-end", type=float, dest="t_end")
    p.add_argument("--k-end", type=int, dest="k_end")
    p.add_argument("--dt", type=float, help="integration step")
    p.add_argument("--envelope",
                   help="rate,v1,...,vn : check the certified envelope")
    p.add_argument("--plot", help="render a decay figure to this file")
    common(p)
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("reproduce", help="recompute built-in benchmark values")
    p.add_argument("example", choices=list(repro.EXAMPLE_NAMES))
    p.add_argument("--json", action="store_true",
                   help="machine-readable output")
    p.add_argument("--plot", help="render the decay comparison to this file")
    common(p)
    p.set_defaults(fn=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except AnalysisNegative as exc:
        print(f"posdelay: {exc}", file=sys.stderr)
        return EXIT_NEGATIVE
    except (DocumentError, ExpressionError, OSError) as exc:
        print(f"posdelay: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
