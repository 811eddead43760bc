"""Figure rendering for the report paths.

Decay plots show the weighted norm of a simulated trajectory against its
certified exponential envelope on a log scale.  Figures are drawn through
matplotlib's object API so no interactive backend is touched.
"""

from __future__ import annotations

from .simulate import Trajectory, envelope_values


def render_decay_figure(
    traj: Trajectory,
    rate: float,
    phi_norm: float,
    out_path: str,
    title: str | None = None,
) -> str:
    """Write the norm-versus-envelope comparison to out_path.

    The trajectory must carry its weighted-norm track.  Returns out_path.
    """
    if traj.norm_track is None:
        raise ValueError("trajectory has no weighted-norm track; supply v")
    from matplotlib.figure import Figure

    env = envelope_values(traj, rate, phi_norm)
    fig = Figure(figsize=(6.4, 4.2))
    ax = fig.subplots()
    time_label = "step k" if traj.discrete else "time t"
    if traj.discrete:
        ax.semilogy(traj.times, traj.norm_track, ".", ms=3,
                    label="weighted norm of x")
    else:
        ax.semilogy(traj.times, traj.norm_track, label="weighted norm of x")
    ax.semilogy(traj.times, env, "--", label="certified envelope")
    ax.set_xlabel(time_label)
    ax.set_ylabel("weighted inf-norm")
    if title:
        ax.set_title(title)
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    return out_path


def render_states_figure(traj: Trajectory, out_path: str,
                         title: str | None = None) -> str:
    """Write the component trajectories to out_path."""
    from matplotlib.figure import Figure

    fig = Figure(figsize=(6.4, 4.2))
    ax = fig.subplots()
    style = "." if traj.discrete else "-"
    for i in range(traj.dimension):
        ax.plot(traj.times, traj.states[:, i], style, label=f"x{i + 1}")
    ax.set_xlabel("step k" if traj.discrete else "time t")
    ax.set_ylabel("state")
    if title:
        ax.set_title(title)
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    return out_path
