"""Trajectory serialization: CSV data and a gnuplot figure script."""

import os

from .sim import Trajectory

FLOAT_FMT = "%.12e"


def csv_header(n_nodes: int) -> str:
    cols = ["t"]
    for k in range(1, n_nodes + 1):
        cols += [
            f"v_alpha_{k}",
            f"v_beta_{k}",
            f"mag_{k}",
            f"freq_hz_{k}",
            f"p_{k}",
            f"q_{k}",
        ]
    cols += ["V", "dist_S"]
    cols += [f"W_{k}" for k in range(1, n_nodes + 1)]
    return ",".join(cols)


def trajectory_csv(traj: Trajectory) -> str:
    """Render a trajectory as RFC-4180 CSV with LF line endings."""
    n = traj.mags.shape[1]
    lines = [csv_header(n)]
    for i in range(len(traj.times)):
        row = [FLOAT_FMT % traj.times[i]]
        for k in range(n):
            row += [
                FLOAT_FMT % traj.states[i, 2 * k],
                FLOAT_FMT % traj.states[i, 2 * k + 1],
                FLOAT_FMT % traj.mags[i, k],
                FLOAT_FMT % traj.freq_hz[i, k],
                FLOAT_FMT % traj.p[i, k],
                FLOAT_FMT % traj.q[i, k],
            ]
        row += [FLOAT_FMT % traj.V[i], FLOAT_FMT % traj.dist_S[i]]
        row += [FLOAT_FMT % traj.W[i, k] for k in range(n)]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def fig5_script(n_nodes: int, csv_name: str = "trajectory.csv") -> str:
    """Gnuplot script with the four panels: frequency, magnitudes, p, q."""

    def series(offset, title):
        plots = []
        for k in range(1, n_nodes + 1):
            col = 1 + 6 * (k - 1) + offset
            plots.append(f"'{csv_name}' using 1:{col + 1} with lines title 'node {k}'")
        return f"set title '{title}'\nplot " + ", \\\n     ".join(plots) + "\n"

    return (
        "# four-panel trajectory overview\n"
        "set datafile separator ','\n"
        "set terminal pngcairo size 1200,800\n"
        "set output 'fig5.png'\n"
        "set multiplot layout 2,2\n"
        "set xlabel 't [s]'\n"
        + series(3, "frequency [Hz]")
        + series(2, "voltage magnitude [p.u.]")
        + series(4, "active power [p.u.]")
        + series(5, "reactive power [p.u.]")
        + "unset multiplot\n"
    )


def write_outputs(traj: Trajectory, out_dir: str) -> None:
    """Write trajectory.csv and fig5.gp into out_dir (created if needed)."""
    os.makedirs(out_dir, exist_ok=True)
    n = traj.mags.shape[1]
    with open(os.path.join(out_dir, "trajectory.csv"), "w", newline="") as fh:
        fh.write(trajectory_csv(traj))
    with open(os.path.join(out_dir, "fig5.gp"), "w", newline="") as fh:
        fh.write(fig5_script(n))
