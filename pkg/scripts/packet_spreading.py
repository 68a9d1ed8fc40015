"""Evolve a free Gaussian packet and compare its moments with the closed form.

The center must drift at hbar*k0/m and the variance grow as
sigma0^2 + (hbar t / (2 m sigma0))^2.  Writes packet_moments.csv and
prints the worst deviations.
"""

import argparse
from pathlib import Path

import numpy as np

from qmlab import Free, GridSpec, PropagationPlan, SystemConfig, gaussian_packet, propagate
from qmlab.io import write_csv


def moments(state):
    w = np.full(state.grid.n_points, state.grid.dx)
    w[0] *= 0.5
    w[-1] *= 0.5
    rho = np.abs(state.values) ** 2
    center = np.sum(w * state.x * rho)
    var = np.sum(w * (state.x - center) ** 2 * rho)
    return center, var


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--x0", type=float, default=-5.0)
    parser.add_argument("--sigma", type=float, default=1.0)
    parser.add_argument("--k0", type=float, default=1.0)
    parser.add_argument("--dt", type=float, default=0.005)
    parser.add_argument("--steps", type=int, default=1000)
    parser.add_argument("--out", type=Path, default=Path("runs/packet_spreading"))
    parser.add_argument("--plot", action="store_true")
    args = parser.parse_args()

    grid = GridSpec(-40.0, 40.0, 2048)
    cfg = SystemConfig(grid=grid)
    psi = gaussian_packet(grid, args.x0, args.sigma, args.k0)
    result = propagate(psi, Free(), cfg, PropagationPlan(args.dt, args.steps, record_every=50))

    rows = []
    worst_center = worst_var = 0.0
    for state in result.states:
        center, var = moments(state)
        center_exact = args.x0 + args.k0 * state.time
        var_exact = args.sigma**2 + (state.time / (2 * args.sigma)) ** 2
        worst_center = max(worst_center, abs(center - center_exact))
        worst_var = max(worst_var, abs(var - var_exact) / var_exact)
        rows.append((state.time, center, center_exact, var, var_exact))

    args.out.mkdir(parents=True, exist_ok=True)
    path = write_csv(args.out / "packet_moments.csv",
                     ["t", "center", "center_exact", "variance", "variance_exact"], rows)
    print(f"wrote {path}")
    print(f"worst |center - exact|: {worst_center:.3e}")
    print(f"worst relative variance error: {worst_var:.3e}")

    if args.plot:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        data = np.array(rows)
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
        ax1.plot(data[:, 0], data[:, 1], "o", label="measured")
        ax1.plot(data[:, 0], data[:, 2], "-", label="exact")
        ax1.set_xlabel("t")
        ax1.set_ylabel("center")
        ax1.legend()
        ax2.plot(data[:, 0], data[:, 3], "o", label="measured")
        ax2.plot(data[:, 0], data[:, 4], "-", label="exact")
        ax2.set_xlabel("t")
        ax2.set_ylabel("variance")
        ax2.legend()
        fig.tight_layout()
        fig.savefig(args.out / "packet_moments.png", dpi=150)
        print(f"wrote {args.out / 'packet_moments.png'}")


if __name__ == "__main__":
    main()
