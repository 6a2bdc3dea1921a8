"""Ground-level gap between the linearly quantized Hamiltonian and the
nonlinear spectral problem, as hbar is halved on a fixed grid.

Two references are reported: the nonlinear ground level on the same grid
(isolates the operator difference) and the exact level (includes the
discretization error of the dense matrix).

    python scripts/gap_scaling.py --hbars 0.4 0.2 0.1 --points 66 --span 4
"""

import argparse
import time

from imsv.model import ExampleParams, build_example_model
from imsv.quantum import Grid1D, brute_force_joint_spectrum, joint_spectrum_example, linear_quantization_spectrum


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--a", type=float, default=1.5)
    ap.add_argument("--eps", type=float, default=1.0)
    ap.add_argument("--hbars", type=float, nargs="+", default=[0.4, 0.2, 0.1])
    ap.add_argument("--points", type=int, default=66, help="grid points per axis, ends included")
    ap.add_argument("--span", type=float, default=4.0)
    args = ap.parse_args()

    rows = []
    for hbar in args.hbars:
        t0 = time.perf_counter()
        p = ExampleParams(args.a, args.eps, hbar)
        grid = Grid1D(-args.span, args.span, args.points)
        lam0 = linear_quantization_spectrum(p, 1, grid)[0]
        h_grid = brute_force_joint_spectrum(build_example_model(p), (0, 0), grid).h[0]
        h_exact = joint_spectrum_example(p, 0, 0).h[0]
        rows.append((hbar, lam0, h_grid, h_exact, abs(lam0 - h_grid), abs(lam0 - h_exact)))
        print(
            f"hbar={hbar:<6g} lambda0={lam0:.12f} h00(grid)={h_grid:.12f} h00(exact)={h_exact:.12f} "
            f"({time.perf_counter() - t0:.1f}s)"
        )
    for prev, cur in zip(rows, rows[1:]):
        print(f"hbar {prev[0]:g} -> {cur[0]:g}: same-grid ratio {prev[4] / cur[4]:.2f}, exact-ref ratio {prev[5] / cur[5]:.2f}")


if __name__ == "__main__":
    main()
