"""Grid-refinement study of the nonlinear h-field on product eigenstates.

For each state the masked max deviation and the field mean are printed for a
sequence of grids; the location of the worst point shows how close it sits
to a nodal line.

    python scripts/field_convergence.py --nmax 3 --grids 201 401 801 1601
"""

import argparse

import numpy as np

from imsv.model import ExampleParams
from imsv.quantum import Grid1D, apply_nonlinear_h, product_state


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--a", type=float, default=1.3)
    ap.add_argument("--eps", type=float, default=0.7)
    ap.add_argument("--hbar", type=float, default=0.5)
    ap.add_argument("--nmax", type=int, default=3)
    ap.add_argument("--span", type=float, default=10.0)
    ap.add_argument("--grids", type=int, nargs="+", default=[201, 401, 801])
    args = ap.parse_args()

    p = ExampleParams(args.a, args.eps, args.hbar)
    for total in range(args.nmax + 1):
        for n in range(total + 1):
            m = total - n
            devs = []
            for npts in args.grids:
                grid = Grid1D(-args.span, args.span, npts)
                st = product_state(p, n, m, grid)
                field = apply_nonlinear_h(p, st.values, grid)
                err = np.where(field.mask, np.abs(field.values - st.spectral.h[0]), -1.0)
                i, j = np.unravel_index(np.argmax(err), err.shape)
                rel_psi = abs(st.values[i, j]) / np.abs(st.values).max()
                devs.append(err[i, j])
                x = grid.points
                print(
                    f"({n},{m}) N={npts:5d} max dev {err[i, j]:.3e} at ({x[i]:+.3f},{x[j]:+.3f}) "
                    f"|psi|/max {rel_psi:.1e}  mean err {abs(field.mean - st.spectral.h[0]):.2e}"
                )
            ratios = [devs[k] / devs[k + 1] for k in range(len(devs) - 1)]
            print(f"({n},{m}) ratios " + " ".join(f"{r:.2f}" for r in ratios))


if __name__ == "__main__":
    main()
