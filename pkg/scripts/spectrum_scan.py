"""Print the joint spectrum of the example model and its approach to a^2/2.

    python scripts/spectrum_scan.py --a 2 --eps 1 --hbar 0.05 --nmax 60
"""

import argparse

import numpy as np

from imsv.model import ExampleParams
from imsv.quantum import joint_spectrum_example, omega


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--a", type=float, default=2.0)
    ap.add_argument("--eps", type=float, default=1.0)
    ap.add_argument("--hbar", type=float, default=0.05)
    ap.add_argument("--nmax", type=int, default=60)
    args = ap.parse_args()

    p = ExampleParams(args.a, args.eps, args.hbar)
    hs = np.array([joint_spectrum_example(p, total, 0).h[0] for total in range(args.nmax + 1)])
    gaps = np.diff(hs)
    print(f"a^2/2 = {p.h_max:g}")
    print(f"{'n+m':>4} {'h':>14} {'gap':>12} {'omega':>10}")
    for total, h in enumerate(hs):
        gap = f"{gaps[total]:12.4e}" if total < gaps.size else " " * 12
        print(f"{total:4d} {h:14.10f} {gap} {omega(p, h):10.6f}")
    print(f"largest level {hs[-1]:.10f}, distance to a^2/2 {p.h_max - hs[-1]:.4e}")


if __name__ == "__main__":
    main()
