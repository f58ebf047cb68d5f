"""Grid studies for the principal-value quadrature.

Part one refines the linear relations for a Drude-Lorentz susceptibility at a
fixed window and at fixed spacing.  Part two refines the nonlinear relation
for a single T-term and prints the residual at each grid size.
"""

import argparse
import time

import numpy as np

from nlham.kk import FrequencyGrid, TTermParams, linear_kk_residual, nonlinear_kk_residual, t_term
from nlham.media import PermittivityModel, susceptibility


def linear(gamma: float):
    m = PermittivityModel.single(1.0, 1.0, gamma)
    f = lambda w: susceptibility(m, w)
    print(f"linear relations, gamma = {gamma}")
    for half, n in [(50, 5001), (50, 10001), (50, 20001), (50, 40001), (100, 40001), (200, 80001)]:
        g = FrequencyGrid.symmetric(half, n)
        print(f"  [-{half}, {half}] n={n:6d} h={g.spacing:.4f}  residual {linear_kk_residual(f, g):.3e}")


def nonlinear(point):
    p = TTermParams(1.0, 1.0, 0.2, 1.5, 0.2)
    print(f"nonlinear relation, single T-term at {point}")
    for half, n in [(20, 1001), (40, 2001), (40, 4001), (80, 8001)]:
        g = FrequencyGrid.symmetric(half, n)
        t0 = time.perf_counter()
        r = nonlinear_kk_residual(lambda a, b: t_term(p, a, b), *point, g)
        print(f"  [-{half}, {half}] n={n:5d}  residual {r:.3e}  ({time.perf_counter() - t0:.1f} s)")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--gamma", type=float, nargs="+", default=[0.05, 0.1, 0.3])
    ap.add_argument("--point", type=float, nargs=2, default=[0.7, 0.5])
    ap.add_argument("--skip-nonlinear", action="store_true")
    args = ap.parse_args()
    for g in args.gamma:
        linear(g)
    if not args.skip_nonlinear:
        nonlinear(tuple(args.point))


if __name__ == "__main__":
    main()
