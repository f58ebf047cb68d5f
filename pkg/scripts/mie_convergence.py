"""Convergence of the small-cavity forms of the Mie coefficients.

Prints, for each permittivity, the relative error of the three-term expansion
of C, the error of the leading term alone and |D - D~| against z0, followed
by fitted log-log slopes.
"""

import argparse

import numpy as np

from nlham.fitting import loglog_slope
from nlham.lfc import dtilde, mie_C_exact, mie_C_expansion, mie_C_leading, mie_D_exact


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--eps", type=complex, nargs="+", default=[2.0, 2.25 + 0.1j, 3 + 0.2j])
    ap.add_argument("--z0-min", type=float, default=1e-4)
    ap.add_argument("--z0-max", type=float, default=10**-1.5)
    ap.add_argument("--points", type=int, default=11)
    args = ap.parse_args()
    z0 = np.geomspace(args.z0_min, args.z0_max, args.points)
    for eps in args.eps:
        print(f"eps = {eps}")
        print(f"{'z0':>12} {'C series':>12} {'C leading':>12} {'|D - D~|':>12}")
        c_ser, c_lead, d_err = [], [], []
        for z in z0:
            ex = mie_C_exact(eps, z)
            c_ser.append(abs(mie_C_expansion(eps, z) - ex) / abs(ex))
            c_lead.append(abs(mie_C_leading(eps, z) - ex) / abs(ex))
            d_err.append(abs(mie_D_exact(eps, z) - dtilde(eps)))
            print(f"{z:12.4e} {c_ser[-1]:12.4e} {c_lead[-1]:12.4e} {d_err[-1]:12.4e}")
        # the smallest radii sit on the round-off floor for the series error
        ok = np.array(c_ser) > 1e-14
        print(f"slopes: C series {loglog_slope(z0[ok], np.array(c_ser)[ok]):.3f}, "
              f"C leading {loglog_slope(z0, c_lead):.3f}, D {loglog_slope(z0, d_err):.3f}\n")


if __name__ == "__main__":
    main()
