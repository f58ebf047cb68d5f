"""Closed-form polarizability against the time-domain oracle, with step halving.

Also compares the two routes to the coupling tensor for the same atoms.
"""

import argparse

import numpy as np

from nlham.atom import chi2, chi2_from_oracle, oracle_steps, random_atom
from nlham.effham import k_tensor_factored, k_tensor_sum
from nlham.media import PermittivityModel


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--atoms", type=int, default=3)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    host = PermittivityModel.single(1.0, 2.0, 0.3)
    for a in range(args.atoms):
        atom = random_atom(rng)
        w, wp = rng.uniform(0.1, 1.5, 2)
        ref = chi2(atom, w, wp)
        step, horizon = oracle_steps(atom, w, wp)
        print(f"atom {a}: (w, w') = ({w:.3f}, {wp:.3f}), default step {step:.4f}, horizon {horizon:.1f}")
        for s in (8 * step, 4 * step, 2 * step, step):
            err = np.linalg.norm(chi2_from_oracle(atom, w, wp, step=s) - ref) / np.linalg.norm(ref)
            print(f"  step {s:.4f}  relative error {err:.3e}")
        rA = np.zeros(3)
        pts = [rng.normal(size=3) for _ in range(3)]
        k1 = k_tensor_sum(atom, host, None, *pts, rA, w, wp)
        k2 = k_tensor_factored(atom, host, None, *pts, rA, w, wp)
        print(f"  two-route gap {np.linalg.norm(k1 - k2) / np.linalg.norm(k1):.2e}")


if __name__ == "__main__":
    main()
