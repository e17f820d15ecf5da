"""Measure how the reduced-problem ground energy responds to basis growth.

Picks a detuned charge F* halfway between two adjacent basis charges,
computes the lowest eigenvalue of the reduced problem at F* for a range
of basis sizes, and compares each against an independent shooting-method
energy at the same F*.

The deviation stalls near 1e-2 instead of decaying: the solvable states
all share the log-free Frobenius structure at the origin, while the true
eigenfunction at a detuned charge carries a logarithmic sector the basis
cannot represent. Growing the basis adds resolution only inside the
log-free sector, so the error floor is structural, not numerical.

Example:
    python3 scripts/refinement_trend.py --sizes 8 10 12 14
"""

import argparse
import sys

import numpy as np

from qesco import (ModelParams, QuasiParity, build_basis, charges_closed_L2,
                   energy, energy_scan, reduced_problem)


def shooting_energy(params, F, E_window, steps=40000):
    roots = energy_scan(QuasiParity.EVEN, params, F, E_window, steps=steps)
    if len(roots) == 0:
        raise RuntimeError(f"no shooting root in {E_window} at F={F}")
    return roots[0]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--L", type=int, default=2)
    ap.add_argument("--b", type=float, default=1.0)
    ap.add_argument("--branch", type=int, default=1, choices=[1, -1])
    ap.add_argument("--sizes", type=int, nargs="+", default=[8, 10, 12, 14])
    ap.add_argument("--steps", type=int, default=40000)
    args = ap.parse_args(argv)

    params = ModelParams(L=args.L, b=args.b)

    # detune halfway between the N=2 and N=3 charges on the chosen branch
    idx = 0 if args.branch > 0 else 1
    F2 = charges_closed_L2(2, args.b)[idx]
    F3 = charges_closed_L2(3, args.b)[idx]
    F_star = 0.5 * (F2 + F3)
    E1 = energy(QuasiParity.EVEN, 1, params)
    E_ref = shooting_energy(params, F_star, (E1 - 2.0, E1 + 1.0),
                            steps=args.steps)
    print(f"F* = {F_star:.12g}  shooting E = {E_ref:.12g}")

    print(f"{'size':>5} {'E_reduced':>22} {'deviation':>14}")
    prev = None
    for n in args.sizes:
        basis = build_basis(params, 1, n, branch=args.branch)
        _, eigvals = reduced_problem(basis, F_star)
        E0 = eigvals[0].real
        dev = abs(E0 - E_ref)
        trend = "" if prev is None else ("  (down)" if dev < prev else "  (UP)")
        print(f"{n:>5} {E0:>22.15g} {dev:>14.6e}{trend}")
        prev = dev
    return 0


if __name__ == "__main__":
    sys.exit(main())
