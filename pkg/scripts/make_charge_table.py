"""Sweep eigencharge spectra over N and write them as a CSV table.

Reproduces the kind of charge table used to study spectral growth for
the L=4, b=5 quasi-even family (extreme pair growing like +-sqrt(8N),
interior charges pinned near -3b and -b/N), but works for any (L, b,
parity) the solver accepts.

Example:
    python3 scripts/make_charge_table.py --L 4 --b 5 --N 3 30 100 200 300 1000 3000 30000 --out charges.csv
"""

import argparse
import csv
import sys
import time

from qesco import (ModelParams, QuasiParity, build_quasi_even_matrix,
                   build_quasi_odd_matrix, eigencharges)


def spectrum(parity, N, params):
    if parity is QuasiParity.EVEN:
        M = build_quasi_even_matrix(N, params)
    else:
        M = build_quasi_odd_matrix(N, params)
    return eigencharges(M)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--L", type=int, default=4)
    ap.add_argument("--b", type=float, default=5.0)
    ap.add_argument("--parity", choices=["even", "odd"], default="even")
    ap.add_argument("--N", type=int, nargs="+",
                    default=[3, 30, 100, 200, 300, 1000, 3000, 30000])
    ap.add_argument("--out", default="-", help="CSV path, '-' for stdout")
    args = ap.parse_args(argv)

    params = ModelParams(L=args.L, b=args.b)
    parity = QuasiParity(args.parity)

    rows = []
    t0 = time.perf_counter()
    for N in args.N:
        spec = spectrum(parity, N, params)
        if not spec.reality_ok:
            print(f"N={N}: complex charges (max imag {spec.max_imag:.3e}), skipped",
                  file=sys.stderr)
            continue
        for k, f in enumerate(spec.charges):
            rows.append((args.L, args.b, args.parity, N, k, format(f, ".17g")))
    dt = time.perf_counter() - t0

    out = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    w = csv.writer(out)
    w.writerow(["L", "b", "parity", "N", "k", "F"])
    w.writerows(rows)
    if out is not sys.stdout:
        out.close()
        print(f"{len(rows)} charges -> {args.out} ({dt:.2f} s)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
