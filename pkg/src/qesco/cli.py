"""Command line front end.

Subcommands: charges, state, basis, verify. Output is JSON (stable key
order, shortest-roundtrip floats) or CSV (17 significant digits), to
stdout or to --out. A relative --out lands under $QESCO_OUT_DIR when that
is set. Formats are documented in schemas/ alongside JSON schema files.

Exit codes: 0 success, 2 bad arguments or domain validation, 3 numerical
failure (complex charges without --allow-complex, oracle failure,
non-convergent shooting, singular or unconverged pairing), 4 output I/O
failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from .basis import (QuadratureSpec, biorthogonality_residual, build_basis,
                    energy_sweep)
from .model import ModelParams, QuasiParity, energy
from .secular import (ComplexChargesDetected, build_quasi_even_matrix,
                      build_quasi_odd_matrix, eigencharges)
from .verify import hamiltonian_residual, oracle_suite, shooting_match
from .wavefun import (QesState, build_state, coefficients_backward,
                      ghost_residual, state_dump)

__all__ = ["main", "RunConfig"]

OUT_DIR_ENV = "QESCO_OUT_DIR"
TABLE1_N = (3, 30, 100, 200, 300, 1000, 3000, 30000)


@dataclass(frozen=True)
class RunConfig:
    """Validated common arguments shared by the subcommands."""

    L: int
    b: float
    epsilon: float
    parity: QuasiParity
    branch: int
    fmt: str
    out: str | None
    seed: int | None
    allow_complex: bool
    x_max: float | None = None
    nodes: int | None = None

    @property
    def params(self) -> ModelParams:
        return ModelParams(L=self.L, b=self.b, epsilon=self.epsilon)

    @property
    def quad(self) -> QuadratureSpec:
        return QuadratureSpec(X_max=self.x_max, nodes=self.nodes,
                              epsilon=self.epsilon)


def _g17(v: float) -> str:
    return format(float(v), ".17g")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def _emit(payload: dict, csv_lines: list[str], cfg: RunConfig) -> None:
    if cfg.fmt == "csv":
        text = "\n".join(csv_lines) + "\n"
    else:
        text = json.dumps(_jsonable(payload), sort_keys=True, indent=2) + "\n"
    if cfg.out is None:
        sys.stdout.write(text)
        return
    path = cfg.out
    base = os.environ.get(OUT_DIR_ENV)
    if base and not os.path.isabs(path):
        path = os.path.join(base, path)
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w") as fh:
        fh.write(text)


def _parse_n_range(text: str) -> tuple[int, int]:
    try:
        lo_s, hi_s = text.split(":")
        lo, hi = int(lo_s), int(hi_s)
    except ValueError:
        raise ValueError(f"--N-range wants LO:HI, got {text!r}") from None
    if hi < lo:
        raise ValueError(f"--N-range wants LO <= HI, got {text!r}")
    return lo, hi


def _config(args) -> RunConfig:
    if args.L is None:
        raise ValueError("--L is required")
    return RunConfig(
        L=args.L, b=args.b, epsilon=args.epsilon,
        parity=QuasiParity(args.parity), branch=args.branch,
        fmt=args.format, out=args.out, seed=args.seed,
        allow_complex=args.allow_complex,
        x_max=getattr(args, "x_max", None),
        nodes=getattr(args, "nodes", None))


def _charge_matrix(cfg: RunConfig, N: int):
    if cfg.parity is QuasiParity.EVEN:
        return build_quasi_even_matrix(N, cfg.params)
    return build_quasi_odd_matrix(N, cfg.params)


def _cmd_charges(args) -> tuple[dict, list[str], int]:
    if args.table1:
        args.L, args.b, args.parity = 4, 5.0, "even"
        n_list = list(TABLE1_N)
    elif args.N_range is not None:
        lo, hi = _parse_n_range(args.N_range)
        n_list = list(range(lo, hi + 1))
    elif args.N is not None:
        n_list = [args.N]
    else:
        raise ValueError("charges wants --N, --N-range, or --table1")
    cfg = _config(args)
    results = []
    lines = ["L,b,parity,N,k,F_real,F_imag"]
    for N in n_list:
        M = _charge_matrix(cfg, N)
        spec = eigencharges(M)
        entry = {
            "N": N,
            "charges": [float(f) for f in spec.charges],
            "reality_ok": spec.reality_ok,
            "max_imag": spec.max_imag,
            "merged_count": spec.merged_count,
        }
        if not spec.reality_ok:
            if not cfg.allow_complex:
                raise ComplexChargesDetected(
                    f"N={N}: complex charge pairs present (max imaginary "
                    f"part {spec.max_imag:.3e}); rerun with --allow-complex")
            vals = np.linalg.eigvals(M.dense())
            kept = np.sort_complex(
                vals[np.abs(vals.imag) > 1e-8 * max(1.0,
                                                    np.max(np.abs(vals)))])
            entry["complex_charges"] = [[v.real, v.imag] for v in kept]
        results.append(entry)
        for k, f in enumerate(entry["charges"]):
            lines.append(f"{cfg.L},{_g17(cfg.b)},{cfg.parity.value},{N},{k},"
                         f"{_g17(f)},0")
        for re_im in entry.get("complex_charges", []):
            lines.append(f"{cfg.L},{_g17(cfg.b)},{cfg.parity.value},{N},,"
                         f"{_g17(re_im[0])},{_g17(re_im[1])}")
    payload = {
        "command": "charges",
        "L": cfg.L, "b": cfg.b, "parity": cfg.parity.value,
        "table1": bool(args.table1), "seed": cfg.seed,
        "results": results,
    }
    return payload, lines, 0


def _build_cli_state(cfg: RunConfig, N: int, F_override) -> QesState:
    if F_override is None:
        return build_state(cfg.parity, N, cfg.params, cfg.branch)
    # explicit charge: coefficients still satisfy rows 1..N, so the ghost
    # residual and the oracles report exactly how wrong the charge is
    F = float(F_override)
    h = coefficients_backward(cfg.parity, N, cfg.params, F)
    return QesState(parity=cfg.parity, N=N, params=cfg.params,
                    branch=cfg.branch, F=F,
                    E=energy(cfg.parity, N, cfg.params), h=h)


def _cmd_state(args) -> tuple[dict, list[str], int]:
    cfg = _config(args)
    if args.N is None:
        raise ValueError("state wants --N")
    st = _build_cli_state(cfg, args.N, args.F)
    gval, gscale = ghost_residual(st)
    rep = hamiltonian_residual(st)
    shot = shooting_match(cfg.parity, st.N, cfg.params, st.F, st.E)
    passed = bool(rep.passed and shot.converged)
    payload = dict(state_dump(st))
    payload["command"] = "state"
    payload["ghost"] = {"value": gval, "scale": gscale}
    payload["residual"] = {"max_abs": rep.max_abs, "scale": rep.scale,
                           "passed": rep.passed}
    payload["shooting"] = {"mismatch": shot.mismatch, "grid": shot.grid,
                           "converged": shot.converged,
                           "x_match": shot.x_match}
    payload["passed"] = passed
    payload["seed"] = cfg.seed
    lines = ["parity,N,L,b,epsilon,branch,F,E,n,h_n,ghost_value,"
             "residual_max_abs,mismatch,passed"]
    for n, hv in enumerate(st.h):
        lines.append(
            f"{st.parity.value},{st.N},{cfg.L},{_g17(cfg.b)},"
            f"{_g17(cfg.epsilon)},{st.branch},{_g17(st.F)},{_g17(st.E)},"
            f"{n},{_g17(hv)},{_g17(gval)},{_g17(rep.max_abs)},"
            f"{_g17(shot.mismatch)},{passed}")
    return payload, lines, 0 if passed else 3


def _cmd_verify(args) -> tuple[dict, list[str], int]:
    cfg = _config(args)
    seed = cfg.seed if cfg.seed is not None else 0
    report = oracle_suite(seed=seed, n_cases=args.n_cases)
    payload = dict(report)
    payload["command"] = "verify"
    lines = ["check,count,worst,tol,passed"]
    for name, c in report["checks"].items():
        lines.append(f"{name},{c['count']},{_g17(c['worst'])},"
                     f"{_g17(c['tol'])},{c['passed']}")
    lines.append(f"all,{report['n_cases']},,,{report['passed']}")
    return payload, lines, 0 if report["passed"] else 3


def _cmd_basis(args) -> tuple[dict, list[str], int]:
    cfg = _config(args)
    if args.N_range is None:
        raise ValueError("basis wants --N-range LO:HI")
    lo, hi = _parse_n_range(args.N_range)
    n_states = hi - lo + 1
    bs = build_basis(cfg.params, lo, n_states, branch=cfg.branch,
                     quad=cfg.quad, parity=cfg.parity)
    biog = biorthogonality_residual(bs)
    f_lo, f_hi = float(np.min(bs.F)) - 0.5, float(np.max(bs.F)) + 0.5
    f_grid = np.linspace(f_lo, f_hi, args.f_grid)
    sweep, max_imag = energy_sweep(bs, f_grid)
    payload = {
        "command": "basis",
        "parity": cfg.parity.value, "L": cfg.L, "b": cfg.b,
        "epsilon": cfg.epsilon, "branch": cfg.branch,
        "N_min": lo, "n_states": n_states, "seed": cfg.seed,
        "N_values": bs.N_values,
        "charges": bs.F, "energies": bs.E,
        "Q": bs.Q, "W": bs.W,
        "cond_Q": bs.cond_Q, "min_gap": bs.min_gap,
        "quad_delta": bs.quad_delta,
        "pseudo_norm_signs": bs.pseudo_norm_signs,
        "x_max": bs.x_max, "nodes": bs.nodes,
        "biorthogonality_residual": biog,
        "sweep": {"F": f_grid, "E": sweep, "max_imag": max_imag},
    }
    head = "F," + ",".join(f"E_{k}" for k in range(bs.size)) + ",max_imag"
    lines = [head]
    for fval, row in zip(f_grid, sweep):
        lines.append(",".join([_g17(fval)] + [_g17(v) for v in row]
                              + [_g17(max_imag)]))
    return payload, lines, 0


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="qesco",
        description=("Solvable bound states of a complex-shifted "
                     "Coulomb-plus-oscillator model: eigencharges, "
                     "coefficients, pairing bases, verification."))
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--L", type=int, default=None,
                        help="angular parameter L = 2*ell + 1 (integer >= 1)")
    common.add_argument("--b", type=float, default=0.0,
                        help="linear coupling (default 0)")
    common.add_argument("--epsilon", type=float, default=1.0,
                        help="contour shift, r = x - i*epsilon (default 1)")
    common.add_argument("--parity", choices=("even", "odd"), default="even",
                        help="quasi-parity family (default even)")
    common.add_argument("--branch", type=int, default=0,
                        help="index into the ascending real charge list")
    common.add_argument("--N", type=int, default=None,
                        help="polynomial degree")
    common.add_argument("--N-range", dest="N_range", default=None,
                        help="inclusive degree range LO:HI")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", default=None,
                        help=f"output file (relative paths join "
                             f"${OUT_DIR_ENV} when set; default stdout)")
    common.add_argument("--seed", type=int, default=None,
                        help="seed for the randomized verify suite; "
                             "recorded in every output")
    common.add_argument("--allow-complex", action="store_true",
                        help="report complex charge pairs instead of failing")
    sub = p.add_subparsers(dest="command", required=True)
    pc = sub.add_parser("charges", parents=[common],
                        help="eigencharges of the secular matrix")
    pc.add_argument("--table1", action="store_true",
                    help="preset sweep: quasi-even, L=4, b=5, "
                         "N in {3,30,100,200,300,1000,3000,30000}")
    pc.set_defaults(func=_cmd_charges)
    ps = sub.add_parser("state", parents=[common],
                        help="construct one state and run both oracles")
    ps.add_argument("--F", type=float, default=None,
                    help="override the charge instead of solving for it "
                         "(the oracles then report the defect)")
    ps.set_defaults(func=_cmd_state)
    pb = sub.add_parser("basis", parents=[common],
                        help="pairing basis over a degree window, "
                             "with an E(F) sweep")
    pb.add_argument("--f-grid", type=int, default=50,
                    help="number of charge grid points for the E(F) sweep")
    pb.add_argument("--x-max", dest="x_max", type=float, default=None,
                    help="quadrature half-width override")
    pb.add_argument("--nodes", type=int, default=None,
                    help="quadrature total node-count override (>= 64)")
    pb.set_defaults(func=_cmd_basis)
    pv = sub.add_parser("verify", parents=[common],
                        help="seeded randomized oracle suite")
    pv.add_argument("--n-cases", dest="n_cases", type=int, default=200,
                    help="number of random states (default 200)")
    pv.set_defaults(func=_cmd_verify)
    return p


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.func is _cmd_verify and args.L is None:
        args.L = 0  # the suite samples its own parameters
    try:
        payload, lines, code = args.func(args)
        _emit(payload, lines, _config(args))
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"output failure: {exc}", file=sys.stderr)
        return 4
    return code


if __name__ == "__main__":
    sys.exit(main())
