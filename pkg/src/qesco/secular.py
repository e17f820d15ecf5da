"""Charge matrices, secular determinants, and eigencharge solvers.

The admissible Coulomb-like couplings F at the QES energy are eigenvalues
of small real nonsymmetric tridiagonal matrices. This module builds those
matrices, evaluates their characteristic determinants by an overflow-safe
scaled three-term recurrence, solves for the charges (dense LAPACK for
small dimension, sign-change bracketing above), and carries the closed-form
and elimination shortcuts that exist at L = 2, 3, 5.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import ModelParams, QuasiParity, energy

__all__ = [
    "ChargeMatrix", "ChargeSpectrum",
    "ComplexChargesDetected", "DivisionByZeroCharge", "NegativeRadicand",
    "build_quasi_even_matrix", "build_quasi_odd_matrix",
    "secular_det", "secular_det_relative", "eigencharges",
    "charges_closed_L2", "elimination_N_L3", "elimination_N_L5",
    "asymptotic_charges_L3", "factorization_check",
]

# dense eigenvalue solve below this dimension, determinant bracketing above
_DENSE_DIM = 64


class ComplexChargesDetected(ArithmeticError):
    """A genuinely complex eigencharge pair was found where reals were required."""


class DivisionByZeroCharge(ZeroDivisionError):
    """Elimination formula evaluated at F = 0."""


class NegativeRadicand(ArithmeticError):
    """Elimination discriminant went negative (complex branch, out of real scope)."""


@dataclass(frozen=True)
class ChargeMatrix:
    """Real tridiagonal matrix whose eigenvalues are the admissible charges.

    diag holds the entries beta_n (the F-independent diagonal part, so the
    secular condition is det(diag(beta) - F*I + offdiag) = 0), sub holds the
    subdiagonal A_{n+1} with the QES energy already substituted, sup holds
    the superdiagonal C_n.
    """

    diag: np.ndarray
    sub: np.ndarray
    sup: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.diag)

    def dense(self) -> np.ndarray:
        m = np.diag(self.diag).astype(float)
        if self.dim > 1:
            m += np.diag(self.sub, -1) + np.diag(self.sup, 1)
        return m


@dataclass(frozen=True)
class ChargeSpectrum:
    """Solved charges, sorted ascending, with reality bookkeeping.

    reality_ok is True when every eigenvalue passed the reality filter, in
    which case charges has exactly dim entries. max_imag records the largest
    imaginary magnitude seen before filtering; merged_count how many
    near-degenerate roots were collapsed (none for all known inputs).
    """

    charges: np.ndarray
    reality_ok: bool
    max_imag: float
    merged_count: int = 0


def build_quasi_even_matrix(N: int, params: ModelParams) -> ChargeMatrix:
    """L x L charge matrix of the quasi-even family.

    Valid for N >= L - 1. The vanishing element C_{L-1} decouples these
    first L rows from the rest of the coefficient system, which is what
    makes the quasi-even secular determinant factor.
    """
    L, b = params.L, params.b
    if N < L - 1:
        raise ValueError(
            f"quasi-even family needs N >= L - 1 = {L - 1}, got N = {N}")
    n = np.arange(L)
    return ChargeMatrix(
        diag=-(2 * n + 1 - L) * float(b),
        sub=-2.0 * (N - n[:-1]),
        sup=(n[:-1] + 1.0) * (n[:-1] + 1 - L),
    )


def build_quasi_odd_matrix(N: int, params: ModelParams) -> ChargeMatrix:
    """(N+1) x (N+1) charge matrix of the quasi-odd family."""
    L, b = params.L, params.b
    if N < 0:
        raise ValueError(f"N must be >= 0, got {N}")
    n = np.arange(N + 1)
    return ChargeMatrix(
        diag=-(2 * n + 1 + L) * float(b),
        sub=-2.0 * (N - n[:-1]),
        sup=(n[:-1] + 1.0) * (n[:-1] + 1 + L),
    )


def _det_scaled(diag, sub, sup, F):
    """Batched scaled determinant recurrence det(T - F*I).

    diag (dim,) or (m, dim); sub/sup one shorter on the last axis; F any
    shape broadcastable against the batch axes. Returns (mantissa, exp2)
    in extended precision with mantissa * 2**exp2 the true determinant.
    The running minors are renormalized every step so no overflow or
    underflow is possible for any dimension.
    """
    diag = np.atleast_2d(np.asarray(diag, dtype=np.longdouble))
    sub = np.atleast_2d(np.asarray(sub, dtype=np.longdouble))
    sup = np.atleast_2d(np.asarray(sup, dtype=np.longdouble))
    F = np.asarray(F, dtype=np.longdouble)
    dim = diag.shape[-1]
    batch = np.broadcast_shapes(diag.shape[:-1], F.shape)
    d_prev = np.ones(batch, dtype=np.longdouble)          # D_{-1}
    d_cur = np.broadcast_to(diag[..., 0] - F, batch).copy()  # D_0
    exp = np.zeros(batch, dtype=np.int64)
    for k in range(1, dim):
        d_next = (diag[..., k] - F) * d_cur - sub[..., k - 1] * sup[..., k - 1] * d_prev
        d_prev = d_cur
        d_cur = d_next
        # renormalize the pair to keep d_cur in [0.5, 1)
        mant, e = np.frexp(d_cur)
        nz = d_cur != 0
        d_cur = np.where(nz, mant, d_cur)
        d_prev = np.where(nz, np.ldexp(d_prev, -e), d_prev)
        exp = exp + np.where(nz, e.astype(np.int64), 0)
    return d_cur, exp


def _det_row_scale_log2(diag, sub, sup, F) -> float:
    """log2 of a natural determinant magnitude scale: product of row norms."""
    diag = np.asarray(diag, float)
    rows = np.abs(diag - F)
    if len(diag) > 1:
        rows = rows.copy()
        rows[1:] += np.abs(sub)
        rows[:-1] += np.abs(sup)
    return float(np.sum(np.log2(np.maximum(rows, 1.0))))


def secular_det(M: ChargeMatrix, F: float) -> tuple[float, int]:
    """det(M - F*I) as (value, scale) with value * 2**scale the determinant."""
    mant, exp = _det_scaled(M.diag, M.sub, M.sup, np.longdouble(F))
    return float(mant.reshape(-1)[0]), int(exp.reshape(-1)[0])


def secular_det_relative(M: ChargeMatrix, F: float) -> float:
    """|det(M - F*I)| divided by the product of row norms (overflow safe)."""
    mant, exp = secular_det(M, F)
    lg = _det_row_scale_log2(M.diag, M.sub, M.sup, F)
    shift = exp - lg
    if shift < -16000:
        return 0.0
    return abs(mant) * float(2.0 ** min(shift, 1024.0))


def _polish_batch(diag, sub, sup, F0: np.ndarray) -> np.ndarray:
    """Guarded secant polish of determinant roots, vectorized over F0.

    Dense eigenvalue solves of the nonsymmetric tridiagonals lose absolute
    accuracy as N grows (O(1e-6) at N ~ 1e3); a few secant steps on the
    extended-precision scaled determinant restore the roots to near machine
    accuracy. Moves larger than 1e-5 * (|F0| + 1) are rejected so a lane can
    never slide to a neighboring root.
    """
    F0 = np.asarray(F0, dtype=np.longdouble)
    if F0.size == 0:
        return F0.astype(float)
    x0 = F0.copy()
    x1 = F0 + 1e-7 * (np.abs(F0) + 1.0)
    m0, e0 = _det_scaled(diag, sub, sup, x0)
    m1, e1 = _det_scaled(diag, sub, sup, x1)
    live = np.ones(F0.shape, dtype=bool)
    for _ in range(30):
        emax = np.maximum(e0, e1)
        v0 = np.ldexp(m0, (e0 - emax).astype(np.int64))
        v1 = np.ldexp(m1, (e1 - emax).astype(np.int64))
        denom = v1 - v0
        flat = denom == 0
        live &= ~flat
        if not live.any():
            break
        step = np.zeros_like(x1)
        np.divide(v1 * (x1 - x0), denom, out=step, where=live)
        x2 = x1 - step
        jumped = np.abs(x2 - F0) > 1e-5 * (np.abs(F0) + 1.0)
        live &= ~jumped
        done = np.abs(x2 - x1) <= np.abs(x2) * np.longdouble(5e-19) + np.longdouble(1e-30)
        move = live
        x0 = np.where(move, x1, x0)
        m0, e0 = np.where(move, m1, m0), np.where(move, e1, e0)
        x1 = np.where(move, x2, x1)
        m2, e2 = _det_scaled(diag, sub, sup, x1)
        m1, e1 = np.where(move, m2, m1), np.where(move, e2, e1)
        live &= ~done
        if not live.any():
            break
    return x1.astype(float)


def _bracket_roots(M: ChargeMatrix, points_per_root: int = 8) -> np.ndarray:
    """Real roots of the secular determinant by grid sign changes + bisection."""
    radius = float(np.max(np.abs(M.diag)))
    if M.dim > 1:
        row = np.zeros(M.dim)
        row[1:] += np.abs(M.sub)
        row[:-1] += np.abs(M.sup)
        radius = float(np.max(np.abs(M.diag) + row))
    radius = radius * 1.01 + 1.0
    npts = points_per_root * M.dim + 1
    grid = np.linspace(-radius, radius, npts)
    mant, _ = _det_scaled(M.diag, M.sub, M.sup, grid.astype(np.longdouble))
    sgn = np.sign(mant)
    hits = grid[np.where(mant == 0)[0]]
    idx = np.where(sgn[:-1] * sgn[1:] < 0)[0]
    lo, hi = grid[idx].astype(np.longdouble), grid[idx + 1].astype(np.longdouble)
    slo = sgn[idx]
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        m, _ = _det_scaled(M.diag, M.sub, M.sup, mid)
        left = np.sign(m) == slo
        lo = np.where(left, mid, lo)
        hi = np.where(left, hi, mid)
    roots = np.concatenate([hits, (0.5 * (lo + hi)).astype(float)])
    return np.sort(roots)


def eigencharges(M: ChargeMatrix, reality_tol: float = 1e-8) -> ChargeSpectrum:
    """All real eigenvalues of the charge matrix, polished and sorted.

    Dense (balanced) LAPACK eigenvalues for dim <= 64, determinant
    bracketing above. Complex pairs are reported through reality_ok and
    max_imag rather than silently dropped; callers that require a full real
    spectrum should check reality_ok (or use the CLI, which exits nonzero).
    """
    if reality_tol <= 0:
        raise ValueError("reality_tol must be > 0")
    if M.dim <= _DENSE_DIM:
        vals = np.linalg.eigvals(M.dense())
        spectral = max(1.0, float(np.max(np.abs(vals))) if len(vals) else 1.0)
        max_imag = float(np.max(np.abs(vals.imag))) if len(vals) else 0.0
        keep = np.abs(vals.imag) <= reality_tol * spectral
        raw = np.sort(vals[keep].real)
        ok = bool(keep.all())
    else:
        raw = _bracket_roots(M)
        spectral = max(1.0, float(np.max(np.abs(raw))) if len(raw) else 1.0)
        max_imag = 0.0
        ok = len(raw) == M.dim
    polished = _polish_batch(M.diag, M.sub, M.sup, raw)
    polished = np.sort(polished)
    # collapse near-degenerate roots (defensive; no known degenerate inputs)
    merged = 0
    if len(polished) > 1:
        gap = np.diff(polished)
        dup = gap < 1e-9 * spectral
        if dup.any():
            merged = int(dup.sum())
            polished = np.concatenate([polished[:1], polished[1:][~dup]])
    return ChargeSpectrum(charges=polished, reality_ok=ok,
                          max_imag=max_imag, merged_count=merged)


def charges_closed_L2(N: int, b: float) -> tuple[float, float]:
    """The two L = 2 charges in closed form, (positive, negative)."""
    if N < 1:
        raise ValueError(f"need N >= 1, got {N}")
    root = float(np.sqrt(b * b + 2.0 * N))
    return root, -root


def elimination_N_L3(F: float, b: float) -> float:
    """Invert the L = 3 secular condition for N at given charge F.

    Returns the (unique) N with F in the L = 3 quasi-even spectrum; an
    integer result certifies F as an exact eigencharge.
    """
    if F == 0:
        raise DivisionByZeroCharge("L=3 elimination is singular at F = 0")
    return -(4 * F * b * b + 8 * b - F ** 3 - 4 * F) / (8 * F)


def elimination_N_L5(F: float, b: float) -> tuple[float, float]:
    """The two N branches of the inverted L = 5 secular condition."""
    if F == 0:
        raise DivisionByZeroCharge("L=5 elimination is singular at F = 0")
    radicand = 1024 * b * b + 192 * b * F ** 3 + 512 * F * F + F ** 6
    if radicand < 0:
        raise NegativeRadicand(
            f"complex elimination branch (radicand = {radicand})")
    root = 24.0 * np.sqrt(radicand)
    base = -768 * b - 256 * F * b * b + 768 * F + 40 * F ** 3
    return (base + root) / (512 * F), (base - root) / (512 * F)


def asymptotic_charges_L3(N: int, b: float) -> tuple[float, float, float]:
    """Large-N closed-form estimate of the three L = 3 charges."""
    if N < 1:
        raise ValueError(f"need N >= 1, got {N}")
    big = float(np.sqrt(8.0 * N))
    return big, -big, -b / N


def factorization_check(N: int, params: ModelParams,
                        F: float) -> tuple[float, float, float, float]:
    """Verify det(full quasi-even system) = S_small * S_large at charge F.

    The full (N+1)-dimensional quasi-even secular determinant factors
    exactly into the leading L x L block (whose roots are the charges) and
    the trailing (N+1-L) block, because the coupling element C_{L-1}
    vanishes identically. Returns (full, small, large, rel_err); the first
    three are clamped to +-inf if they exceed double range (rel_err is
    computed exponent-safely and is always finite).
    """
    L = params.L
    if N < L - 1:
        raise ValueError(f"need N >= L - 1 = {L - 1}, got N = {N}")
    E = energy(QuasiParity.EVEN, N, params)
    n = np.arange(N + 1)
    diag = -(2 * n + 1 - L) * float(params.b)
    sub = -2.0 * (N - n[:-1])
    sup = (n[:-1] + 1.0) * (n[:-1] + 1 - L)
    if not np.allclose(params.b * params.b + 2 * n[1:] - L - E, sub):
        raise AssertionError("energy substitution broke the subdiagonal")

    def det_of(sl: slice):
        d = diag[sl]
        if len(d) == 0:
            return np.longdouble(1.0), 0
        lo = sl.start or 0
        m, e = _det_scaled(d, sub[lo:lo + len(d) - 1], sup[lo:lo + len(d) - 1],
                           np.longdouble(F))
        return m.reshape(-1)[0], int(e.reshape(-1)[0])

    fm, fe = det_of(slice(0, N + 1))
    sm, se = det_of(slice(0, L))
    lm, le = det_of(slice(L, N + 1))
    pm, pe = sm * lm, se + le
    # realign exponents before comparing
    emax = max(fe, pe)
    v_full = np.ldexp(fm, fe - emax)
    v_prod = np.ldexp(pm, pe - emax)
    denom = max(abs(v_full), abs(v_prod), np.longdouble(1e-300))
    rel_err = float(abs(v_full - v_prod) / denom)

    def to_float(m, e):
        try:
            return float(np.ldexp(m, e))
        except OverflowError:
            return float(np.sign(m) * np.inf)

    return to_float(fm, fe), to_float(sm, se), to_float(lm, le), rel_err
