"""Charge matrices, their spectra, closed forms, and the factorization."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qesco import (ComplexChargesDetected, DivisionByZeroCharge, ModelParams,
                   NegativeRadicand, QuasiParity, asymptotic_charges_L3,
                   build_quasi_even_matrix, build_quasi_odd_matrix,
                   charges_closed_L2, eigencharges, elimination_N_L3,
                   elimination_N_L5, factorization_check, secular_det,
                   secular_det_relative)


def test_quasi_even_matrix_entries():
    M = build_quasi_even_matrix(8, ModelParams(L=2, b=3.0))
    assert M.dense().tolist() == [[3.0, -1.0], [-16.0, -3.0]]
    M = build_quasi_even_matrix(2, ModelParams(L=3, b=5.0))
    assert M.dense().tolist() == [[10.0, -2.0, 0.0],
                                  [-4.0, 0.0, -2.0],
                                  [0.0, -2.0, -10.0]]
    with pytest.raises(ValueError):
        build_quasi_even_matrix(1, ModelParams(L=3))  # needs N >= L - 1


def test_quasi_odd_matrix_entries():
    M = build_quasi_odd_matrix(1, ModelParams(L=1, b=0.0))
    assert M.dense().tolist() == [[0.0, 2.0], [-2.0, 0.0]]
    assert build_quasi_odd_matrix(4, ModelParams(L=3)).dim == 5
    with pytest.raises(ValueError):
        build_quasi_odd_matrix(-1, ModelParams(L=1))


def test_closed_form_L2():
    hi, lo = charges_closed_L2(8, 3.0)
    assert hi == pytest.approx(5.0, abs=1e-14)
    assert lo == pytest.approx(-5.0, abs=1e-14)
    hi, lo = charges_closed_L2(50, 1.0)
    assert hi == pytest.approx(np.sqrt(101.0), rel=1e-15)
    with pytest.raises(ValueError):
        charges_closed_L2(0, 1.0)


@given(N=st.integers(min_value=1, max_value=300),
       b=st.floats(min_value=-5, max_value=5, allow_nan=False))
@settings(max_examples=60, deadline=None)
def test_closed_form_matches_solver(N, b):
    spec = eigencharges(build_quasi_even_matrix(N, ModelParams(L=2, b=b)))
    hi, lo = charges_closed_L2(N, b)
    assert spec.reality_ok
    assert spec.charges == pytest.approx([lo, hi], rel=1e-10, abs=1e-10)


def test_eigencharges_dense_vs_numpy():
    for L, N, b in ((3, 2, 5.0), (4, 7, -2.0), (5, 9, 1.5)):
        M = build_quasi_even_matrix(N, ModelParams(L=L, b=b))
        spec = eigencharges(M)
        ref = np.sort(np.linalg.eigvals(M.dense()).real)
        assert spec.reality_ok
        scale = max(np.max(np.abs(ref)), 1.0)
        assert np.max(np.abs(spec.charges - ref)) < 1e-9 * scale
        assert np.all(np.diff(spec.charges) > 0)


def test_eigencharges_bracketed_large_dim():
    # dim = L = 70 exceeds the dense cutoff, forcing the sign-change
    # bracketing path; the off-diagonal product is positive so the matrix
    # is similar to a real symmetric one and the spectrum must stay real
    M = build_quasi_even_matrix(80, ModelParams(L=70, b=1.0))
    assert M.dim == 70
    spec = eigencharges(M)
    ref = np.sort(np.linalg.eigvals(M.dense()).real)
    assert spec.reality_ok
    assert len(spec.charges) == 70
    assert np.max(np.abs(spec.charges - ref)) < 1e-8 * np.max(np.abs(ref))


def test_eigencharges_complex_pairs_flagged():
    # zero diagonal with antisymmetric-signed couplings: purely imaginary
    # eigenvalues, nothing real to report
    spec = eigencharges(build_quasi_odd_matrix(1, ModelParams(L=1, b=0.0)))
    assert not spec.reality_ok
    assert len(spec.charges) == 0
    assert spec.max_imag == pytest.approx(2.0, rel=1e-10)


def test_secular_det_matches_numpy():
    M = build_quasi_even_matrix(2, ModelParams(L=3, b=5.0))
    for F in (0.0, 1.0, -7.3):
        mant, ex = secular_det(M, F)
        assert mant * 2.0 ** ex == pytest.approx(
            np.linalg.det(M.dense() - F * np.eye(3)), rel=1e-12)


def test_secular_det_relative_vanishes_at_charges():
    M = build_quasi_even_matrix(9, ModelParams(L=4, b=2.0))
    spec = eigencharges(M)
    for f in spec.charges:
        assert secular_det_relative(M, float(f)) < 1e-10
    assert secular_det_relative(M, 0.5 * (spec.charges[0] +
                                          spec.charges[1])) > 1e-6


def test_secular_det_no_overflow_at_huge_dim():
    # plain minor recurrence would overflow doubles near dim 200; the
    # scaled recurrence must return a finite mantissa and a big exponent
    M = build_quasi_even_matrix(400, ModelParams(L=200, b=1.0))
    mant, ex = secular_det(M, 0.37)
    assert np.isfinite(mant) and mant != 0.0
    assert abs(ex) > 600


def test_elimination_L3():
    assert elimination_N_L3(2.0, 0.0) == pytest.approx(1.0, abs=1e-14)
    with pytest.raises(DivisionByZeroCharge):
        elimination_N_L3(0.0, 1.0)
    # round trip through the solved charges
    for N in (2, 17, 400):
        spec = eigencharges(build_quasi_even_matrix(N, ModelParams(L=3, b=3.0)))
        for f in spec.charges:
            assert elimination_N_L3(float(f), 3.0) == pytest.approx(
                N, abs=1e-8 * max(N, 1))


def test_elimination_L5():
    plus, minus = elimination_N_L5(1.0, 0.0)
    root = 24.0 * np.sqrt(513.0)
    assert plus == pytest.approx((808.0 + root) / 512.0, rel=1e-14)
    assert minus == pytest.approx((808.0 - root) / 512.0, rel=1e-14)
    with pytest.raises(DivisionByZeroCharge):
        elimination_N_L5(0.0, 1.0)
    with pytest.raises(NegativeRadicand):
        elimination_N_L5(-4.0, 10.0)
    # every solved charge of the L=5 family must round-trip through one
    # of the two branches
    for N in (4, 9, 60):
        spec = eigencharges(build_quasi_even_matrix(N, ModelParams(L=5, b=2.0)))
        for f in spec.charges:
            back = elimination_N_L5(float(f), 2.0)
            assert min(abs(back[0] - N), abs(back[1] - N)) < 1e-8 * max(N, 1)


def test_asymptotic_charges_L3():
    big, neg, tiny = asymptotic_charges_L3(1000, 5.0)
    assert big == pytest.approx(np.sqrt(8000.0), rel=1e-15)
    assert neg == -big
    assert tiny == pytest.approx(-0.005, rel=1e-15)
    with pytest.raises(ValueError):
        asymptotic_charges_L3(0, 1.0)


def test_factorization_at_charge():
    p = ModelParams(L=2, b=3.0)
    full, small, large, rel_err = factorization_check(8, p, 5.0)
    # F = 5 is a root of the small factor, so both sides vanish together
    assert small == 0.0
    assert rel_err < 1e-10
    # away from any charge the identity still holds with nonzero factors
    full, small, large, rel_err = factorization_check(8, p, 1.2345)
    assert small != 0.0 and large != 0.0
    assert rel_err < 1e-10
    with pytest.raises(ValueError):
        factorization_check(1, ModelParams(L=3), 1.0)


def test_complex_charges_exception_type():
    assert issubclass(ComplexChargesDetected, ArithmeticError)
