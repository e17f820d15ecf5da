"""Finite basis of solvable states and the reduced spectral problem.

Quasi-even states at neighboring polynomial degrees (each at its own
eigencharge, fixed branch) are paired bilinearly along the contour,
without complex conjugation: the contour Hamiltonian is complex symmetric,
so left eigenfunctions equal right ones and the conjugation-free pairing
is the canonical double-ket reading. The pairing Gram matrix Q and the
Coulomb matrix W obey an exact two-parameter biorthogonality identity,
which lets the Hamiltonian at an arbitrary charge F be assembled from
spectral data plus measured overlaps and reduced to an ordinary matrix
eigenproblem.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import ModelParams, QuasiParity
from .verify import default_x_max
from .wavefun import (LaurentPoly, QesState, build_state, evaluate_psi,
                      laurent_eval, prefactor)

__all__ = [
    "QuadratureSpec", "BasisSet", "QuadratureNotConverged", "SingularOverlap",
    "contour_pairing", "charge_free_apply", "build_basis",
    "biorthogonality_residual", "biorthogonality_matrix",
    "hamiltonian_matrix", "reduced_problem", "energy_sweep",
]

_PANEL_WIDTH = 0.5
_PANEL_NODES = 16


class QuadratureNotConverged(RuntimeError):
    """Node doubling moved a pairing integral beyond the allowed tolerance."""


class SingularOverlap(ArithmeticError):
    """Gram matrix unusable: degenerate charges or excessive conditioning."""


@dataclass(frozen=True)
class QuadratureSpec:
    """Composite Gauss-Legendre rule on x in [-X_max, X_max].

    nodes is the total node-count target (composite panels times points per
    panel); the realized count rounds up to whole panels and is what gets
    doubled for the convergence check. None fields defer to defaults
    derived from the states being paired.
    """

    X_max: float | None = None
    nodes: int | None = None
    epsilon: float | None = None

    def __post_init__(self):
        if self.nodes is not None and self.nodes < 64:
            raise ValueError(f"nodes must be >= 64, got {self.nodes}")
        if self.X_max is not None and self.X_max <= 0:
            raise ValueError("X_max must be positive")


@dataclass(frozen=True, eq=False)
class BasisSet:
    """States N_min..N_min+size-1 on one branch, with pairing matrices.

    Q is the bilinear overlap Gram, W the Coulomb (i/r-weighted) pairing,
    T its diagonal, R the inverse of Q (computed after symmetric diagonal
    equilibration, since the raw states are unnormalized). Pseudo-norms
    diag(Q) may be negative; their signs are recorded, never normalized
    away. quad_delta is the recorded node-doubling movement of the Grams.
    """

    parity: QuasiParity
    params: ModelParams
    branch: int
    states: tuple[QesState, ...]
    N_values: np.ndarray
    F: np.ndarray
    E: np.ndarray
    Q: np.ndarray
    W: np.ndarray
    R: np.ndarray
    cond_Q: float
    min_gap: float
    quad_delta: float
    x_max: float
    nodes: int
    quad: QuadratureSpec = field(default_factory=QuadratureSpec)

    @property
    def size(self) -> int:
        return len(self.states)

    @property
    def T(self) -> np.ndarray:
        """Diagonal of the Coulomb pairing, the only W data the reduced
        problem cannot reconstruct from Q."""
        return np.diag(self.W).copy()

    @property
    def pseudo_norm_signs(self) -> np.ndarray:
        return np.sign(np.diag(self.Q)).astype(int)


def _panel_rule(x_max: float, nodes_per_panel: int):
    n_panels = max(1, int(np.ceil(2.0 * x_max / _PANEL_WIDTH)))
    edges = np.linspace(-x_max, x_max, n_panels + 1)
    g, gw = np.polynomial.legendre.leggauss(nodes_per_panel)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    x = (mid[:, None] + half[:, None] * g[None, :]).ravel()
    w = (half[:, None] * gw[None, :]).ravel()
    return x, w


def _nodes_per_panel(x_max: float, spec: QuadratureSpec) -> int:
    if spec.nodes is None:
        return _PANEL_NODES
    n_panels = max(1, int(np.ceil(2.0 * x_max / _PANEL_WIDTH)))
    return max(_PANEL_NODES, int(np.ceil(spec.nodes / n_panels)))


def _resolve_x_max(states, spec: QuadratureSpec) -> float:
    params = states[0].params
    n_max = max(s.N for s in states)
    floor = (8.0 + abs(params.b) + params.epsilon + float(np.sqrt(n_max)))
    if spec.X_max is not None:
        if spec.X_max < floor:
            raise ValueError(
                f"X_max must be >= 8 + |b| + epsilon + sqrt(N_max) = "
                f"{floor:.3f}, got {spec.X_max}")
        return float(spec.X_max)
    auto = max(default_x_max(params, float(s.E)) for s in states)
    return max(floor, auto, 10.0 + abs(params.b) + params.epsilon)


def charge_free_apply(state: QesState) -> LaurentPoly:
    """Series of H(0) psi with the exponential prefactor divided out.

    In w = i*r the charge-free operator is
    d^2/dw^2 - ell(ell+1)/w^2 + 2 b w - w^2, and conjugating by the
    prefactor exp(w^2/2 - b*w) turns it into pure coefficient shifts on
    the power series. Independent of the eigen-identities, so pairings of
    the result against other states make a genuine quadrature test.
    """
    p = state.params
    b = p.b
    cf = p.centrifugal
    s = state.s0
    h = state.h
    n_terms = len(h)
    g = np.zeros(n_terms + 2, dtype=complex)
    j = np.arange(n_terms)
    sj = s + j
    np.add.at(g, j, (sj * (sj - 1.0) - cf) * h)
    np.add.at(g, j + 1, (-2.0 * b * sj) * h)
    np.add.at(g, j + 2, (2.0 * sj + 1.0 + b * b) * h)
    return LaurentPoly(s0=s - 2.0, coeffs=g)


def _state_values(state: QesState, x: np.ndarray,
                  weight: str) -> np.ndarray:
    """Values of psi, (i/r) psi, or H(0) psi on the abscissa grid."""
    params = state.params
    if weight == "charge_free_hamiltonian":
        return prefactor(x, params) * laurent_eval(charge_free_apply(state),
                                                   x, params)
    v = evaluate_psi(state, x)
    if weight == "coulomb":
        r = x - 1j * params.epsilon
        return v * (1j / r)
    if weight != "identity":
        raise ValueError(f"unknown weight {weight!r}")
    return v


def contour_pairing(m: QesState, n: QesState, weight: str = "identity",
                    quad: QuadratureSpec | None = None,
                    qtol: float = 1e-8) -> complex:
    """Bilinear pairing integral(psi_m(r(x)) [w] psi_n(r(x)) dx), no
    conjugation.

    weight: "identity" for the overlap Q_mn, "coulomb" for the i/r-weighted
    W_mn, "charge_free_hamiltonian" to apply H(0) to the right state
    symbolically before pairing. Evaluated at the base node count and at
    doubled nodes; relative disagreement beyond qtol raises
    QuadratureNotConverged, otherwise the doubled-node value is returned.
    """
    if (m.params.L, m.params.b, m.params.epsilon) != (
            n.params.L, n.params.b, n.params.epsilon):
        raise ValueError("paired states must share (L, b, epsilon)")
    quad = quad or QuadratureSpec()
    x_max = _resolve_x_max((m, n), quad)
    base = _nodes_per_panel(x_max, quad)
    vals = []
    for nn in (base, 2 * base):
        x, wq = _panel_rule(x_max, nn)
        f = _state_values(m, x, "identity") * _state_values(n, x, weight)
        vals.append(complex(np.sum(wq * f)))
    ref = max(abs(vals[1]), 1e-300)
    if abs(vals[1] - vals[0]) > qtol * ref:
        raise QuadratureNotConverged(
            f"pairing moved by rel {abs(vals[1] - vals[0]) / ref:.3e} "
            f"on node doubling (weight={weight})")
    return vals[1]


def _grams(states, params, x_max, base_nodes, qtol):
    out = []
    for nn in (base_nodes, 2 * base_nodes):
        x, w = _panel_rule(x_max, nn)
        r = x - 1j * params.epsilon
        V = np.array([evaluate_psi(s, x) for s in states])
        Q = (V * w) @ V.T
        W = (V * (w * 1j / r)) @ V.T
        out.append((Q, W))
    (Q1, W1), (Q2, W2) = out
    dq = np.max(np.abs(Q2 - Q1)) / max(np.max(np.abs(Q2)), 1e-300)
    dw = np.max(np.abs(W2 - W1)) / max(np.max(np.abs(W2)), 1e-300)
    delta = float(max(dq, dw))
    if delta > qtol:
        raise QuadratureNotConverged(
            f"Gram matrices moved by rel {delta:.3e} on node doubling")
    return Q2, W2, delta


def build_basis(params: ModelParams, N_min: int, n_states: int,
                branch: int = -1, quad: QuadratureSpec | None = None,
                parity: QuasiParity = QuasiParity.EVEN, qtol: float = 1e-8,
                reality_tol: float = 1e-8,
                cond_limit: float = 1e12) -> BasisSet:
    """Construct states N = N_min .. N_min + n_states - 1 and their Grams.

    Every state sits on the same branch of its own charge spectrum
    (default -1, the largest charge, which is strictly increasing in N and
    so guarantees distinct charges for L=2). Degenerate charges across the
    set raise SingularOverlap, as does an equilibrated Gram condition
    number above cond_limit; complex charges propagate from the spectrum
    solver.
    """
    if n_states < 2:
        raise ValueError("a basis needs at least 2 states")
    if N_min < params.L - 1:
        raise ValueError(
            f"N_min must be >= L - 1 = {params.L - 1} for quasi-even bases")
    quad = quad or QuadratureSpec()
    states = tuple(build_state(parity, N, params, branch)
                   for N in range(N_min, N_min + n_states))
    F = np.array([s.F for s in states])
    E = np.array([s.E for s in states])
    gaps = np.abs(F[:, None] - F[None, :])
    np.fill_diagonal(gaps, np.inf)
    min_gap = float(np.min(gaps))
    fscale = max(float(np.max(np.abs(F))), 1.0)
    if min_gap <= 1e-8 * fscale:
        i, j = np.unravel_index(np.argmin(gaps), gaps.shape)
        raise SingularOverlap(
            f"charges for N={states[i].N} and N={states[j].N} coincide "
            f"(gap {min_gap:.3e}); the biorthogonality couplings need "
            f"distinct charges")
    x_max = _resolve_x_max(states, quad)
    base = _nodes_per_panel(x_max, quad)
    n_panels = max(1, int(np.ceil(2.0 * x_max / _PANEL_WIDTH)))
    Qc, Wc, delta = _grams(states, params, x_max, base, qtol)
    for name, M in (("Q", Qc), ("W", Wc)):
        im, re = np.max(np.abs(M.imag)), np.max(np.abs(M.real))
        if im > reality_tol * re:
            raise SingularOverlap(
                f"{name} has imaginary part {im:.3e} vs real scale "
                f"{re:.3e}; the pairing is real only for real charges")
    Q, W = Qc.real.copy(), Wc.real.copy()
    d = 1.0 / np.sqrt(np.abs(np.diag(Q)))
    Qn = Q * d[:, None] * d[None, :]
    cond = float(np.linalg.cond(Qn))
    if cond > cond_limit:
        raise SingularOverlap(
            f"equilibrated Gram condition {cond:.3e} exceeds {cond_limit:g}")
    R = (np.linalg.inv(Qn) * d[:, None]) * d[None, :]
    return BasisSet(parity=parity, params=params, branch=branch,
                    states=states,
                    N_values=np.arange(N_min, N_min + n_states),
                    F=F, E=E, Q=Q, W=W, R=R, cond_Q=cond, min_gap=min_gap,
                    quad_delta=delta, x_max=float(x_max),
                    nodes=2 * base * n_panels, quad=quad)


def biorthogonality_matrix(basis: BasisSet) -> np.ndarray:
    """Per-pair identity defect |(F_M-F_N) W_NM - (E_M-E_N) Q_NM| / scale.

    The diagonal is vacuous (both sides vanish identically) and reported
    as zero.
    """
    dF = basis.F[None, :] - basis.F[:, None]
    dE = basis.E[None, :] - basis.E[:, None]
    res = np.abs(dF * basis.W - dE * basis.Q)
    scale = np.maximum(np.abs(dF * basis.W) + np.abs(dE * basis.Q), 1e-300)
    out = res / scale
    np.fill_diagonal(out, 0.0)
    return out


def biorthogonality_residual(basis: BasisSet) -> float:
    """Worst off-diagonal defect of the exact biorthogonality identity.

    Exact for exact eigenstates, so quadrature is the only error source;
    anything beyond ~10x the quadrature tolerance indicates a broken state
    or a mislabeled charge.
    """
    return float(np.max(biorthogonality_matrix(basis)))


def hamiltonian_matrix(basis: BasisSet, F: float) -> np.ndarray:
    """Pairing matrix of the Hamiltonian at charge F in the state basis.

    H(F) psi_M = E_M psi_M + (F - F_M)(i/r) psi_M, so
    H_NM = (F - F_M) W_NM + E_M Q_NM: the whole F-dependence rides on
    measured data. Symmetry up to quadrature error restates the
    biorthogonality identity; at F = F_M column M is exactly E_M Q_.M.
    """
    return (F - basis.F[None, :]) * basis.W + basis.E[None, :] * basis.Q


def reduced_problem(basis: BasisSet, F: float):
    """Ordinary eigenproblem equivalent to H(F) c = E Q c on the basis.

    Off-diagonal W entries are eliminated through the biorthogonality
    identity, leaving the measured diagonal T_N, the charge ratios, and
    R = inverse(Q):

        M_NJ = (F - F_N) [ T_N R_NJ
               + sum_{K != N} (E_N - E_K)/(F_N - F_K) Q_NK R_KJ ]
               + E_N delta_NJ.

    Returns (M, eigenvalues) with eigenvalues sorted by real part. When F
    equals a basis charge F_N, the F-dependent part of row N vanishes
    identically and E_N is an exact eigenvalue; expansion components p
    recover wavefunctions as psi = sum_mn psi_m R_mn p_n.
    """
    Fv, Ev, Q, R = basis.F, basis.E, basis.Q, basis.R
    dF = Fv[:, None] - Fv[None, :]
    dE = Ev[:, None] - Ev[None, :]
    np.fill_diagonal(dF, 1.0)
    ratio = dE / dF
    np.fill_diagonal(ratio, 0.0)
    core = (ratio * Q) @ R
    core += basis.T[:, None] * R
    M = (F - Fv)[:, None] * core + np.diag(Ev)
    eig = np.linalg.eigvals(M)
    return M, eig[np.argsort(eig.real)]


def energy_sweep(basis: BasisSet, F_values: np.ndarray):
    """Reduced-problem eigenvalues along a charge grid.

    Returns (E_real, max_imag): E_real has one sorted row of real parts
    per F value; max_imag records the worst imaginary magnitude seen, a
    truncation-artifact indicator (the exact spectrum at real F is real).
    """
    F_values = np.asarray(F_values, dtype=float)
    rows = np.empty((len(F_values), basis.size))
    worst = 0.0
    for i, f in enumerate(F_values):
        _, eig = reduced_problem(basis, float(f))
        rows[i] = eig.real
        worst = max(worst, float(np.max(np.abs(eig.imag))))
    return rows, worst
