"""Problem parameters, energy formulas, and recurrence-element generators.

Everything downstream (charge matrices, wavefunction coefficients, the
working basis) consumes the three-term recurrence elements defined here.
The radial problem lives on the complex contour r = x - i*epsilon; the
angular-momentum-like label is the odd or even integer L = 2*ell + 1, so
ell may be half-integer.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass


class QuasiParity(enum.Enum):
    """Which of the two independent small-r behaviors the state carries.

    EVEN states lead with power -ell, ODD states with ell + 1. On the
    shifted contour both are admissible; at zero charge, zero shift and
    ell = 0 the labels degenerate to ordinary parity on the line.
    """

    EVEN = "even"
    ODD = "odd"


@dataclass(frozen=True)
class ModelParams:
    """Physical knobs: L = 2*ell + 1, linear-shift strength b, contour offset.

    epsilon is the constant distance by which the coordinate line is pushed
    below the real axis; it must be positive so the contour clears the r = 0
    singularity.
    """

    L: int
    b: float = 0.0
    epsilon: float = 1.0

    def __post_init__(self):
        if not isinstance(self.L, int) or self.L < 1:
            raise ValueError(f"L must be a positive integer, got {self.L!r}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon!r}")

    @property
    def ell(self) -> float:
        return (self.L - 1) / 2.0

    @property
    def centrifugal(self) -> float:
        """Coefficient ell*(ell+1) = (L^2 - 1)/4 of the 1/r^2 term."""
        return (self.L * self.L - 1) / 4.0


@dataclass(frozen=True)
class RecurrenceElements:
    """One row of the three-term system: A*h[n-1] + (beta - F)*h[n] + C*h[n+1]."""

    A: float
    beta: float
    C: float


def recurrence_elements(parity: QuasiParity, n: int, params: ModelParams,
                        E: float) -> RecurrenceElements:
    """Row-n elements of the coefficient recurrence at energy E.

    C depends only on (n, L, parity) and is integer valued; beta collects
    the F-independent part of the diagonal, so the full diagonal entry is
    beta - F.
    """
    if n < 0:
        raise ValueError(f"row index n must be >= 0, got {n}")
    L, b = params.L, params.b
    if parity is QuasiParity.ODD:
        return RecurrenceElements(
            A=b * b + 2 * n + L - E,
            beta=-(2 * n + 1 + L) * b,
            C=(n + 1) * (n + 1 + L),
        )
    return RecurrenceElements(
        A=b * b + 2 * n - L - E,
        beta=-(2 * n + 1 - L) * b,
        C=(n + 1) * (n + 1 - L),
    )


def energy(parity: QuasiParity, N: int, params: ModelParams) -> float:
    """QES energy eigenvalue with N+1 polynomial coefficients.

    Substituting this E into the recurrence gives A(n) = -2*(N + 1 - n) for
    both parities, so A(N+1) = 0 terminates the system; that termination is
    exactly what fixes E.
    """
    if N < 0:
        raise ValueError(f"N must be >= 0, got {N}")
    L, b = params.L, params.b
    if parity is QuasiParity.ODD:
        return 2.0 * N + 2.0 + L + b * b
    return 2.0 * N + 2.0 - L + b * b


def hautot_energy(n: int, L: int, g) -> float | complex:
    """Equidistant level formula 2n + 2 + L - g^2 of the real-line problem.

    Mapping g^2 -> -b^2 (imaginary coupling) reproduces energy(ODD, n, ...):
    the shifted contour problem is that analytic continuation.
    """
    if n < 0 or L < 1:
        raise ValueError("need n >= 0 and L >= 1")
    val = 2 * n + 2 + L - g * g
    if isinstance(val, complex) and val.imag == 0.0:
        return val.real
    return val


def contour_point(x: float, params: ModelParams) -> complex:
    """The contour point r = x - i*epsilon.

    Note i*r = epsilon + i*x has strictly positive real part everywhere on
    the contour, so principal-branch powers (i*r)**s are smooth in x even
    for half-integer s.
    """
    return complex(x, -params.epsilon)
