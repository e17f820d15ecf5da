"""Solvable sector of a complex-shifted Coulomb-plus-oscillator model.

The package constructs the finitely many bound states whose radial series
terminates (each at its own eigencharge), cross-checks them with two
independent oracles, and assembles pairing bases for the non-solvable
charges in between.
"""

from .model import (ModelParams, QuasiParity, RecurrenceElements,
                    contour_point, energy, hautot_energy,
                    recurrence_elements)
from .secular import (ChargeMatrix, ChargeSpectrum, ComplexChargesDetected,
                      DivisionByZeroCharge, NegativeRadicand,
                      asymptotic_charges_L3, build_quasi_even_matrix,
                      build_quasi_odd_matrix, charges_closed_L2,
                      eigencharges, elimination_N_L3, elimination_N_L5,
                      factorization_check, secular_det,
                      secular_det_relative)
from .wavefun import (LaurentPoly, QesState, build_state,
                      classify_quasi_parity, coefficients_backward,
                      coefficients_determinant, evaluate_psi,
                      ghost_residual, laurent_eval, prefactor, state_dump,
                      state_from_dict, to_laurent)
from .verify import (NonConvergent, ResidualReport, ShootingResult,
                     batch_mismatch, energy_scan, hamiltonian_residual,
                     matching_point, oracle_suite, shooting_match)
from .basis import (BasisSet, QuadratureNotConverged, QuadratureSpec,
                    SingularOverlap, biorthogonality_matrix,
                    biorthogonality_residual, build_basis,
                    charge_free_apply, contour_pairing, energy_sweep,
                    hamiltonian_matrix, reduced_problem)

__version__ = "0.1.0"

__all__ = [
    "ModelParams", "QuasiParity", "RecurrenceElements", "contour_point",
    "energy", "hautot_energy", "recurrence_elements",
    "ChargeMatrix", "ChargeSpectrum", "ComplexChargesDetected",
    "DivisionByZeroCharge", "NegativeRadicand", "asymptotic_charges_L3",
    "build_quasi_even_matrix", "build_quasi_odd_matrix",
    "charges_closed_L2", "eigencharges", "elimination_N_L3",
    "elimination_N_L5", "factorization_check", "secular_det",
    "secular_det_relative",
    "LaurentPoly", "QesState", "build_state", "classify_quasi_parity",
    "coefficients_backward", "coefficients_determinant", "evaluate_psi",
    "ghost_residual", "laurent_eval", "prefactor", "state_dump",
    "state_from_dict", "to_laurent",
    "NonConvergent", "ResidualReport", "ShootingResult", "batch_mismatch",
    "energy_scan", "hamiltonian_residual", "matching_point", "oracle_suite",
    "shooting_match",
    "BasisSet", "QuadratureNotConverged", "QuadratureSpec",
    "SingularOverlap", "biorthogonality_matrix", "biorthogonality_residual",
    "build_basis", "charge_free_apply", "contour_pairing", "energy_sweep",
    "hamiltonian_matrix", "reduced_problem",
    "__version__",
]
