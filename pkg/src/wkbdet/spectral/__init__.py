"""Eigenvalues, zeta functions and spectral determinants."""
from .harmonic import harmonic_det, harmonic_levels, harmonic_log_det, harmonic_value
from .recessive import (
    KAPPA,
    check_sector,
    det_complex,
    recalibrate,
    recessive_solution,
    sector_theta,
)
from .spectrum import eigenvalues, model_energy, turning_point, weyl_model
from .types import DeterminantValue, DetMethod, Parity, ParitySpectrum, RecessiveSolution, WeylModel
from .zeta import (
    canonical_action,
    classical_log_det,
    coupling_rescale_log_factor,
    det_entire,
    log_det,
    residue,
    spectrum_for,
    symanzik_rescale,
    zeta,
)

__all__ = [
    "KAPPA", "DetMethod", "DeterminantValue", "Parity", "ParitySpectrum", "RecessiveSolution",
    "WeylModel", "canonical_action", "check_sector", "classical_log_det",
    "coupling_rescale_log_factor", "det_complex", "det_entire", "eigenvalues", "harmonic_det",
    "harmonic_levels", "harmonic_log_det", "harmonic_value", "log_det", "model_energy",
    "recalibrate", "recessive_solution", "residue", "sector_theta", "spectrum_for",
    "symanzik_rescale", "turning_point", "weyl_model", "zeta",
]
