"""Simulation toolkit for SSH chains carrying a single non-Hermitian defect."""

from .analytic import (
    clean_zero_mode,
    pt_right_edge_mode_at_gamma_c,
    relocated_zero_mode_at_gc,
    verify_no_real_zero_at_gamma_c,
    zero_mode_oracle,
)
from .dynamics import EvolutionRecord, delta_excitation, localization_score, propagate
from .lattice import DefectKind, DefectSpec, InvalidSpecError, LatticeSpec, build_hamiltonian, validate_spec
from .profiles import ModeProfile
from .spectral import (
    EPReport,
    ModeClassification,
    Spectrum,
    SweepTable,
    classify_modes,
    eigendecompose,
    locate_exceptional_point,
    sweep_defect_strength,
    zero_mode_profile,
)

__version__ = "0.1.0"
