"""PT-symmetric Aubry-Andre lattice: spectra, thresholds, phase maps, dynamics."""
from ._accel import backend
from .analysis import (
    Extrema,
    Phase,
    PhaseLabel,
    ScalingFit,
    ThresholdResult,
    average_gain,
    breaking_indices,
    classify,
    conjugate_pairs,
    find_threshold,
    phase_of,
    predict_extrema,
    scaling_fit,
)
from .dynamics import IntensityField, boundedness_check, expm, growth_rate, propagate, site_state
from .eigensolver import Spectrum, char_poly_eval, eigenvalues
from .errors import (
    AnalysisError,
    EvaluationError,
    NoCrossingError,
    NumericalError,
    ParameterError,
    PropagationOverflow,
    PTAAError,
    SolverError,
)
from .lattice import (
    LatticeConfig,
    PotentialTerm,
    ReferenceLevel,
    TridiagonalOperator,
    build_hamiltonian,
    build_potential,
    hermitian_reference,
)
from .sweep import SweepJob, run_sweep
from .twopotential import (
    Interaction,
    Interval,
    PhaseBoundary,
    classify_interaction,
    is_reentrant,
    map_boundary,
    reentrance_scan,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
