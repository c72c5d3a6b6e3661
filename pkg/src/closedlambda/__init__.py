"""Probe propagation through a closed-loop three-level medium driven by an
optical drive and a microwave field (phase-controlled EIT)."""
from .errors import (
    ClosedLambdaError,
    ConfigError,
    DegenerateDenominatorError,
    InsufficientDataError,
    ResonantDenominatorError,
    SingularLiouvillianError,
    ValidationError,
)
from .experiment import (
    PhaseScan,
    Polarization,
    SinusoidFit,
    Spectrum,
    apply_polarization,
    fit_sinusoid,
    peak_amplitude,
    scan_detuning,
    scan_position,
)
from .model import (
    AtomParams,
    CellGeometry,
    CoherenceSet,
    DecayModel,
    DensityMatrix,
    FieldParams,
    compute_coupling_constant,
    full_steady_state,
    gamma_complex,
    weak_probe_coherence,
    weak_probe_coherences,
)
from .propagation import (
    PropagationResult,
    absorption_coefficient,
    full_coherence_source,
    propagate_closed_form,
    propagate_general,
    propagate_ode,
)

__version__ = "0.1.0"
