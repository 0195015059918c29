"""Runtime-scaling toolkit for sloped transverse-field annealing."""

__version__ = "0.1.0"

from .analysis import (
    EnvelopeFit,
    EnvelopeSummary,
    Extremum,
    OptimalRuntimeResult,
    PowerLawFit,
    PrecisionFit,
    SuccessCurve,
    adiabatic_condition_estimate,
    adiabatic_runtime_threshold,
    critical_time,
    envelope_sweep,
    expected_runtime,
    find_extrema,
    fit_envelope,
    fit_power_law,
    measured_spike_half_width,
    optimal_expected_runtime,
    precision_width,
    runtime_bounds_from_envelopes,
    sample_success_curve,
)
from .errors import (
    DegenerateGroundStateError,
    FitQualityError,
    IntegrationError,
    NotApplicableError,
    SearchError,
)
from .evolution import (
    EvolutionResult,
    evolve,
    evolve_tracked,
    leak_probability,
    propagate,
)
from .hamiltonians import (
    BarrierProblem,
    SlopeProblem,
    Spectrum,
    gap,
    golden_section_minimize,
    hamiltonian,
    min_gap,
    slope_hamiltonian,
    spectrum_at,
    subspace_hamiltonian,
    subspace_tridiagonal,
)
