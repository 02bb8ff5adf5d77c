"""Quantum ratchet: a driven, dissipative two-level system with sink.

Simulates the vibron-driven master equation, evaluates the exciton
recombination objectives and maps them over vibron and dephasing parameters.
"""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    UNITS,
    DissipationSpec,
    DriveSpec,
    ModelSpec,
    SinkSpec,
    UnitSystem,
    basis_state,
    convert,
    eigensystem,
    hermitize,
)
from .dynamics import (  # noqa: E402
    dissipator,
    gksl_truncation_check,
    hamiltonian_at,
    rhs,
    sink_term,
    thermal_ratio,
    vibron,
)
from .integrate import (  # noqa: E402
    DivergenceError,
    IntegrationError,
    IntegratorConfig,
    StepSizeError,
    Trajectory,
    beat_amplitude,
    convergence_probe,
    propagate,
)
from .objective import ObjectiveSpec, default_window, flatness, recombination_rate, t_bar  # noqa: E402
from .sweep import (  # noqa: E402
    Minimum,
    SweepAxis,
    SweepError,
    SweepSpec,
    SweepSurface,
    barrier_check,
    find_minima,
    min_over_axis,
    run_sweep,
)
