"""phasekit: phase operators on truncated Fock spaces.

Coherent-state-integral (Turski) phase operator, the displaced log-series
construction, Husimi-Q phase moments and a Pegg-Barnett baseline.
"""

from phasekit.errors import (
    ConvergenceError,
    DimensionError,
    IntegrationError,
    PhasekitError,
    PhasekitWarning,
    StateSpecError,
    TruncationError,
    ValidationError,
)
from phasekit.fock import (
    OperatorMatrix,
    PhaseWindow,
    TruncatedState,
    coherent_overlap,
    displacement_matrix,
    elementary_operators,
    load_state,
    make_coherent_state,
    make_fock_state,
    q_function,
    save_state,
    superpose,
)
from phasekit.quadrature import (
    MomentReport,
    PhaseDistribution,
    PolarGrid,
    build_polar_grid,
    integrate_polar,
    moments_from_marginal,
    phase_marginal,
)
from phasekit.turski import (
    EvolutionConfig,
    acid_test,
    build_exp_phase_operator,
    build_moment_operator,
    build_phase_operator_analytic,
    build_phase_operator_quadrature,
    evolve_phase_operator,
    operator_expectation_moments,
    phase_moments_q,
    unitarity_defect,
)
from phasekit.logseries import LogSeriesConfig, build_log_series_operator, equivalence_report
from phasekit.pegg_barnett import PBConfig, pb_distribution, pb_moments, pb_phase_operator

__version__ = "0.1.0"
