"""Cooperative single-photon emission from disordered atomic clouds."""

from .cloud import (
    AtomicCloud,
    CloudParams,
    cloud_params_from_dict,
    max_pair_distance,
    min_pair_distance,
    pair_distances,
    sample_cloud,
    write_positions_csv,
)
from .dicke import DickeBasis, DickeProjection, build_basis, project, symmetry_check
from .dynamics import (
    AfterglowRate,
    AfterglowState,
    AmplitudeState,
    PerturbativeModel,
    PerturbativeSolution,
    afterglow_state,
    analytic_mixing_amplitude,
    build_perturbative_model,
    collective_rate,
    evolve,
    gamma_r,
    initial_state,
    pair_kernel_rates,
    solve_perturbative,
)
from .errors import (
    ConfigError,
    FrameMismatchError,
    NormalizationError,
    NumericalDecompositionError,
    ParameterError,
)
from .kernel import (
    DecayMatrix,
    build_decay_matrix,
    decay_matrix_retarded,
    kernel_F,
    kernel_matrix,
    sinc,
    sinc_matrix,
    sphere_quadrature,
)
from .observables import (
    AngularPattern,
    DirectionGrid,
    EnsembleReport,
    ExponentFit,
    PointStats,
    RateFit,
    SweepSpec,
    angular_pattern,
    fit_rate,
    scaling_sweep,
    sphere_grid,
    survival_probability,
)

__version__ = "0.1.0"
