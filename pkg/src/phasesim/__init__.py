"""Two-photocurrent phase measurement: Gaussian phase-space models, phase
distributions and a seeded Monte Carlo of the two-step protocol."""

from .circstats import DegenerateDirectionError, circular_mean, circular_std
from .distributions import (
    EnergyBudget,
    FockDensityMatrix,
    InfeasibleBudgetError,
    PhaseDensity,
    PhaseGrid,
    closed_form_density,
    coherent_fock,
    fock_marginal,
    marginal_by_quadrature,
    marginal_closed_form,
    marginal_density,
    numeric_width,
    peak_width,
    step1_width,
    step2_width,
)
from .phasespace import (
    GaussianModel,
    PlaneGrid,
    ProbeParams,
    SqueezedSignalParams,
    composed_model,
    q_variances,
)
from .simulate import (
    PhaseHistogram,
    TwoStepResult,
    histogram,
    phases_of,
    run_step,
    sample_outcomes,
    scaling_sweep,
    two_step,
)

__version__ = "0.1.0"
