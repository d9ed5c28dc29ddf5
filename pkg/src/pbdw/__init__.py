"""State estimation combining a reduced background space with a
measurement-informed update space, for noisy local-average observations.

The package provides the discrete ambient space, observation synthesis,
background reduction (POD / strong greedy), variational and kernel update
spaces with their induced inner product, the regularized saddle-point
estimator with its stability eigenproblems, greedy sensor placement, a
priori error bounds, holdout selection of the regularization weight, and a
reproducible experiment driver (``pbdw`` on the command line).
"""

from .analysis import (
    ErrorBudget,
    ValidationReport,
    error_budget,
    holdout_select_xi,
    noise_free_bound,
    relative_error,
    verify_link_identity,
)
from .errors import (
    ConfigError,
    IdentifiabilityError,
    NumericalFailure,
    PBDWError,
    PlacementError,
    RankDeficiencyError,
    StabilityError,
    UnisolvencyError,
)
from .estimator import (
    Estimate,
    PBDWSystem,
    assemble,
    inf_sup,
    inf_sup_with_minimizer,
    solve,
    solve_constrained,
)
from .hilbert import (
    DiscreteSpace,
    Field,
    inner,
    norm,
    orthonormalize,
    project,
    riesz_representer,
)
from .observation import FunctionalSet, NoiseModel, build_functionals, measure
from .placement import GreedyConfig, PlacementResult, random_place, sgreedy_place
from .reduction import BackgroundSpace, SnapshotSet, pod, strong_greedy
from .synthetic import ManifoldSpec, bias_profile, bk_field, true_field
from .update import (
    Generator,
    UpdateSpace,
    build_update,
    interpolate,
    kernel_eval,
    lebesgue_constant,
    modified_inner,
    modified_norm,
)

__version__ = "0.1.0"
