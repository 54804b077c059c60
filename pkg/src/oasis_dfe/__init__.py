"""Direct fidelity estimation with Pauli measurements.

Three estimators share one simulator:

* :mod:`~oasis_dfe.grouping` - sorted-insertion grouping and grouped DFE;
* :mod:`~oasis_dfe.oasis_gt` - LP-optimised weights over random local Pauli
  measurements, for arbitrary pure targets;
* :mod:`~oasis_dfe.oasis_st` - closed-form samplers for GHZ and W targets.
"""

from .bench import ExperimentConfig, run_benchmark
from .grouping import (
    EstimateReport,
    EstimationBudget,
    GroupingResult,
    PauliGroup,
    gdfe_estimate,
    gdfe_exact_moments,
    group_target,
    sorted_insertion,
)
from .lp import LpError, solve
from .measurement import make_rng, outcome_distribution
from .oasis_gt import (
    SamplingLaw,
    WeightTable,
    build_pauli_povm,
    exact_moments_gt,
    gt_estimate,
    optimize_weights,
)
from .oasis_st import (
    StructuredTarget,
    exact_moments_st,
    ghz_estimate,
    ghz_group_catalog,
    ghz_variance_bound,
    w_estimate,
    w_group_catalog,
)
from .pauli import PauliString, char_value, char_vector
from .states import depolarize, exact_fidelity, make_ghz, make_haar, make_w

__version__ = "0.1.0"
