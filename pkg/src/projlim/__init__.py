"""Random probability measures on the line as projective limits of simplex
laws, with Monte Carlo checks of projectivity, the mean-measure condition
and countable additivity."""
from projlim.errors import ProjlimError
from projlim.families import (
    NIG,
    Dirichlet,
    PolyaTree,
    TabulatedDirichlet,
    dirichlet_log_density,
    family_mean,
    family_params,
    ig_log_density,
)
from projlim.intervals import (
    Grouping,
    Partition,
    QSet,
    SimplexPoint,
    apply_fJI,
    coarsening_of,
    common_refinement,
    is_partition,
    partition_from_text,
    partition_to_text,
    qset_complement,
    qset_intersect,
    qset_normalize,
    qset_union,
)
from projlim.kernels import BACKEND
from projlim.measures import (
    BaseMeasure,
    Charge,
    EmpiricalStep,
    Exponential,
    Gaussian,
    Uniform,
    dyadic_quantile_partition,
    escape_charge,
    phi_I,
)
from projlim.rng import SeededRng
from projlim.samplers import (
    sample_chain,
    sample_dirichlet_marginal,
    sample_ig,
    sample_marginal,
    sample_nig_marginal,
    sample_polya_tree_level,
    stick_breaking_sample,
    stick_breaking_weights,
)
from projlim.stats import ks_two_sample
from projlim.validators import (
    TestReport,
    harris_test,
    make_harris_sequences,
    mean_condition_test,
    projectivity_test,
)

__version__ = "0.1.0"
