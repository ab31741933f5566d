"""Alpha- and Renyi-divergences between finite measures, their tight lower
bounds under mean/variance constraints, and numerical verifiers."""

__version__ = "0.1.0"

from .bounds import (
    BinaryPair,
    BoundReport,
    alpha_lower_bound,
    binary_pair_from_moments,
    chi2_bound_closed_form,
    hellinger_bound_closed_form,
    renyi_lower_bound,
)
from .divergences import (
    alpha_divergence,
    binary_alpha_divergence,
    binary_renyi_divergence,
    f_divergence,
    kl_divergence,
    renyi_divergence,
)
from .errors import AlphaDivError
from .measures import (
    DiscreteMeasure,
    MeasurePair,
    MomentSpec,
    make_measure,
    make_pair,
    mixture,
    moments,
    point_mass,
)
from .oracle import (
    SearchConfig,
    SearchResult,
    counterexample_alpha_lt_minus1,
    equal_means_sequence,
    lemma5_scan,
    min_search,
    weights_for_support,
)
from .relations import (
    RelationResidual,
    check_diff_relation_bwd,
    check_diff_relation_fwd,
    check_integral_relation,
    check_integral_relation_bwd,
    small_t_order,
)
