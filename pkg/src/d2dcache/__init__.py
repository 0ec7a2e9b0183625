"""Monte Carlo simulator and analytic bounds for device-to-device caching networks."""

from .caching import (
    ALPHA,
    TheoryParams,
    assign_centralized_topk,
    assign_random_zipf,
    eta,
    solve_gamma_c,
    theory_params,
)
from .errors import (
    GraphTooLargeError,
    InvalidParameterError,
    InvalidRangeError,
    InvariantError,
    NoSolutionError,
    OutOfRegimeWarning,
    OutOfValidityError,
    UnsupportedExponentError,
)
from .harness import (
    FitResult,
    OptimizeResult,
    SimConfig,
    SweepRow,
    TrialResult,
    estimate,
    fit_exponent,
    fit_powerlaw,
    optimize_r,
    run_trial,
    run_trials,
    sweep,
)
from .network import (
    ClusterGrid,
    ClusterState,
    Placement,
    build_cluster_grid,
    cluster_members,
    max_square_members,
    place_nodes,
)
from .popularity import (
    ZipfLaw,
    harmonic_bounds,
    harmonic_sum,
    head_mass,
    head_mass_bound_sublinear,
    head_mass_bounds_gamma1,
    make_zipf,
    reuse_product_sum,
)
from .scheduling import (
    ConflictGraph,
    Schedule,
    blocking_floor,
    build_conflict_graph,
    cluster_schedule,
    cluster_value,
    exact_mis,
    good_clusters,
    greedy_mis,
)
from .theory import (
    Regime,
    azuma_value_tail,
    chernoff_binomial_tail,
    classify,
    conditional_value_mean,
    goodness_lower_bound,
    goodness_upper_bound,
    predicted_el,
    predicted_r_opt,
)
from .traffic import LinkSet, PotentialLink, potential_links, sample_requests, self_served

__version__ = "0.1.0"
