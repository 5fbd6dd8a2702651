"""Algebraic and numerical tools for reversible Markov chains on graphs."""
from .cycles import (
    Cycle,
    LatticeElement,
    conformal_decompose,
    cycle_from_vector,
    cycle_vector,
    enumerate_cycles,
    graver_basis,
    in_cycle_lattice,
    is_conformal,
    lattice_basis,
    verify_graver_minimality,
)
from .errors import *  # noqa: F401,F403
from .graph import (
    ModelMatrix,
    StructureGraph,
    all_proper_subsets,
    build_graph,
    cocycle_matrix,
    cocycle_vector,
    default_family,
    edge_arc_matrix,
    incidence_matrix,
    model_matrix,
)
from .kolmogorov import (
    Binomial,
    ReversibilityCertificate,
    Verdict,
    certify_reversibility,
    check_detailed_balance,
    check_kolmogorov_exhaustive,
    cycle_binomial,
    evaluate_binomial,
    syzygy,
    toric_membership,
)
from .markov import (
    ChainPath,
    empirical_reversibility_test,
    invariant_distribution,
    sample_reversible,
    simulate_chain,
    spectral_check,
    symmetrize,
)
from .parameterization import (
    JointDistribution,
    ReversibleParams,
    ThetaVector,
    feasibility_report,
    from_pi_s,
    from_st_params,
    kappa_from_t,
    metropolize,
    random_walk_joint,
    theta_to_pi,
    theta_to_transition,
    to_st_params,
    transition_to_theta,
)
from .transition import TransitionMatrix

__version__ = "0.1.0"
