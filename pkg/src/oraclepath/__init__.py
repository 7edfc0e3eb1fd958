"""Oracle-driven path finding on partially known graphs.

A world pair couples a hidden truth graph with the partial prior an
algorithm starts from; oracle sessions meter every query; the search
procedures find paths, trees and robust subgraphs; the experiment harness
measures how query counts scale with graph size.
"""

from .analysis import (
    AdmissibilityReport,
    RobustAdmissibilityReport,
    ScalingFit,
    admissibility_gamma,
    double_star_success_curve,
    fit_scaling,
    gamma_fixed_point,
    k_birthday_sim,
    robust_admissibility_check,
)
from .graphs import (
    CompleteGraph,
    ComponentLabeling,
    Graph,
    GraphError,
    bfs_path,
    build_graph,
    canonical_edge,
    connected_components,
    internally_k_connected,
    is_simple_path,
    read_edge_list,
    write_edge_list,
)
from .oracles import OracleSession, SessionStats
from .search import (
    BUDGET_EXHAUSTED,
    FOUND,
    NO,
    PRIOR,
    RETRIEVED,
    VERIFIED,
    RobustSubgraph,
    SearchOutcome,
    birag,
    budgeted_cci_search,
    double_bfs,
    generate_then_verify,
    grounded_bidirectional_probe,
    grounding_violations,
    robust_k_routes,
    steiner_connect,
    validate_outcome,
)
from .worlds import (
    DoubleStarParams,
    ErPriorParams,
    MetaGraph,
    NoisyPriorParams,
    PartitionParams,
    WorldPair,
    color_edges,
    contract_components,
    equivalent_readd_probability,
    gen_complete_empty,
    gen_double_star,
    gen_er,
    gen_er_world,
    gen_noisy_prior,
    gen_partitioned,
    load_world,
    save_world,
    subsample_prior,
)

__version__ = "0.1.0"
