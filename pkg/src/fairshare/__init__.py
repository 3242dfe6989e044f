"""Distributed consensus ADMM for multi-path alpha-fair bandwidth allocation."""

__version__ = "0.1.0"

from .admm import (
    IterationTrace,
    SolverState,
    StopRule,
    apply_event,
    feasible_point,
    init_state,
    iterate,
    residuals,
    solve,
)
from .fairness import alpha_utility, positive_root, project_simplex, prox_request, prox_request_l1
from .instance import (
    Instance,
    Link,
    Partition,
    Path,
    Request,
    build_incidence,
    read_instance,
    validate,
    write_instance,
)
from .oracle import fairness_certificate, lower_bound_check, solve_reference
from .penalty import lambda_star, penalty_bound
from .topology import (
    generate_barabasi_albert,
    generate_fat_tree,
    generate_requests,
    partition_domains,
    random_ba_instance,
)

__all__ = [
    "Instance", "Link", "Path", "Request", "Partition", "IterationTrace", "SolverState", "StopRule",
    "alpha_utility", "apply_event", "build_incidence", "fairness_certificate", "feasible_point",
    "generate_barabasi_albert", "generate_fat_tree", "generate_requests", "init_state", "iterate",
    "lambda_star", "lower_bound_check", "partition_domains", "penalty_bound", "positive_root",
    "project_simplex", "prox_request", "prox_request_l1", "random_ba_instance", "read_instance",
    "residuals", "solve", "solve_reference", "validate", "write_instance",
]
