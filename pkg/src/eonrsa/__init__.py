"""Throughput-maximizing routing and spectrum allocation for elastic optical
networks, solved by nested column generation over configuration columns."""

from .errors import (
    CapExceeded,
    ConflictDetected,
    EonRsaError,
    InvalidConfiguration,
    InvariantViolation,
    LimitsExceeded,
    ParseError,
    UnknownId,
    UnknownNode,
)
from .guardband import (
    DerivedRequest,
    build_extended_rmp,
    derived_pricing_requests,
    enumerate_derived,
    solve_extended,
)
from .instance import (
    Instance,
    Request,
    aggregate_per_node_pair,
    generate_icton_style,
    generate_inoc_style,
    load_instance,
    save_instance,
)
from .lpsolver import LpSolution, MipSolution, Model, SolveStatus, VarKind
from .master import (
    Configuration,
    Lightpath,
    MasterDuals,
    PricingRequest,
    ProvisioningPlan,
    RestrictedMaster,
    validate_configuration,
)
from .oracle import OracleLimits, OracleSolution, oracle_max_reduced_cost, oracle_solve, verify_plan
from .pricing import (
    PricingDuals,
    PricingResult,
    eligible_requests,
    generate_lightpath,
    master_reduced_cost,
    path_reduced_cost,
    price_slot,
)
from .solver import Metrics, SolveConfig, SolveReport, certify, report_metrics, solve
from .topology import (
    BUILTIN_TOPOLOGIES,
    Path,
    Topology,
    builtin_topology,
    enumerate_simple_paths,
    load_topology,
    save_topology,
    shortest_path,
)

__version__ = "0.1.0"
