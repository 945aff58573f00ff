"""Optimal multiple assignment maps for secret sharing over general access structures."""

from .access import (
    AccessStructure,
    Multiset,
    ParticipantSet,
    RampAccessStructure,
    SetFamily,
    check_consistency,
    classify_participants,
    downward_closure,
    from_threshold,
    load_structure,
    maximal_sets,
    minimal_sets,
    ramp_check,
    ramp_from_threshold,
    ramp_min_max,
    upward_closure,
)
from .exceptions import (
    AccessStructureError,
    BudgetExceeded,
    CapacityError,
    FieldError,
    MapError,
    MultiAssignError,
    ReconstructionRefused,
    SolverError,
)
from .fixtures import load_fixture
from .ilp import (
    IntegerLinearProgram,
    IpSolution,
    build_ip_avg,
    build_ip_ramp,
    build_ip_worst,
    classify_by_ip,
    optimal_map,
    solution_to_map,
    solve,
    solve_structure,
)
from .lp import Status
from .maps import (
    AssignmentMap,
    RateReport,
    construction2_ramp,
    cumulative_map,
    ideal_partition,
    modified_cumulative_map,
    ramp_cumulative_map,
    rates,
    verify_perfect,
    verify_ramp,
)
from .scheme import distribute, reconstruct, verify_scheme

__version__ = "0.1.0"
