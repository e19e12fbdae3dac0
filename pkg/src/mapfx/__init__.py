"""mapfx: battery-aware multi-agent path finding with what-if explanations."""

from .model import (
    INTRANSIT,
    AgentPlan,
    AgentSpec,
    GridShorthand,
    Instance,
    ModelError,
    ParseError,
    Plan,
    ValidationError,
    load_instance,
    load_plan,
    plan_to_dict,
    save_instance,
    save_plan,
)
from .semantics import (
    ALL_FAMILIES,
    BATTERY,
    COLLISION_FAMILY,
    GOAL,
    OBSTACLE,
    WAYPOINT,
    ValidationReport,
    ViolationAtom,
    check_battery,
    check_traversal,
    enumerate_violations,
    validate,
)
from .solver import (
    CostVector,
    Outcome,
    SoftConstraint,
    SolveConfig,
    improvement_stream,
    solve,
    solve_fixed_traversal,
)

__version__ = "0.1.0"
