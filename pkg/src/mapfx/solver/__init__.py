from .constraints import (
    CapChargeCount,
    CapPlanLength,
    CapWaitCount,
    ConstraintError,
    FixTraversal,
    ForbidChargeAt,
    ForbidChargeAtTime,
    ForbidChargeTime,
    ForbidMove,
    ForbidMoveAt,
    ForbidVisit,
    ForbidVisitAt,
    ForbidWait,
    ForbidWaitAt,
    ForbidWaitRun,
    HardConstraint,
    SoftConstraint,
    constraint_from_dict,
)
from .core import (
    KERNEL_COMPILED,
    CostVector,
    Outcome,
    SolveConfig,
    improvement_stream,
    load_interpreted_kernel,
    solve,
    solve_fixed_traversal,
)

__all__ = [
    "CapChargeCount", "CapPlanLength", "CapWaitCount", "ConstraintError",
    "FixTraversal", "ForbidChargeAt", "ForbidChargeAtTime", "ForbidChargeTime",
    "ForbidMove", "ForbidMoveAt", "ForbidVisit", "ForbidVisitAt", "ForbidWait",
    "ForbidWaitAt", "ForbidWaitRun", "HardConstraint", "SoftConstraint",
    "constraint_from_dict", "KERNEL_COMPILED", "CostVector", "Outcome",
    "SolveConfig", "improvement_stream", "load_interpreted_kernel", "solve",
    "solve_fixed_traversal",
]
