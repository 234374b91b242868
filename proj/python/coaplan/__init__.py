"""Course-of-action planning engine."""

from ._coaplan import (
    EditError,
    Error,
    KnowledgeBase,
    ParseError,
    Plan,
    PlanConfig,
    PlanningError,
    Scenario,
    SchemaError,
    Service,
    ValidationError,
    import_plan,
    lint_kb,
    period_label,
    plan,
    replan,
    utilization,
    validate_scenario,
    wargame,
)

__all__ = [
    "EditError",
    "Error",
    "KnowledgeBase",
    "ParseError",
    "Plan",
    "PlanConfig",
    "PlanningError",
    "Scenario",
    "SchemaError",
    "Service",
    "ValidationError",
    "import_plan",
    "lint_kb",
    "period_label",
    "plan",
    "replan",
    "utilization",
    "validate_scenario",
    "wargame",
]
