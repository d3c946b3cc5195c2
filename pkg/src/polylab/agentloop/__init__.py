"""Tool-routing controller, grounded responses, attribution, rubric."""

from .attribution import (
    HIGHLIGHT_ALPHA,
    HIGHLIGHT_BETA,
    HIGHLIGHT_CAP,
    AttributionMap,
    occlude_atom,
    occlusion_attribution,
    select_highlights,
)
from .cases import Case, load_cases, save_cases
from .planner import PlanStep, ToolPlan, UnplannableRequestError, plan
from .rubric import (
    METRICS,
    RubricInputs,
    ScoreCard,
    aggregate_scores,
    cards_to_tsv,
    round_half_up,
    score_case,
    to_score,
)
from .runner import Claim, GroundedResponse, extract_numerals, fmt, run_plan

__all__ = [
    "AttributionMap", "Case", "Claim", "GroundedResponse",
    "HIGHLIGHT_ALPHA", "HIGHLIGHT_BETA", "HIGHLIGHT_CAP", "METRICS",
    "PlanStep", "RubricInputs", "ScoreCard", "ToolPlan",
    "UnplannableRequestError", "aggregate_scores", "cards_to_tsv",
    "extract_numerals", "fmt", "load_cases", "occlude_atom",
    "occlusion_attribution", "plan", "round_half_up", "run_plan",
    "save_cases", "score_case", "select_highlights", "to_score",
]
