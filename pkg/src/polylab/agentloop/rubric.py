"""Five-metric per-case scoring rubric and aggregation.

Fractions convert to 0-10 integers by half-up rounding, clamped into
[0, 10]. Correctness is annotator-banded and never auto-assigned.
"""

import math
from dataclasses import dataclass, field

METRICS = ("tool_use", "completeness", "correctness", "helpfulness",
           "citation_accuracy")
LOW_DEFAULT_MISSING_CITATIONS = 0    # within the 0-2 band


def round_half_up(x):
    return int(math.floor(x + 0.5))


def to_score(fraction):
    """round(10 * fraction), half-up, clamped to [0, 10]."""
    return max(0, min(10, round_half_up(10.0 * fraction)))


@dataclass
class RubricInputs:
    t_req: frozenset
    t_succ: frozenset
    t_used: frozenset
    correctness: int
    eta_enum: float
    eta_toolref: float
    eta_format: float
    n_cit: int
    n_ok: int
    citations_requested: bool = False
    notes: str = ""


@dataclass
class ScoreCard:
    case_id: str
    system_id: str
    metrics: dict = field(default_factory=dict)   # name -> {fraction, score}
    notes: str = ""
    flags: list = field(default_factory=list)

    def score(self, name):
        return self.metrics[name]["score"]

    def to_row(self):
        return [self.case_id, self.system_id] + [
            str(self.metrics[m]["score"]) for m in METRICS]


def score_case(case_id, system_id, inputs):
    card = ScoreCard(case_id=case_id, system_id=system_id,
                     notes=inputs.notes)

    if len(inputs.t_req) == 0:
        tool_frac = 1.0
        comp_frac = 1.0
        card.flags.append("no-required-tools")
    else:
        if not inputs.t_succ <= inputs.t_req:
            raise ValueError("t_succ must be a subset of t_req")
        tool_frac = len(inputs.t_succ) / len(inputs.t_req)
        comp_frac = len(inputs.t_used & inputs.t_req) / len(inputs.t_req)
    card.metrics["tool_use"] = {"fraction": tool_frac,
                                "score": to_score(tool_frac)}
    card.metrics["completeness"] = {"fraction": comp_frac,
                                    "score": to_score(comp_frac)}

    correctness = max(0, min(10, int(inputs.correctness)))
    card.metrics["correctness"] = {"fraction": correctness / 10.0,
                                   "score": correctness}

    for eta in (inputs.eta_enum, inputs.eta_toolref, inputs.eta_format):
        if not 0.0 <= eta <= 1.0:
            raise ValueError(f"eta component {eta} outside [0, 1]")
    helpful = (0.4 * inputs.eta_enum + 0.3 * inputs.eta_toolref
               + 0.3 * inputs.eta_format)
    card.metrics["helpfulness"] = {"fraction": helpful,
                                   "score": to_score(helpful)}

    if inputs.n_cit > 0:
        cit_frac = inputs.n_ok / inputs.n_cit
        cit_score = to_score(cit_frac)
    elif inputs.citations_requested:
        cit_score = max(0, min(2, LOW_DEFAULT_MISSING_CITATIONS))
        cit_frac = cit_score / 10.0
        card.flags.append("citations-requested-but-absent")
    else:
        cit_frac = 1.0
        cit_score = 10
        card.flags.append("no-citations-expected")
    card.metrics["citation_accuracy"] = {"fraction": cit_frac,
                                         "score": cit_score}
    return card


def aggregate_scores(cards):
    """Per-system per-metric means plus radar-plot data rows."""
    if not cards:
        raise ValueError("need at least one score card")
    systems = {}
    for card in cards:
        systems.setdefault(card.system_id, []).append(card)
    summary = {}
    for system, group in sorted(systems.items()):
        summary[system] = {
            metric: sum(c.score(metric) for c in group) / len(group)
            for metric in METRICS}
    radar = [{"system": system, **vals}
             for system, vals in summary.items()]
    return {"means": summary, "radar": radar,
            "n_cases": {s: len(g) for s, g in systems.items()}}


def cards_to_tsv(cards):
    """Scoring-sheet export: metric, score, notes, per system."""
    lines = ["case_id\tsystem\tmetric\tscore\tfraction\tnotes"]
    for card in cards:
        for metric in METRICS:
            entry = card.metrics[metric]
            lines.append("\t".join([
                card.case_id, card.system_id, metric,
                str(entry["score"]), repr(entry["fraction"]),
                card.notes]))
    return "\n".join(lines) + "\n"
