"""Case-file IO for planning and scoring runs.

One JSON object per line: id, prompt, required_tools, and optionally
rubric annotator inputs (t_succ, t_used, correctness, eta components,
citation counts).
"""

import json
from dataclasses import dataclass, field

from .rubric import RubricInputs


@dataclass
class Case:
    id: str
    prompt: str
    required_tools: frozenset = frozenset()
    rubric: dict = field(default_factory=dict)

    def rubric_inputs(self, system_id=None):
        r = dict(self.rubric)
        if system_id is not None and system_id in r:
            r = dict(r[system_id])
        return RubricInputs(
            t_req=frozenset(self.required_tools),
            t_succ=frozenset(r.get("t_succ", [])),
            t_used=frozenset(r.get("t_used", [])),
            correctness=r.get("correctness", 0),
            eta_enum=r.get("eta_enum", 0.0),
            eta_toolref=r.get("eta_toolref", 0.0),
            eta_format=r.get("eta_format", 0.0),
            n_cit=r.get("n_cit", 0),
            n_ok=r.get("n_ok", 0),
            citations_requested=r.get("citations_requested", False),
            notes=r.get("notes", ""))


def load_cases(path):
    cases = []
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{line_no}: {exc}") from None
            cases.append(Case(
                id=obj["id"], prompt=obj["prompt"],
                required_tools=frozenset(obj.get("required_tools", [])),
                rubric=obj.get("rubric", {})))
    return cases


def save_cases(path, cases):
    with open(path, "w", encoding="utf-8") as f:
        for case in cases:
            f.write(json.dumps({
                "id": case.id, "prompt": case.prompt,
                "required_tools": sorted(case.required_tools),
                "rubric": case.rubric}, sort_keys=True) + "\n")
