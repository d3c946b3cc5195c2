"""Deterministic rule-based request planner.

Intent keywords map to typed tool steps with explicit data
dependencies; identical request text always yields an identical plan.
An external LLM planner can be plugged in behind the same ToolPlan
surface, but every shipped path runs on these rules.
"""

import re
from dataclasses import dataclass, field


class UnplannableRequestError(ValueError):
    def __init__(self, fragment):
        super().__init__(
            f"no tool intent matched request fragment: {fragment!r}")
        self.fragment = fragment


@dataclass(frozen=True)
class PlanStep:
    id: str
    tool: str          # predict | generate | retrieve_local | retrieve_web
    #                  | attribute | render
    args: tuple        # sorted (key, value) pairs; hashable and ordered
    deps: tuple = ()

    def arg_dict(self):
        return dict(self.args)


@dataclass(frozen=True)
class ToolPlan:
    request: str
    steps: tuple = ()

    def step(self, step_id):
        for s in self.steps:
            if s.id == step_id:
                return s
        raise KeyError(step_id)


_PSMILES_RE = re.compile(r"\[\*\]\S*\[\*\]")
_PROPERTY_WORDS = [
    ("tg", "Tg"), ("glass transition", "Tg"),
    ("tm", "Tm"), ("melting", "Tm"),
    ("td", "Td"), ("decomposition", "Td"),
    ("density", "density"), ("rho", "density"),
]
_TARGET_RE = re.compile(
    r"(?:=|near|around|target(?:ing)?(?: of)?|at)\s*"
    r"([-+]?\d+(?:\.\d+)?)\s*k?\b", re.IGNORECASE)
_COUNT_RE = re.compile(r"(\d+)\s+candidate", re.IGNORECASE)

_GENERATE_WORDS = ("generate", "design", "candidate", "propose", "invent")
_RETRIEVE_WORDS = ("why", "mechanism", "cite", "literature", "reference",
                   "evidence", "paper", "precedent")
_WEB_WORDS = ("web", "recent", "online", "latest", "search the")
_ATTRIBUTE_WORDS = ("highlight", "which atoms", "attribut",
                    "important atoms", "atom-level")
_RENDER_WORDS = ("render", "draw", "depict", "show structure",
                 "show the structure")


def _find_properties(lower):
    found = []
    for word, prop in _PROPERTY_WORDS:
        if re.search(rf"\b{re.escape(word)}\b", lower) and prop not in found:
            found.append(prop)
    return found


def plan(request):
    """Map request text to an ordered, dependency-wired tool plan."""
    if not request or not request.strip():
        raise UnplannableRequestError("")
    lower = request.lower()
    psmiles_match = _PSMILES_RE.search(request)
    psmiles = psmiles_match.group(0) if psmiles_match else None
    properties = _find_properties(lower)
    target_match = _TARGET_RE.search(lower)
    target = float(target_match.group(1)) if target_match else None

    wants_generate = (any(w in lower for w in _GENERATE_WORDS)
                      or (target is not None and properties))
    wants_retrieve = any(w in lower for w in _RETRIEVE_WORDS)
    wants_web = wants_retrieve and any(w in lower for w in _WEB_WORDS)
    wants_attribute = any(w in lower for w in _ATTRIBUTE_WORDS)
    wants_render = any(w in lower for w in _RENDER_WORDS)
    wants_predict = bool(properties and (psmiles or wants_generate))

    steps = []
    n = [0]

    def add(tool, args, deps=()):
        n[0] += 1
        sid = f"s{n[0]}"
        steps.append(PlanStep(id=sid, tool=tool,
                              args=tuple(sorted(args.items())),
                              deps=tuple(deps)))
        return sid

    generate_id = None
    if wants_generate and properties:
        count_match = _COUNT_RE.search(lower)
        n_cand = int(count_match.group(1)) if count_match else 8
        generate_id = add("generate", {
            "property": properties[0],
            "target": target if target is not None else 0.0,
            "n": n_cand})
    predict_id = None
    if wants_predict:
        args = {"properties": tuple(properties)}
        if generate_id:
            args["from_step"] = generate_id
            predict_id = add("predict", args, deps=(generate_id,))
        else:
            args["psmiles"] = psmiles
            predict_id = add("predict", args)
    if wants_retrieve:
        add("retrieve_local", {"query": request.strip()})
    if wants_web:
        add("retrieve_web", {"query": request.strip()})
    if wants_attribute and psmiles:
        prop = properties[0] if properties else "y"
        add("attribute", {"psmiles": psmiles, "property": prop})
    if wants_render and psmiles:
        deps = (predict_id,) if predict_id and generate_id else ()
        add("render", {"psmiles": psmiles}, deps=deps)

    if not steps:
        fragment = request.strip()[:80]
        raise UnplannableRequestError(fragment)
    return ToolPlan(request=request, steps=tuple(steps))
