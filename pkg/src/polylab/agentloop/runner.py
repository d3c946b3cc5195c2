"""Plan execution and grounded response assembly.

Independent steps run concurrently per dependency wave; results join
before assembly. Every numerical claim in the response text references
the tool output the number came from; retrieval-derived statements
carry citations; missing support becomes an explicit evidence gap.
"""

import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

_NUMERAL_RE = re.compile(r"[-+]?\d+(?:\.\d+)?(?:[eE][-+]?\d+)?")


def fmt(value):
    """Canonical number rendering shared by claim text and provenance."""
    return f"{float(value):.6g}"


def extract_numerals(text):
    return _NUMERAL_RE.findall(text)


@dataclass
class Claim:
    text: str
    kind: str                    # "numerical" | "mechanistic"
    tool_ref: str = None         # step id
    citation_refs: tuple = ()    # indices into the citation list
    values: tuple = ()           # provenance strings for every numeral
    gap: bool = False


@dataclass
class GroundedResponse:
    request: str
    sections: dict = field(default_factory=lambda: {
        "diagnosis": [], "proposals": [], "verification_plan": []})
    claims: list = field(default_factory=list)
    citations: list = field(default_factory=list)
    evidence_gaps: list = field(default_factory=list)
    step_status: dict = field(default_factory=dict)
    step_outputs: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "request": self.request,
            "sections": self.sections,
            "claims": [vars(c) for c in self.claims],
            "citations": self.citations,
            "evidence_gaps": self.evidence_gaps,
            "step_status": self.step_status,
        }


def _waves(plan):
    remaining = {s.id: set(s.deps) for s in plan.steps}
    done = set()
    order = []
    while remaining:
        ready = sorted(sid for sid, deps in remaining.items()
                       if deps <= done)
        if not ready:
            raise ValueError("dependency cycle in plan")
        order.append([plan.step(sid) for sid in ready])
        done.update(ready)
        for sid in ready:
            del remaining[sid]
    return order


def _execute(plan, toolset):
    outputs = {}
    status = {}

    def run_step(step):
        args = step.arg_dict()
        if "from_step" in args:
            upstream = outputs.get(args.pop("from_step")) or {}
            args["candidates"] = upstream.get("candidates", [])
        tool = getattr(toolset, step.tool)
        return tool(**args)

    for wave in _waves(plan):
        if len(wave) == 1:
            runs = [(wave[0], _try(run_step, wave[0]))]
        else:
            with ThreadPoolExecutor(max_workers=len(wave)) as pool:
                futures = [(step, pool.submit(_try, run_step, step))
                           for step in wave]
                runs = [(step, fut.result()) for step, fut in futures]
        for step, (ok, payload) in runs:
            if ok:
                outputs[step.id] = payload
                status[step.id] = {"ok": True}
            else:
                outputs[step.id] = None
                status[step.id] = {"ok": False, "error": payload}
    return outputs, status


def _try(fn, step):
    try:
        return True, fn(step)
    except Exception as exc:
        return False, f"{type(exc).__name__}: {exc}"


def run_plan(plan, toolset):
    """Execute the plan and assemble a grounded response."""
    outputs, status = _execute(plan, toolset)
    resp = GroundedResponse(request=plan.request)
    resp.step_status = status
    resp.step_outputs = outputs

    citation_index = {}

    def cite(citation):
        key = (citation.get("identifier") or citation.get("title"), )
        if key not in citation_index:
            citation_index[key] = len(resp.citations)
            resp.citations.append(citation)
        return citation_index[key]

    for step in plan.steps:
        out = outputs.get(step.id)
        if out is None:
            resp.evidence_gaps.append(
                f"step {step.id} ({step.tool}) unavailable: "
                f"{status[step.id].get('error', 'failed')}")
            continue
        if step.tool == "predict":
            for item in out.get("predictions", []):
                value = fmt(item["value"])
                text = (f"Predicted {item['property']} of "
                        f"{item['psmiles']}: {value}"
                        + (f" {item['units']}" if item.get("units") else ""))
                resp.sections["diagnosis"].append(text)
                values = (value, *extract_numerals(item["psmiles"]))
                resp.claims.append(Claim(text=text, kind="numerical",
                                         tool_ref=step.id,
                                         values=values))
        elif step.tool == "generate":
            for rank, cand in enumerate(out.get("candidates", []), 1):
                pred = fmt(cand["oracle_pred"])
                flag = "accepted" if cand["accepted"] else "rejected"
                text = (f"Candidate {fmt(rank)}: {cand['psmiles']} "
                        f"(oracle {pred}, {flag})")
                resp.sections["proposals"].append(text)
                values = (fmt(rank), pred,
                          *extract_numerals(cand["psmiles"]))
                resp.claims.append(Claim(text=text, kind="numerical",
                                         tool_ref=step.id,
                                         values=values))
        elif step.tool in ("retrieve_local", "retrieve_web"):
            hits = out.get("chunks", [])
            if not hits:
                note = (f"No supporting passages retrieved for "
                        f"{step.arg_dict().get('query', '')!r}; "
                        f"statement support is an evidence gap.")
                resp.evidence_gaps.append(note)
                continue
            for hit in hits:
                idx = cite(hit["citation"])
                quoted = hit["text"][:160]
                text = f"Evidence: \"{quoted}\" [{fmt(idx + 1)}]"
                resp.sections["diagnosis"].append(text)
                values = (fmt(idx + 1), *extract_numerals(quoted))
                resp.claims.append(Claim(text=text, kind="mechanistic",
                                         tool_ref=step.id,
                                         citation_refs=(idx,),
                                         values=values))
        elif step.tool == "attribute":
            n_high = fmt(len(out.get("highlights", [])))
            psmiles = step.arg_dict()["psmiles"]
            text = (f"Attribution for {psmiles}: "
                    f"{n_high} highlighted atoms")
            resp.sections["diagnosis"].append(text)
            values = (n_high, *extract_numerals(psmiles))
            resp.claims.append(Claim(text=text, kind="numerical",
                                     tool_ref=step.id, values=values))
        elif step.tool == "render":
            resp.sections["diagnosis"].append(
                "Structure depiction attached.")

    prop_steps = [s for s in plan.steps
                  if s.tool in ("predict", "generate")
                  and outputs.get(s.id)]
    if prop_steps:
        resp.sections["verification_plan"] = [
            "Verify candidate properties with the measurement standard "
            "for each target property.",
            "Re-run prediction on synthesized structures and compare "
            "against tool outputs before acceptance.",
        ]
    return resp
