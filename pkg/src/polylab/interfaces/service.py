"""JSON-over-HTTP gateway under /v1.

Thin adapters over the Pipeline: responses are deterministic functions
of (snapshot, request, seed) and match the library calls bit for bit.
Malformed input -> 400 with field messages; invalid polymer -> 422;
missing model artifacts -> 503.
"""

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel

from ..agentloop import UnplannableRequestError, plan, run_plan
from ..chemcore import ChemError
from .pipeline import SnapshotMissingError


class PredictRequest(BaseModel):
    psmiles: str
    properties: list


class GenerateRequest(BaseModel):
    property: str
    target: float
    n: int = 8


class AttributeRequest(BaseModel):
    psmiles: str
    property: str


class RetrieveRequest(BaseModel):
    query: str
    k: int = 5
    web: bool = False


class AskRequest(BaseModel):
    text: str


def create_app(pipeline, corpus_manifest=None, connectors=None):
    app = FastAPI(title="polylab gateway", docs_url=None, redoc_url=None)

    if corpus_manifest and pipeline.engine is None:
        from ..evidence import EvidenceEngine, load_manifest

        pipeline.engine = EvidenceEngine().build(
            load_manifest(corpus_manifest))
    toolset = pipeline.toolset(connectors=connectors)

    @app.exception_handler(RequestValidationError)
    async def malformed(request: Request, exc):
        fields = [{"field": ".".join(str(p) for p in err["loc"]),
                   "message": err["msg"]} for err in exc.errors()]
        return JSONResponse(status_code=400,
                            content={"error": "malformed-input",
                                     "fields": fields})

    @app.exception_handler(ChemError)
    async def invalid_polymer(request: Request, exc):
        return JSONResponse(status_code=422,
                            content={"error": "invalid-polymer",
                                     "message": str(exc)})

    @app.exception_handler(SnapshotMissingError)
    async def missing_snapshot(request: Request, exc):
        return JSONResponse(status_code=503,
                            content={"error": "missing-snapshot",
                                     "message": str(exc)})

    @app.get("/v1/health")
    def health():
        return {"status": "ok",
                "snapshot_hash": pipeline.config.config_hash()}

    @app.post("/v1/predict")
    def predict(req: PredictRequest):
        predictions = pipeline.predict(req.psmiles, req.properties)
        return {"predictions": predictions,
                "render_id": _render_id(req.psmiles)}

    @app.post("/v1/generate")
    def generate(req: GenerateRequest):
        candidates, accepted, report, histogram = pipeline.generate(
            req.property, req.target, req.n)
        return {
            "candidates": [{
                "psmiles": c.psmiles, "seed_index": c.seed_index,
                "oracle_pred": c.oracle_pred, "accepted": c.accepted,
                "rejection_reason": c.rejection_reason,
                "novelty": c.novelty, "predictions": c.predictions,
                "render_id": _render_id(c.psmiles) if c.psmiles else None,
            } for c in candidates],
            "report": report.to_dict(),
            "rejection_histogram": histogram,
        }

    @app.post("/v1/attribute")
    def attribute(req: AttributeRequest):
        amap = pipeline.attribute(req.psmiles, req.property)
        return {**amap.to_dict(), "render_id": _render_id(req.psmiles)}

    @app.post("/v1/retrieve")
    def retrieve(req: RetrieveRequest):
        return pipeline.retrieve(req.query, k=req.k, web=req.web,
                                 connectors=connectors or [])

    @app.post("/v1/agent/ask")
    def ask(req: AskRequest):
        try:
            tool_plan = plan(req.text)
        except UnplannableRequestError as exc:
            return JSONResponse(status_code=422,
                                content={"error": "unplannable-request",
                                         "fragment": exc.fragment})
        response = run_plan(tool_plan, toolset)
        return {"plan": [{"id": s.id, "tool": s.tool,
                          "args": s.arg_dict(), "deps": list(s.deps)}
                         for s in tool_plan.steps],
                **response.to_dict()}

    @app.get("/v1/render/{key}")
    def render(key: str):
        try:
            svg = pipeline.render_by_id(key)
        except KeyError:
            return JSONResponse(status_code=404,
                                content={"error": "unknown-render-id"})
        return Response(content=svg, media_type="image/svg+xml")

    def _render_id(psmiles):
        from .pipeline import render_id

        return render_id(psmiles)

    return app
