"""FastAPI application exposing the placement engine.

Routes take file contents (not paths) so the service can run anywhere;
the CLI is a thin client that reads and writes local files around these
calls.  Error mapping: malformed inputs give 422, a design with no valid
floorplan gives 409 with the best failing attempt attached.
"""

from __future__ import annotations

import math
from types import SimpleNamespace

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..io import (
    DesignInputError,
    parse_design_text,
    parse_floorplan,
    parse_metrics,
    parse_placement,
    svg_text,
)
from ..pipeline import (
    NoValidFloorplanError,
    RunConfig,
    generate_benchmark,
    place_design,
)
from ..io import format_metrics, format_placement
from .schemas import (
    GenerateRequest,
    GenerateResponse,
    HealthResponse,
    PlaceRequest,
    PlaceResponse,
    RenderRequest,
    RenderResponse,
)


def _config_from(req: PlaceRequest) -> RunConfig:
    o = req.options
    return RunConfig(
        num_level=o.num_level,
        level_ratio=o.level_ratio,
        num_segment=o.num_segment,
        epsilon_net=o.epsilon_net,
        num_hop_thr=o.num_hop_thr,
        min_ar=o.min_ar,
        tiny_thr=o.tiny_thr,
        macro_halo=o.macro_halo,
        sa_moves=o.sa_moves,
        sa_iters=o.sa_iters,
        sa_workers=o.sa_workers,
        seed=o.seed,
        weights=o.weights(),
        pin_access_depth=o.pin_access_depth,
        notch_min_dim=o.notch_min_dim,
        max_trials=o.max_trials,
    )


def create_app() -> FastAPI:
    app = FastAPI(title="hiermp", version=__version__)

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/place", response_model=PlaceResponse)
    def place(req: PlaceRequest) -> PlaceResponse:
        try:
            db = parse_design_text(req.netlist, req.library, req.floorplan)
            config = _config_from(req)
        except (DesignInputError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        try:
            result, hierarchy = place_design(db, config)
        except NoValidFloorplanError as exc:
            # non-finite floats are not JSON encodable
            best = {
                k: (None if isinstance(v, float) and not math.isfinite(v) else v)
                for k, v in exc.best.items()
            }
            raise HTTPException(
                status_code=409, detail={"message": str(exc), "best": best}
            ) from exc
        svg = None
        if req.svg:
            try:
                svg = svg_text(hierarchy, result, level=req.svg_level, db=db)
            except ValueError as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from exc
        metrics = format_metrics(result.metrics)
        return PlaceResponse(
            placement=format_placement(result),
            metrics=metrics,
            metrics_values=parse_metrics(metrics),
            svg=svg,
        )

    @app.post("/generate", response_model=GenerateResponse)
    def generate(req: GenerateRequest) -> GenerateResponse:
        try:
            files = generate_benchmark(req.model_dump())
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return GenerateResponse(files=files)

    @app.post("/render", response_model=RenderResponse)
    def render(req: RenderRequest) -> RenderResponse:
        try:
            result = parse_placement(req.placement)
            db = None
            if req.floorplan is not None:
                # only canvas geometry is needed; skip netlist linking
                canvas, _, _ = parse_floorplan(req.floorplan, "<floorplan>")
                db = SimpleNamespace(canvas=canvas, instances={})
            return RenderResponse(svg=svg_text(None, result, db=db))
        except (DesignInputError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc

    return app


app = create_app()
