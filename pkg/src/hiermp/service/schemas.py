"""Request/response bodies for the placement service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class PlaceOptions(BaseModel):
    """Engine knobs; defaults mirror the library defaults."""

    num_level: int = 2
    level_ratio: float = 10.0
    num_segment: int = 4
    epsilon_net: float = 50.0
    num_hop_thr: int = 4
    min_ar: float = 0.33
    tiny_thr: int = 50
    macro_halo: float = 0.0
    sa_moves: int = 500
    sa_iters: int = 200
    sa_workers: int = 10
    seed: int = 0
    w_area: float = 0.1
    w_wl: float = 1.0
    w_outline: float = 10.0
    w_bias: float = 0.05
    w_blockage: float = 10.0
    w_guidance: float = 1.0
    w_notch: float = 1.0
    pin_access_depth: float | None = None
    notch_min_dim: float | None = None
    max_trials: int = 152

    def weights(self) -> tuple[float, ...]:
        return (
            self.w_area,
            self.w_wl,
            self.w_outline,
            self.w_bias,
            self.w_blockage,
            self.w_guidance,
            self.w_notch,
        )


class PlaceRequest(BaseModel):
    netlist: str = Field(description="netlist file text")
    library: str = Field(description="cell/macro library file text")
    floorplan: str = Field(description="floorplan file text")
    options: PlaceOptions = Field(default_factory=PlaceOptions)
    svg: bool = False
    svg_level: int = 1


class PlaceResponse(BaseModel):
    placement: str
    metrics: str
    metrics_values: dict[str, str]
    svg: str | None = None


class GenerateRequest(BaseModel):
    num_macros: int
    macro_dims: list[list[float]] | None = None
    hier_depth: int = 3
    fanout: int = 4
    seed: int = 0
    util: float = 0.62
    io_per_side: int = 4


class GenerateResponse(BaseModel):
    files: dict[str, str]


class RenderRequest(BaseModel):
    placement: str
    floorplan: str | None = None


class RenderResponse(BaseModel):
    svg: str


class HealthResponse(BaseModel):
    status: str
    version: str
