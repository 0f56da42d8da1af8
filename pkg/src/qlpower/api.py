"""HTTP JSON service exposing power, sample-size, effect-size, pilot, and
bounded simulation endpoints.

All endpoints are stateless delegations to the library; a request plus its
seed fully determines the response.  Long simulations stream newline-delimited
JSON progress events and end with the full result object.
"""

from __future__ import annotations

import json
import queue
import secrets
import threading
from dataclasses import replace

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, StreamingResponse
from pydantic import BaseModel, Field

from .datagen import CovariateDesign
from .distributions import RngStream, ncp_for_power
from .effectsize import CovariateSample, effect_size_report
from .errors import DomainError, QLPowerError
from .model import ModelSpec
from .planner import PilotMapping, load_pilot_csv, pilot_analyze
from .power import power_at, sample_size
from .simharness import SimScenario, preset_by_name, run_scenario, scenario_presets

__all__ = ["create_app"]

MAX_PILOT_BYTES = 10 * 2**20


class EffectInput(BaseModel):
    """Exactly one of: f2 directly, phi with w_one, or r2."""

    f2: float | None = None
    phi: float | None = None
    w_one: float | None = None
    r2: float | None = None

    def resolve(self) -> tuple[float, dict]:
        given = [k for k in ("f2", "phi", "r2") if getattr(self, k) is not None]
        if len(given) != 1:
            raise DomainError("provide exactly one of f2, phi (with w_one), or r2")
        if self.f2 is not None:
            return self.f2, {"f2": self.f2}
        if self.phi is not None:
            if self.w_one is None:
                raise DomainError("phi requires w_one")
            f2 = self.w_one * self.phi**2 / 4.0
            return f2, {"phi": self.phi, "w_one": self.w_one, "f2_phi": f2}
        if not 0.0 <= self.r2 < 1.0:
            raise DomainError(f"r2 must lie in [0, 1), got {self.r2}")
        f2 = self.r2 / (1.0 - self.r2)
        return f2, {"r2": self.r2, "f2_r": f2}


class PowerRequest(EffectInput):
    df: int = Field(ge=1)
    alpha: float = 0.05
    n: int = Field(ge=1)


class SampleSizeRequest(EffectInput):
    df: int = Field(ge=1)
    alpha: float = 0.05
    power: float = 0.8


class DesignBody(BaseModel):
    rho: float


class EffectSizeRequest(BaseModel):
    model: dict
    design: DesignBody
    mc_size: int = Field(default=10**6, ge=1000, le=10**7)
    include_score: bool = False
    seed: int | None = None


class DeltaRange(BaseModel):
    lo: float = 0.5
    hi: float = 1.5
    points: int = Field(default=21, ge=2, le=201)


class PilotRequest(BaseModel):
    csv: str
    mapping: dict
    alpha: float = 0.05
    power: float = 0.8
    delta: DeltaRange = DeltaRange()


class SimulateRequest(BaseModel):
    preset: str | None = None
    scenario: dict | None = None
    replicates: int | None = Field(default=None, ge=1)
    seed: int | None = None


def create_app(max_replicates: int = 2000, max_concurrent_simulations: int = 2) -> FastAPI:
    app = FastAPI(title="qlpower", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    simulate_slots = threading.Semaphore(max_concurrent_simulations)

    @app.exception_handler(RequestValidationError)
    async def _validation_handler(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={"code": "validation_error", "message": str(exc.errors()[:3])},
        )

    @app.exception_handler(QLPowerError)
    async def _domain_handler(request: Request, exc: QLPowerError):
        return JSONResponse(
            status_code=422,
            content={"code": type(exc).__name__, "message": str(exc)},
        )

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.post("/v1/power")
    def v1_power(req: PowerRequest):
        f2, echo = req.resolve()
        return {
            "power": power_at(f2, req.n, req.df, req.alpha),
            "delta": req.n * f2,
            "echo": {**echo, "df": req.df, "alpha": req.alpha, "n": req.n},
        }

    @app.post("/v1/samplesize")
    def v1_samplesize(req: SampleSizeRequest):
        f2, echo = req.resolve()
        n = sample_size(f2, req.df, req.alpha, req.power)
        return {
            "n": n,
            "delta": ncp_for_power(req.df, req.alpha, req.power),
            "echo": {**echo, "df": req.df, "alpha": req.alpha, "power": req.power},
        }

    @app.post("/v1/effectsize")
    def v1_effectsize(req: EffectSizeRequest):
        spec = ModelSpec.from_dict(req.model)
        design = CovariateDesign(rho=req.design.rho)
        seed = req.seed if req.seed is not None else secrets.randbelow(2**63)
        sample = CovariateSample.from_design(design, req.mc_size, RngStream(seed, 0))
        report = effect_size_report(spec, sample, include_score=req.include_score)
        return {
            "report": report.to_dict(),
            "echo": {
                "seed": seed,
                "mc_size": req.mc_size,
                "rho": req.design.rho,
                "include_score": req.include_score,
            },
        }

    @app.post("/v1/pilot")
    def v1_pilot(req: PilotRequest):
        if len(req.csv.encode("utf-8", errors="ignore")) > MAX_PILOT_BYTES:
            return JSONResponse(
                status_code=413,
                content={"code": "payload_too_large", "message": "pilot CSV exceeds 10 MB"},
            )
        mapping = PilotMapping.from_dict(req.mapping)
        data, info = load_pilot_csv(req.csv, mapping)
        grid = tuple(np.round(np.linspace(req.delta.lo, req.delta.hi, req.delta.points), 10))
        report = pilot_analyze(
            data, mapping.link, mapping.variance,
            alpha=req.alpha, target_power=req.power, delta_grid=grid,
        )
        out = report.to_dict()
        out["ingest"] = info
        out["echo"] = {"alpha": req.alpha, "power": req.power, "delta": req.delta.model_dump()}
        return out

    @app.get("/v1/presets")
    def v1_presets():
        return {
            "presets": [
                {"name": s.name, "label": s.label, "family": s.family, "scenario": s.to_dict()}
                for s in scenario_presets()
            ]
        }

    @app.post("/v1/simulate")
    def v1_simulate(req: SimulateRequest):
        if (req.preset is None) == (req.scenario is None):
            raise DomainError("provide exactly one of preset or scenario")
        if req.preset is not None:
            scenario = preset_by_name(req.preset)
        else:
            scenario = SimScenario.from_dict(req.scenario)
        replicates = req.replicates if req.replicates is not None else min(
            scenario.replicates, max_replicates
        )
        if replicates > max_replicates:
            raise DomainError(
                f"replicates {replicates} exceed the server cap {max_replicates}"
            )
        seed = req.seed if req.seed is not None else secrets.randbelow(2**63)
        scenario = replace(scenario, replicates=replicates, seed=seed)

        if not simulate_slots.acquire(blocking=False):
            return JSONResponse(
                status_code=429,
                content={"code": "too_many_jobs", "message": "concurrent simulation limit reached"},
            )

        def event_stream():
            events: queue.Queue = queue.Queue()

            def progress(done, total):
                events.put({"type": "progress", "done": done, "total": total})

            def work():
                try:
                    result = run_scenario(scenario, progress=progress)
                    events.put({"type": "result", **result.to_dict(), "seed": seed})
                except Exception as exc:  # surfaced to the client, not the log
                    events.put({"type": "error", "message": str(exc)})
                finally:
                    events.put(None)

            try:
                threading.Thread(target=work, daemon=True).start()
                while True:
                    item = events.get()
                    if item is None:
                        break
                    yield json.dumps(item) + "\n"
            finally:
                simulate_slots.release()

        return StreamingResponse(event_stream(), media_type="application/x-ndjson")

    return app
