"""FastAPI service wrapping the simulator and the exact oracle.

The endpoints return the same payload objects the CLI prints, so a
thin HTTP client and the command line see identical structures.
Run with: uvicorn pingpong_sim.service:app
"""

from __future__ import annotations

from dataclasses import replace
from typing import Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import params, render
from .harness import RunConfig, run_simulation
from .oracle import attack_report

app = FastAPI(
    title="pingpong-sim",
    description="Entanglement ping-pong protocol simulator and exact analyzer",
    version="0.1.0",
)


class OracleRequest(BaseModel):
    variant: str = "original"
    attack: str = "none"
    control_prob: str = "1/2"
    c0: str = "1/2"
    receipt: str = "on"


class RunRequest(OracleRequest):
    rounds: int = Field(default=10000, ge=1)
    seed: int = Field(default=0, ge=0)
    bits: str = "random"
    stop_on_detection: bool = False


class SweepRequest(OracleRequest):
    param: str
    start: str = Field(alias="from")
    end: str = Field(alias="to")
    steps: int = Field(ge=1)
    rounds: Optional[int] = Field(default=None, ge=1)
    seed: int = Field(default=0, ge=0)

    model_config = {"populate_by_name": True}


class AnalysisResponse(BaseModel):
    """The fixed five-block payload shared with the CLI."""

    config: dict
    counts: Optional[dict]
    rates: Optional[dict]
    mutual_information: dict
    oracle: Optional[dict]


class SweepResponse(BaseModel):
    header: list[str]
    rows: list[list[str]]


@app.get("/health")
def health() -> dict:
    return {"status": "ok"}


@app.post("/oracle", response_model=AnalysisResponse)
def oracle_endpoint(request: OracleRequest) -> dict:
    try:
        protocol = params.build_protocol_config(
            request.variant, request.control_prob, request.c0, request.receipt
        )
        attack = params.parse_attack(request.attack)
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    return render.oracle_payload(attack_report(protocol, attack))


@app.post("/run", response_model=AnalysisResponse)
def run_endpoint(request: RunRequest) -> dict:
    try:
        config = params.build_run_config(
            variant=request.variant,
            attack=request.attack,
            rounds=request.rounds,
            control_prob=request.control_prob,
            c0=request.c0,
            receipt=request.receipt,
            seed=request.seed,
            bits=request.bits,
            stop_on_detection=request.stop_on_detection,
        )
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    report = attack_report(config.protocol, config.strategy)
    stats = run_simulation(config)
    return render.run_payload(config, stats, report)


@app.post("/sweep", response_model=SweepResponse)
def sweep_endpoint(request: SweepRequest) -> dict:
    if request.param not in ("c0", "control-prob"):
        raise HTTPException(
            status_code=400, detail=f"param must be 'c0' or 'control-prob', got {request.param!r}"
        )
    try:
        base = params.build_protocol_config(
            request.variant, request.control_prob, request.c0, request.receipt
        )
        attack = params.parse_attack(request.attack)
        start = params.parse_probability(request.start, "from")
        end = params.parse_probability(request.end, "to")
        seed = params.parse_seed(request.seed)
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc

    if request.steps == 1:
        values = [start]
    else:
        step = (end - start) / (request.steps - 1)
        values = [start + k * step for k in range(request.steps)]

    rows = []
    for value in values:
        if request.param == "c0":
            protocol = replace(base, sendback_split=value)
        else:
            protocol = replace(base, control_prob=value)
        report = attack_report(protocol, attack)
        stats = None
        if request.rounds is not None:
            stats = run_simulation(
                RunConfig(protocol=protocol, strategy=attack, rounds=request.rounds, seed=seed)
            )
        rows.append(render.sweep_row(request.param, value, report, stats))
    return {"header": list(render.SWEEP_HEADER), "rows": rows}
