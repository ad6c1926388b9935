"""HTTP service exposing the experiment harness and verification checks."""
from __future__ import annotations

from typing import Literal, Union

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict, Field

from . import __version__
from .bounds import (check_component_bound, check_grad_norm_bound,
                     check_single_gate_forms)
from .experiments import (ExperimentConfig, run_experiment, run_grad_check,
                          run_ground_energy, run_sweep)
from .observables import parse_hamiltonian

BOUND_CHECKS = ("4.1", "4.2", "lemma-b1", "lemma-b2")


class RunRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    config: ExperimentConfig


class RunResponse(BaseModel):
    summary: dict


class SweepRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    config: ExperimentConfig
    axis: Literal["layers", "variance_multiplier", "optimizer"]
    values: list[Union[int, float, str]]


class SweepResponse(BaseModel):
    sweep: dict


class VerifyBoundRequest(BaseModel):
    """Arguments for the Monte-Carlo bound checks.

    `check` selects which guarantee to verify (names follow the CLI tokens):
    "4.1" is the expected-gradient-norm lower bound, "4.2" the shared-
    parameter component bound, "lemma-b1"/"lemma-b2" the single-gate
    second-moment closed forms for the loss and its derivative.
    """
    model_config = ConfigDict(extra="forbid")
    check: Literal["4.1", "4.2", "lemma-b1", "lemma-b2"]
    qubits: int = Field(6, ge=1, le=20)
    locality: int = Field(2, ge=1)
    layers: int = Field(4, ge=1)
    samples: int = Field(2000, ge=2)
    seed: int = 0
    epsilon: float = Field(0.5, gt=0, lt=1)
    index: int | None = None
    configs: int = Field(20, ge=1)


class VerifyBoundResponse(BaseModel):
    report: dict


class GradCheckRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    circuits: int = Field(50, ge=1)
    seed: int = 0
    tolerance: float = Field(1e-6, gt=0)


class GroundEnergyRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    hamiltonian_text: str


def create_app() -> FastAPI:
    app = FastAPI(title="vqinit", version=__version__)

    # HamiltonianFormatError subclasses ValueError and lands here too
    @app.exception_handler(ValueError)
    @app.exception_handler(FileNotFoundError)
    async def _bad_input(request: Request, exc: Exception):
        return JSONResponse(status_code=400, content={
            "error": {"type": type(exc).__name__, "message": str(exc)}})

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.post("/run", response_model=RunResponse)
    def run(req: RunRequest) -> RunResponse:
        _, summary = run_experiment(req.config)
        return RunResponse(summary=summary)

    @app.post("/sweep", response_model=SweepResponse)
    def sweep(req: SweepRequest) -> SweepResponse:
        return SweepResponse(sweep=run_sweep(req.config, req.axis, req.values))

    @app.post("/verify-bound", response_model=VerifyBoundResponse)
    def verify_bound(req: VerifyBoundRequest) -> VerifyBoundResponse:
        if req.check == "4.1":
            report = check_grad_norm_bound(req.qubits, req.locality,
                                           req.layers, req.samples, req.seed)
        elif req.check == "4.2":
            report = check_component_bound(req.epsilon, req.samples, req.seed,
                                           req.index)
        else:
            which = "loss" if req.check == "lemma-b1" else "grad"
            report = check_single_gate_forms(which, req.configs, req.samples,
                                             req.seed)
        return VerifyBoundResponse(report=report)

    @app.post("/grad-check")
    def grad_check(req: GradCheckRequest) -> dict:
        return {"report": run_grad_check(req.circuits, req.seed,
                                         req.tolerance)}

    @app.post("/ground-energy")
    def ground_energy(req: GroundEnergyRequest) -> dict:
        return {"report": run_ground_energy(parse_hamiltonian(req.hamiltonian_text))}

    return app


app = create_app()
