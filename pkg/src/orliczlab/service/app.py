"""HTTP face of the laboratory: one endpoint per command.

All numeric work happens in :mod:`orliczlab.runner`; the service validates
requests, measures wall time into a side field and maps domain errors to 422
responses so a thin client can surface them as usage problems.
"""

from __future__ import annotations

import time

from fastapi import FastAPI
from fastapi.responses import JSONResponse

from .. import runner, suite
from ..conditions import ConditionError
from ..config import RunConfig
from ..constants import DEFAULT_CONSTANTS
from ..counterexample import CounterexampleError
from ..distortion import DistortionError
from ..extremal import ProfileError
from ..gauges import GaugeError
from ..modulus import ModulusError
from ..oscillation import OscillationError
from ..reports import jsonable
from . import schemas

DOMAIN_ERRORS = (
    ConditionError, CounterexampleError, DistortionError, GaugeError,
    ModulusError, OscillationError, ProfileError, runner.RunnerError, ValueError,
)


def _config_from(options) -> RunConfig:
    if options is None:
        return RunConfig()
    constants = DEFAULT_CONSTANTS
    if options.constants is not None:
        constants = constants.with_overrides(**options.constants.model_dump())
    kwargs = {}
    if options.classifier_margin is not None:
        kwargs["classifier_margin"] = options.classifier_margin
    if options.seed is not None:
        kwargs["seed"] = options.seed
    if options.threads is not None:
        kwargs["threads"] = options.threads
    return RunConfig(constants=constants, **kwargs)


def _run(fn, *args, **kwargs):
    start = time.perf_counter()
    try:
        payload = fn(*args, **kwargs)
    except DOMAIN_ERRORS as exc:
        return JSONResponse(
            status_code=422,
            content={"ok": False, "error": str(exc), "kind": type(exc).__name__},
        )
    return {
        "ok": True,
        "failed": runner.payload_failed(payload),
        "payload": jsonable(payload),
        "runtime_s": time.perf_counter() - start,
    }


def create_app() -> FastAPI:
    app = FastAPI(title="orliczlab", version="0.1.0")

    @app.get("/health")
    def health():
        return {"ok": True}

    @app.post("/check-condition", response_model=schemas.RunResponse,
              responses={422: {"model": schemas.ErrorResponse}})
    def check_condition(req: schemas.CheckConditionRequest):
        return _run(
            runner.run_check_condition, req.phi, req.condition, k=req.k, p=req.p,
            delta=req.delta, delta0=req.delta0, weight=req.weight,
            dimension=req.dimension, delta_max=req.delta_max,
            config=_config_from(req.config),
        )

    @app.post("/build-extremal", response_model=schemas.RunResponse,
              responses={422: {"model": schemas.ErrorResponse}})
    def build_extremal(req: schemas.BuildExtremalRequest):
        return _run(
            runner.run_build_extremal, req.phi, req.k, rescale=req.rescale,
            u_max=req.u_max, nodes=req.nodes, config=_config_from(req.config),
        )

    @app.post("/build-counterexample", response_model=schemas.RunResponse,
              responses={422: {"model": schemas.ErrorResponse}})
    def build_counterexample(req: schemas.BuildCounterexampleRequest):
        return _run(
            runner.run_build_counterexample, req.phi, req.k, req.depth,
            u_max=req.u_max, nodes=req.nodes, config=_config_from(req.config),
        )

    @app.post("/verify-counterexample", response_model=schemas.RunResponse,
              responses={422: {"model": schemas.ErrorResponse}})
    def verify_counterexample(req: schemas.VerifyCounterexampleRequest):
        return _run(
            runner.run_verify_counterexample, req.model, checks=req.checks,
            levels=req.levels, sample_balls=req.sample_balls,
            samples_per_ball=req.samples_per_ball, config=_config_from(req.config),
        )

    @app.post("/oscillation", response_model=schemas.RunResponse,
              responses={422: {"model": schemas.ErrorResponse}})
    def oscillation_endpoint(req: schemas.OscillationRequest):
        return _run(
            runner.run_oscillation, req.field, center=req.center,
            scales=req.scales, radius_max=req.radius_max,
            config=_config_from(req.config),
        )

    @app.post("/modulus", response_model=schemas.RunResponse,
              responses={422: {"model": schemas.ErrorResponse}})
    def modulus_endpoint(req: schemas.ModulusRequest):
        return _run(
            runner.run_modulus, list(req.ring), weight=req.weight,
            family=req.family, grid=req.grid, p=req.p,
            config=_config_from(req.config),
        )

    @app.post("/distortion", response_model=schemas.RunResponse,
              responses={422: {"model": schemas.ErrorResponse}})
    def distortion_endpoint(req: schemas.DistortionRequest):
        return _run(
            runner.run_distortion, req.map, check=req.check, point=req.point,
            eps0=req.eps0, beta=req.beta, gap=req.gap,
            config=_config_from(req.config),
        )

    @app.post("/suite", response_model=schemas.RunResponse,
              responses={422: {"model": schemas.ErrorResponse}})
    def suite_endpoint(req: schemas.SuiteRequest):
        return _run(suite.run_suite, manifest=req.manifest,
                    config=_config_from(req.config))

    return app


app = create_app()
