"""Request and response models for the verification service."""

from __future__ import annotations

from typing import Any, Optional

from pydantic import BaseModel, Field


class ConstantsOverride(BaseModel):
    alpha_k: Optional[float] = None
    alpha_n: Optional[float] = None
    c_n: Optional[float] = None
    gamma_n: Optional[float] = None
    beta_n: Optional[float] = None


class ConfigOptions(BaseModel):
    classifier_margin: Optional[float] = None
    seed: Optional[int] = None
    threads: Optional[int] = None
    constants: Optional[ConstantsOverride] = None


class CheckConditionRequest(BaseModel):
    phi: str
    condition: str = "calderon"
    k: Optional[int] = None
    p: Optional[float] = None
    delta: Optional[float] = None
    delta0: Optional[float] = None
    weight: Optional[str] = None
    dimension: int = 3
    delta_max: float = 0.5
    config: Optional[ConfigOptions] = None


class BuildExtremalRequest(BaseModel):
    phi: str
    k: int = Field(ge=2)
    rescale: bool = True
    u_max: float = 1e6
    nodes: int = 16384
    config: Optional[ConfigOptions] = None


class BuildCounterexampleRequest(BaseModel):
    phi: str
    k: int = Field(ge=2)
    depth: int = Field(ge=1)
    u_max: float = 1e6
    nodes: int = 16384
    config: Optional[ConfigOptions] = None


class VerifyCounterexampleRequest(BaseModel):
    model: dict
    checks: list[str] = ["osc", "diam", "energy", "hausdorff"]
    levels: Optional[list[int]] = None
    sample_balls: int = 8
    samples_per_ball: int = 4096
    config: Optional[ConfigOptions] = None


class OscillationRequest(BaseModel):
    field: str
    center: tuple[float, float] = (0.0, 0.0)
    scales: int = 8
    radius_max: float = 0.5
    config: Optional[ConfigOptions] = None


class ModulusRequest(BaseModel):
    ring: tuple[float, float, int]
    weight: str = "const:c=1"
    family: str = "curves"
    grid: Optional[int] = None
    p: Optional[float] = None
    config: Optional[ConfigOptions] = None


class DistortionRequest(BaseModel):
    map: str
    check: str = "holder"
    point: Optional[list[float]] = None
    eps0: float = 0.5
    beta: float = 1.0
    gap: float = 1.0
    config: Optional[ConfigOptions] = None


class SuiteRequest(BaseModel):
    manifest: Optional[list[str]] = None
    config: Optional[ConfigOptions] = None


class RunResponse(BaseModel):
    ok: bool
    failed: bool
    payload: dict[str, Any]
    runtime_s: float


class ErrorResponse(BaseModel):
    ok: bool = False
    error: str
    kind: str
