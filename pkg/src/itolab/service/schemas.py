"""Request/response models for the lab service."""

from __future__ import annotations

from typing import Any

from pydantic import BaseModel, Field, model_validator


class HealthResponse(BaseModel):
    status: str = "ok"
    package: str = "itolab"


class ScenarioInfo(BaseModel):
    name: str
    kind: str
    description: str = ""


class ScenarioListResponse(BaseModel):
    scenarios: list[ScenarioInfo]


class PresetListResponse(BaseModel):
    models: list[str]
    transforms: list[str]
    clocks: list[str]


class RunOverrides(BaseModel):
    seed: int | None = None
    steps: int | None = Field(default=None, ge=2)
    paths: int | None = Field(default=None, ge=1)
    out_dir: str | None = None


class RunRequest(BaseModel):
    """Run a named preset or an inline config document (exactly one)."""

    preset: str | None = None
    config: str | None = None
    overrides: RunOverrides = Field(default_factory=RunOverrides)
    write_artifacts: bool = True

    @model_validator(mode="after")
    def _exactly_one_source(self):
        if (self.preset is None) == (self.config is None):
            raise ValueError("provide exactly one of 'preset' or 'config'")
        return self


class RunResponse(BaseModel):
    name: str
    kind: str
    report: dict[str, Any]
    artifacts: list[str]


class PlotDataRequest(BaseModel):
    report: dict[str, Any]
    out_dir: str


class PlotDataResponse(BaseModel):
    files: list[str]


class ErrorRecord(BaseModel):
    field: str | None = None
    message: str
