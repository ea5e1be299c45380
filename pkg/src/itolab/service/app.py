"""FastAPI service exposing the lab: presets, scenario runs, plot-data emission."""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from ..clocks import CLOCK_PRESET_NAMES
from ..errors import ConfigError, ItolabError
from ..models import MODEL_PRESETS
from ..scenarios import (apply_overrides, emit_plot_data, list_scenarios, parse_config_text,
                         run_report, run_scenario, scenario_from_mapping, scenario_preset)
from ..transforms import TRANSFORM_PRESETS
from .schemas import (HealthResponse, PlotDataRequest, PlotDataResponse, PresetListResponse,
                      RunRequest, RunResponse, ScenarioInfo, ScenarioListResponse)


def create_app() -> FastAPI:
    app = FastAPI(
        title="itolab",
        description="Monte Carlo laboratory for semimartingale decompositions of "
                    "transformed diffusions",
        version="0.1.0",
    )

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse()

    @app.get("/scenarios", response_model=ScenarioListResponse)
    def scenarios() -> ScenarioListResponse:
        return ScenarioListResponse(scenarios=[ScenarioInfo(**s) for s in list_scenarios()])

    @app.get("/presets", response_model=PresetListResponse)
    def presets() -> PresetListResponse:
        return PresetListResponse(
            models=sorted(MODEL_PRESETS),
            transforms=sorted(TRANSFORM_PRESETS) + ["pow:<alpha>"],
            clocks=list(CLOCK_PRESET_NAMES),
        )

    @app.post("/scenarios/run", response_model=RunResponse)
    def run(request: RunRequest) -> RunResponse:
        try:
            if request.preset is not None:
                scenario = scenario_preset(request.preset)
            else:
                scenario = scenario_from_mapping(parse_config_text(request.config))
            o = request.overrides
            scenario = apply_overrides(scenario, seed=o.seed, steps=o.steps,
                                       paths=o.paths, out_dir=o.out_dir)
            if request.write_artifacts:
                report, artifacts = run_scenario(scenario)
            else:
                report, artifacts = run_report(scenario), []
        except ConfigError as exc:
            raise HTTPException(status_code=422,
                                detail={"field": exc.field, "message": str(exc)}) from exc
        except ItolabError as exc:
            raise HTTPException(status_code=400,
                                detail={"field": None, "message": str(exc)}) from exc
        return RunResponse(name=scenario.name, kind=scenario.kind,
                           report=report, artifacts=artifacts)

    @app.post("/reports/plot-data", response_model=PlotDataResponse)
    def plot_data(request: PlotDataRequest) -> PlotDataResponse:
        try:
            files = emit_plot_data(request.report, request.out_dir)
        except OSError as exc:
            raise HTTPException(status_code=400,
                                detail={"field": "out_dir", "message": str(exc)}) from exc
        return PlotDataResponse(files=files)

    return app


app = create_app()
