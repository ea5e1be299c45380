"""Thin-client CLI: every command talks to the service surface.

By default requests go to an in-process app over an ASGI transport, so
`itolab run` works standalone with no server and writes artifacts locally;
`--server URL` points the same commands at a remote instance (artifacts then
land on the server's filesystem). `itolab serve` starts the HTTP server.
"""

from __future__ import annotations

import json
import sys

import click
import httpx


def _client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server.rstrip("/"), timeout=600.0)
    from .service.app import app
    return httpx.Client(transport=httpx.ASGITransport(app=app),
                        base_url="http://itolab.local", timeout=None)


def _fail(payload: dict, code: int):
    click.echo(json.dumps({"error": payload}, sort_keys=True), err=True)
    sys.exit(code)


def _check(response: httpx.Response) -> dict:
    if response.status_code == 422:
        detail = response.json().get("detail")
        if isinstance(detail, dict):
            _fail(detail, 2)
        _fail({"message": str(detail)}, 2)
    if response.status_code != 200:
        try:
            detail = response.json().get("detail", response.text)
        except ValueError:
            detail = response.text
        _fail(detail if isinstance(detail, dict) else {"message": str(detail)}, 1)
    return response.json()


@click.group()
def main():
    """Monte Carlo lab for semimartingale decompositions of transformed diffusions."""


@main.command()
@click.argument("config", required=False, type=click.Path(exists=True, dir_okay=False))
@click.option("--preset", help="run a built-in scenario by name")
@click.option("--seed", type=int, help="override run.seed")
@click.option("--steps", type=int, help="override grid.steps")
@click.option("--paths", type=int, help="override run.paths")
@click.option("--out", help="override output directory")
@click.option("--server", help="base URL of a running service (default: in-process)")
def run(config, preset, seed, steps, paths, out, server):
    """Run a scenario from CONFIG (key=value file) or --preset NAME."""
    if (config is None) == (preset is None):
        _fail({"field": "config", "message": "provide exactly one of CONFIG or --preset"}, 2)
    body = {"overrides": {"seed": seed, "steps": steps, "paths": paths, "out_dir": out}}
    if preset:
        body["preset"] = preset
    else:
        with open(config, "r", encoding="utf-8") as fh:
            body["config"] = fh.read()
    with _client(server) as client:
        payload = _check(client.post("/scenarios/run", json=body))
    click.echo(json.dumps(payload["report"], indent=2, sort_keys=True))
    for path in payload["artifacts"]:
        click.echo(f"wrote {path}", err=True)


@main.command("list")
@click.option("--server", help="base URL of a running service (default: in-process)")
def list_cmd(server):
    """List built-in scenario presets."""
    with _client(server) as client:
        payload = _check(client.get("/scenarios"))
    for item in payload["scenarios"]:
        click.echo(f"{item['name']:24s} [{item['kind']}] {item['description']}")


@main.command()
@click.argument("report", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", default="plots", show_default=True, help="output directory for CSVs")
@click.option("--server", help="base URL of a running service (default: in-process)")
def plot(report, out, server):
    """Emit plot-ready CSV files from a report JSON."""
    with open(report, "r", encoding="utf-8") as fh:
        document = json.load(fh)
    with _client(server) as client:
        payload = _check(client.post("/reports/plot-data",
                                     json={"report": document, "out_dir": out}))
    for path in payload["files"]:
        click.echo(f"wrote {path}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
def serve(host, port):
    """Start the HTTP service."""
    import uvicorn
    uvicorn.run("itolab.service.app:app", host=host, port=port)


if __name__ == "__main__":
    main()
