"""Command-line client for the experiment service.

By default each command talks to an in-process instance of the HTTP app, so
no server needs to be running; --server points the same commands at a remote
one. Results print as JSON on stdout; failures print an error JSON on stderr
and exit non-zero (2 for rejected input, 1 for anything else).
"""
from __future__ import annotations

import asyncio
import json
import sys

import click
import httpx

from .experiments import ExperimentConfig, get_preset
from .service import create_app


def _fail(payload, code: int):
    click.echo(json.dumps(payload, indent=2, default=str), err=True)
    sys.exit(code)


async def _post_in_process(path: str, payload: dict) -> httpx.Response:
    # ASGITransport only speaks async, so in-process calls go through an
    # AsyncClient even though the CLI itself is synchronous
    transport = httpx.ASGITransport(app=create_app())
    async with httpx.AsyncClient(transport=transport,
                                 base_url="http://vqinit.local",
                                 timeout=None) as client:
        return await client.post(path, json=payload)


def _post(server: str | None, path: str, payload: dict):
    try:
        if server:
            with httpx.Client(base_url=server, timeout=None) as client:
                resp = client.post(path, json=payload)
        else:
            resp = asyncio.run(_post_in_process(path, payload))
    except httpx.HTTPError as exc:
        _fail({"error": {"type": type(exc).__name__, "message": str(exc)}}, 1)
    if resp.status_code != 200:
        try:
            body = resp.json()
        except ValueError:
            body = {"error": {"type": "HTTPError", "message": resp.text}}
        _fail(body, 2 if 400 <= resp.status_code < 500 else 1)
    click.echo(json.dumps(resp.json(), indent=2))


def _load_config(config_path: str | None, preset: str | None,
                 output: str | None, iterations: int | None,
                 seeds: str | None) -> dict:
    if (config_path is None) == (preset is None):
        _fail({"error": {"type": "UsageError",
                         "message": "give exactly one of --config or --preset"}}, 2)
    if config_path:
        try:
            with open(config_path, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, ValueError) as exc:
            _fail({"error": {"type": type(exc).__name__, "message": str(exc)}}, 2)
    else:
        try:
            data = get_preset(preset).model_dump()
        except ValueError as exc:
            _fail({"error": {"type": "ValueError", "message": str(exc)}}, 2)
    if output is not None:
        data["output_dir"] = output
    if iterations is not None:
        data["iterations"] = iterations
    if seeds is not None:
        try:
            data["seeds"] = [int(s) for s in seeds.split(",") if s.strip()]
        except ValueError as exc:
            _fail({"error": {"type": "ValueError", "message": str(exc)}}, 2)
    try:
        return ExperimentConfig.model_validate(data).model_dump()
    except Exception as exc:
        _fail({"error": {"type": type(exc).__name__, "message": str(exc)}}, 2)


@click.group()
@click.option("--server", default=None, metavar="URL",
              help="Base URL of a running service; default runs in-process.")
@click.pass_context
def main(ctx, server):
    """Variational-circuit training and gradient-bound verification."""
    ctx.obj = server


@main.command()
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="JSON experiment config.")
@click.option("--preset", default=None,
              help="Named built-in config (see `vqinit presets`).")
@click.option("--output", default=None, metavar="DIR",
              help="Directory for traces, manifest, and summary.")
@click.option("--iterations", type=int, default=None)
@click.option("--seeds", default=None, metavar="S0,S1,...")
@click.pass_obj
def run(server, config_path, preset, output, iterations, seeds):
    """Train on one problem across seeds and summarize."""
    cfg = _load_config(config_path, preset, output, iterations, seeds)
    _post(server, "/run", {"config": cfg})


@main.command()
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--preset", default=None)
@click.option("--axis", required=True,
              type=click.Choice(["layers", "variance_multiplier", "optimizer"]))
@click.option("--values", required=True, metavar="V0,V1,...",
              help="Comma-separated axis values.")
@click.option("--output", default=None, metavar="DIR")
@click.option("--iterations", type=int, default=None)
@click.option("--seeds", default=None, metavar="S0,S1,...")
@click.pass_obj
def sweep(server, config_path, preset, axis, values, output, iterations, seeds):
    """Repeat an experiment along one axis (depth, variance scale, optimizer)."""
    cfg = _load_config(config_path, preset, output, iterations, seeds)
    parsed = []
    for raw in values.split(","):
        raw = raw.strip()
        if not raw:
            continue
        if axis == "optimizer":
            parsed.append(raw)
        elif axis == "layers":
            parsed.append(int(raw))
        else:
            parsed.append(float(raw))
    _post(server, "/sweep", {"config": cfg, "axis": axis, "values": parsed})


@main.command("verify-bound")
@click.option("--theorem", "check", required=True,
              type=click.Choice(["4.1", "4.2", "lemma-b1", "lemma-b2"]),
              help="Which guarantee to verify by Monte Carlo.")
@click.option("--qubits", type=int, default=6)
@click.option("--locality", type=int, default=2)
@click.option("--layers", type=int, default=4)
@click.option("--samples", type=int, default=2000)
@click.option("--seed", type=int, default=0)
@click.option("--epsilon", type=float, default=0.5)
@click.option("--index", type=int, default=None,
              help="Gradient component for --theorem 4.2.")
@click.option("--configs", type=int, default=20,
              help="Random cases for the single-gate checks.")
@click.pass_obj
def verify_bound(server, check, qubits, locality, layers, samples, seed,
                 epsilon, index, configs):
    """Monte-Carlo check of a gradient-size guarantee."""
    _post(server, "/verify-bound", {
        "check": check, "qubits": qubits, "locality": locality,
        "layers": layers, "samples": samples, "seed": seed,
        "epsilon": epsilon, "index": index, "configs": configs})


@main.command("grad-check")
@click.option("--circuits", type=int, default=50)
@click.option("--seed", type=int, default=0)
@click.option("--tolerance", type=float, default=1e-6)
@click.pass_obj
def grad_check(server, circuits, seed, tolerance):
    """Parameter-shift gradients vs finite differences on random circuits."""
    _post(server, "/grad-check", {"circuits": circuits, "seed": seed,
                                  "tolerance": tolerance})


@main.command("ground-energy")
@click.argument("hamiltonian_file", type=click.Path())
@click.pass_obj
def ground_energy(server, hamiltonian_file):
    """Exact ground energy of a Hamiltonian file (dense, up to 12 qubits)."""
    try:
        with open(hamiltonian_file, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        _fail({"error": {"type": type(exc).__name__, "message": str(exc)}}, 2)
    _post(server, "/ground-energy", {"hamiltonian_text": text})


@main.command()
def presets():
    """List built-in experiment configs."""
    from .experiments import PRESETS
    out = {name: PRESETS[name]().model_dump() for name in sorted(PRESETS)}
    click.echo(json.dumps(out, indent=2))


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8000)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn
    uvicorn.run("vqinit.service:app", host=host, port=port)


if __name__ == "__main__":
    main()
