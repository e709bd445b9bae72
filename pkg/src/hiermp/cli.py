"""Command line front end.

A thin client of the placement service: every subcommand builds a request,
posts it (in-process by default, over the network with --server), and
writes the response to local files.  Exit codes: 0 success, 1 input or
request errors, 2 when no valid floorplan exists.
"""

from __future__ import annotations

import json
import sys

import click


def _client(server: str | None):
    if server:
        import httpx

        return httpx.Client(base_url=server.rstrip("/"), timeout=None)
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient

    from .service.app import app

    return TestClient(app)


def _read(path: str) -> str:
    try:
        with open(path) as f:
            return f.read()
    except OSError as exc:
        click.echo(f"error: cannot read {path}: {exc}", err=True)
        sys.exit(1)


def _write(path: str, text: str) -> None:
    try:
        with open(path, "w") as f:
            f.write(text)
    except OSError as exc:
        click.echo(f"error: cannot write {path}: {exc}", err=True)
        sys.exit(1)


def _fail(resp) -> None:
    try:
        detail = resp.json().get("detail", resp.text)
    except ValueError:
        detail = resp.text
    click.echo(f"error: {detail}", err=True)
    sys.exit(2 if resp.status_code == 409 else 1)


@click.group()
@click.version_option(package_name="hiermp")
def main() -> None:
    """Hierarchical macro placement."""


@main.command()
@click.option("--netlist", required=True, help="netlist file")
@click.option("--lib", "lib_", required=True, help="cell/macro library file")
@click.option("--floorplan", required=True, help="floorplan file")
@click.option("--out", required=True, help="placement output file")
@click.option("--metrics-out", default=None, help="metrics output (default <out>.metrics)")
@click.option("--svg", "svg_out", default=None, help="also render an SVG here")
@click.option("--svg-level", default=1, show_default=True, help="cluster depth drawn in the SVG")
@click.option("--num-level", default=2, show_default=True)
@click.option("--level-ratio", default=10.0, show_default=True)
@click.option("--num-segment", default=4, show_default=True)
@click.option("--epsilon-net", default=50.0, show_default=True)
@click.option("--num-hop-thr", default=4, show_default=True)
@click.option("--min-ar", default=0.33, show_default=True)
@click.option("--tiny-thr", default=50, show_default=True)
@click.option("--macro-halo", default=0.0, show_default=True)
@click.option("--sa-moves", default=500, show_default=True)
@click.option("--sa-iters", default=200, show_default=True)
@click.option("--sa-workers", default=10, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--w-area", default=0.1, show_default=True)
@click.option("--w-wl", default=1.0, show_default=True)
@click.option("--w-outline", default=10.0, show_default=True)
@click.option("--w-bias", default=0.05, show_default=True)
@click.option("--w-blockage", default=10.0, show_default=True)
@click.option("--w-guidance", default=1.0, show_default=True)
@click.option("--w-notch", default=1.0, show_default=True)
@click.option("--pin-access-depth", default=None, type=float)
@click.option("--notch-min-dim", default=None, type=float)
@click.option("--max-trials", default=152, show_default=True)
@click.option("--server", default=None, help="remote service URL (default: in-process)")
def place(
    netlist,
    lib_,
    floorplan,
    out,
    metrics_out,
    svg_out,
    svg_level,
    num_level,
    level_ratio,
    num_segment,
    epsilon_net,
    num_hop_thr,
    min_ar,
    tiny_thr,
    macro_halo,
    sa_moves,
    sa_iters,
    sa_workers,
    seed,
    w_area,
    w_wl,
    w_outline,
    w_bias,
    w_blockage,
    w_guidance,
    w_notch,
    pin_access_depth,
    notch_min_dim,
    max_trials,
    server,
) -> None:
    """Place the macros of a design inside its fixed outline."""
    payload = {
        "netlist": _read(netlist),
        "library": _read(lib_),
        "floorplan": _read(floorplan),
        "options": {
            "num_level": num_level,
            "level_ratio": level_ratio,
            "num_segment": num_segment,
            "epsilon_net": epsilon_net,
            "num_hop_thr": num_hop_thr,
            "min_ar": min_ar,
            "tiny_thr": tiny_thr,
            "macro_halo": macro_halo,
            "sa_moves": sa_moves,
            "sa_iters": sa_iters,
            "sa_workers": sa_workers,
            "seed": seed,
            "w_area": w_area,
            "w_wl": w_wl,
            "w_outline": w_outline,
            "w_bias": w_bias,
            "w_blockage": w_blockage,
            "w_guidance": w_guidance,
            "w_notch": w_notch,
            "pin_access_depth": pin_access_depth,
            "notch_min_dim": notch_min_dim,
            "max_trials": max_trials,
        },
        "svg": svg_out is not None,
        "svg_level": svg_level,
    }
    with _client(server) as client:
        resp = client.post("/place", json=payload)
    if resp.status_code != 200:
        _fail(resp)
    body = resp.json()
    _write(out, body["placement"])
    _write(metrics_out or out + ".metrics", body["metrics"])
    if svg_out is not None:
        _write(svg_out, body["svg"])
    click.echo(f"placed: {out}")


@main.command("gen-bench")
@click.option("--spec", "spec_path", required=True, help="benchmark spec (json)")
@click.option("--out-dir", default=".", show_default=True)
@click.option("--server", default=None, help="remote service URL (default: in-process)")
def gen_bench(spec_path, out_dir, server) -> None:
    """Generate a synthetic benchmark design from a json spec."""
    try:
        spec = json.loads(_read(spec_path))
    except ValueError as exc:
        click.echo(f"error: bad spec json: {exc}", err=True)
        sys.exit(1)
    if not isinstance(spec, dict) or "num_macros" not in spec:
        click.echo("error: spec must be an object with num_macros", err=True)
        sys.exit(1)
    with _client(server) as client:
        resp = client.post("/generate", json=spec)
    if resp.status_code != 200:
        _fail(resp)
    import os

    os.makedirs(out_dir, exist_ok=True)
    for fname, text in sorted(resp.json()["files"].items()):
        path = os.path.join(out_dir, fname)
        _write(path, text)
        click.echo(f"wrote: {path}")


@main.command()
@click.option("--placement", required=True, help="placement file to draw")
@click.option("--svg", "svg_out", required=True, help="SVG output file")
@click.option("--floorplan", default=None, help="floorplan file for canvas geometry")
@click.option("--server", default=None, help="remote service URL (default: in-process)")
def render(placement, svg_out, floorplan, server) -> None:
    """Render a placement file as an SVG drawing."""
    payload = {"placement": _read(placement)}
    if floorplan is not None:
        payload["floorplan"] = _read(floorplan)
    with _client(server) as client:
        resp = client.post("/render", json=payload)
    if resp.status_code != 200:
        _fail(resp)
    _write(svg_out, resp.json()["svg"])
    click.echo(f"rendered: {svg_out}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve(host, port) -> None:
    """Run the placement service."""
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
