"""Command-line client for the scheduling service.

Every subcommand talks HTTP to the service layer.  By default the service
runs in-process (no sockets); pass ``--server URL`` to target a remote
instance started with ``uavsched serve``.
"""
from __future__ import annotations

import asyncio
import json
import sys
from pathlib import Path

import click
import httpx


class _InProcessTransport(httpx.BaseTransport):
    """Synchronous face over the ASGI transport so the same httpx client
    code serves both the in-process default and a remote --server."""

    def __init__(self, app) -> None:
        self._inner = httpx.ASGITransport(app=app)

    def handle_request(self, request: httpx.Request) -> httpx.Response:
        async def call() -> tuple[int, httpx.Headers, bytes]:
            response = await self._inner.handle_async_request(request)
            content = await response.aread()
            await response.aclose()
            return response.status_code, response.headers, content

        status, headers, content = asyncio.run(call())
        return httpx.Response(
            status_code=status, headers=headers, content=content, request=request
        )


def _client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=None)
    from .service.app import create_app

    transport = _InProcessTransport(create_app())
    return httpx.Client(transport=transport, base_url="http://uavsched.local", timeout=None)


def _post(server: str | None, route: str, body: dict) -> dict:
    with _client(server) as client:
        resp = client.post(route, json=body)
        if resp.status_code != 200:
            try:
                detail = resp.json().get("detail", resp.text)
            except ValueError:
                detail = resp.text
            raise click.ClickException(f"{route} failed ({resp.status_code}): {detail}")
        return resp.json()


def _read_scenario(path: str) -> str:
    return Path(path).read_text()


scenario_opt = click.option(
    "--scenario",
    required=True,
    type=click.Path(exists=True, dir_okay=False),
    help="Scenario INI file.",
)
seed_opt = click.option("--seed", default=0, type=int, show_default=True)
episodes_opt = click.option("--episodes", default=400, type=int, show_default=True)
epsilon_opt = click.option("--epsilon", default=1.2, type=float, show_default=True)
budget_nodes_opt = click.option("--budget-nodes", default=200_000, type=int, show_default=True)
budget_seconds_opt = click.option(
    "--budget-seconds", default=300.0, type=float, show_default=True
)


@click.group()
@click.option("--server", default=None, metavar="URL", help="Remote service URL (default: in-process).")
@click.pass_context
def main(ctx: click.Context, server: str | None) -> None:
    """Scheduling laboratory for a multi-cluster hover-and-transmit downlink."""
    ctx.obj = server


@main.command()
@scenario_opt
@click.option("--solver", default="gss-heu", show_default=True)
@seed_opt
@episodes_opt
@epsilon_opt
@budget_nodes_opt
@budget_seconds_opt
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write the full JSON response here.")
@click.pass_obj
def solve(server, scenario, solver, seed, episodes, epsilon, budget_nodes, budget_seconds, out):
    """Solve one scenario with one solver and print the energy split."""
    data = _post(
        server,
        "/solve",
        {
            "scenario_ini": _read_scenario(scenario),
            "solver": solver,
            "seed": seed,
            "episodes": episodes,
            "epsilon": epsilon,
            "budget_nodes": budget_nodes,
            "budget_seconds": budget_seconds,
        },
    )
    click.echo(f"solver={data['solver']} status={data['status']} wall_ms={data['wall_ms']:.3f}")
    if data.get("energy"):
        e = data["energy"]
        click.echo(
            f"total_J={e['total_j']:.9g} comm_J={e['comm_j']:.9g} "
            f"hover_J={e['hover_j']:.9g} delivered_ratio={e['delivered_ratio']:.9g}"
        )
        click.echo(f"hover_frames={data['hover_frames']}")
    if out:
        Path(out).write_text(json.dumps(data, indent=2) + "\n")
        click.echo(f"wrote {out}")
    if data["status"] in ("infeasible", "refused"):
        sys.exit(1)


@main.command()
@scenario_opt
@click.option("--axis", required=True, type=click.Choice(["K", "T_max", "epsilon", "alpha_a"]))
@click.option("--values", required=True, help="Comma-separated axis values, e.g. 2,3,4.")
@click.option("--solver", "solvers", multiple=True, default=("greedy", "gss-heu"), show_default=True)
@click.option("--seed", "seeds", multiple=True, type=int, default=(0, 1, 2), show_default=True)
@episodes_opt
@epsilon_opt
@budget_nodes_opt
@budget_seconds_opt
@click.option("--out", required=True, type=click.Path(file_okay=False), help="Directory for the CSV artifacts.")
@click.pass_obj
def sweep(server, scenario, axis, values, solvers, seeds, episodes, epsilon, budget_nodes, budget_seconds, out):
    """Sweep one axis over a value grid and write the benchmark CSVs."""
    try:
        grid = [float(tok) for tok in values.split(",") if tok.strip()]
    except ValueError as exc:
        raise click.ClickException(f"bad --values: {exc}")
    data = _post(
        server,
        "/sweep",
        {
            "scenario_ini": _read_scenario(scenario),
            "axis": axis,
            "values": grid,
            "solvers": list(solvers),
            "seeds": list(seeds),
            "episodes": episodes,
            "epsilon": epsilon,
            "budget_nodes": budget_nodes,
            "budget_seconds": budget_seconds,
        },
    )
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, text in [
        (f"energy_vs_{data['axis']}.csv", data["energy_csv"]),
        (f"timing_vs_{data['axis']}.csv", data["timing_csv"]),
        ("learning_curve.csv", data.get("learning_csv")),
    ]:
        if not text:
            continue
        (out_dir / name).write_text(text)
        click.echo(f"wrote {out_dir / name}")


@main.command()
@scenario_opt
@seed_opt
@episodes_opt
@epsilon_opt
@click.option("--variant", default="A", type=click.Choice(["A", "B", "C"]), show_default=True, help="Reward shaping variant.")
@click.option("--restrict/--no-restrict", default=True, show_default=True, help="Shrink the group catalog to users with pending demand.")
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="Agent parameter file to write.")
@click.pass_obj
def train(server, scenario, seed, episodes, epsilon, variant, restrict, out):
    """Train an agent on the scenario and save its parameters."""
    data = _post(
        server,
        "/train",
        {
            "scenario_ini": _read_scenario(scenario),
            "seed": seed,
            "episodes": episodes,
            "epsilon": epsilon,
            "reward_variant": variant,
            "restrict": restrict,
        },
    )
    import base64

    Path(out).write_bytes(base64.b64decode(data["agent_b64"]))
    curve = data["curve"]
    if curve:
        tail = curve[-min(20, len(curve)) :]
        ratio = sum(p["delivered_ratio"] for p in tail) / len(tail)
        click.echo(
            f"trained {len(curve)} episodes; last-{len(tail)} mean delivered_ratio={ratio:.3f}"
        )
    click.echo(f"wrote {out}")


@main.command("eval")
@scenario_opt
@click.option("--agent", required=True, type=click.Path(exists=True, dir_okay=False), help="Agent parameter file from `train`.")
@seed_opt
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write the full JSON response here.")
@click.pass_obj
def eval_cmd(server, scenario, agent, seed, out):
    """Roll out a trained agent on a frozen trace and print the energy split."""
    import base64

    data = _post(
        server,
        "/eval",
        {
            "scenario_ini": _read_scenario(scenario),
            "agent_b64": base64.b64encode(Path(agent).read_bytes()).decode("ascii"),
            "seed": seed,
        },
    )
    e = data["energy"]
    click.echo(
        f"status={data['status']} total_J={e['total_j']:.9g} "
        f"delivered_ratio={e['delivered_ratio']:.9g} wall_ms={data['wall_ms']:.3f}"
    )
    if out:
        Path(out).write_text(json.dumps(data, indent=2) + "\n")
        click.echo(f"wrote {out}")
    if data["status"] != "ok":
        sys.exit(1)


@main.command()
@click.option("--scenario", type=click.Path(exists=True, dir_okay=False), default=None, help="Desk-scale scenario override (default: built-in).")
@click.option("--out", type=click.Path(file_okay=False), default="verify_out", show_default=True, help="Directory for the CSV artifacts.")
@click.pass_obj
def verify(server, scenario, out):
    """Run the full acceptance suite and print one pass/fail line per criterion."""
    body = {"out_dir": str(Path(out).resolve())}
    if scenario:
        body["scenario_ini"] = _read_scenario(scenario)
    data = _post(server, "/verify", body)
    for c in data["criteria"]:
        mark = "PASS" if c["passed"] else ("NOT CHECKED" if c["passed"] is None else "FAIL")
        click.echo(f"[{mark}] criterion {c['number']}: {c['name']} — {c['detail']}")
    for path in data["artifacts"]:
        click.echo(f"artifact: {path}")
    if not data["all_primary_passed"]:
        sys.exit(1)


@main.command("dump-trace")
@scenario_opt
@seed_opt
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="CSV file to write.")
@click.pass_obj
def dump_trace(server, scenario, seed, out):
    """Write the frozen channel-level table for (scenario, seed) as CSV."""
    data = _post(
        server,
        "/dump-trace",
        {"scenario_ini": _read_scenario(scenario), "seed": seed},
    )
    Path(out).write_text(data["csv_text"])
    click.echo(f"wrote {out}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, type=int, show_default=True)
def serve(host, port):
    """Run the service behind uvicorn (install the `server` extra)."""
    try:
        import uvicorn
    except ImportError as exc:  # pragma: no cover - environment dependent
        raise click.ClickException(
            "uvicorn is not installed; run `pip install uavsched[server]`"
        ) from exc
    uvicorn.run("uavsched.service.app:app", host=host, port=port)


if __name__ == "__main__":
    main()
