"""Command line entry points.

``regie run`` starts the live service, ``regie check`` validates show
documents without running anything, and ``regie simulate-mocap``
replays a recorded capture file against a running service.  The log
level comes from the REGIE_LOG environment variable (default INFO).
"""

from __future__ import annotations

import asyncio
import json
import logging
import os
import socket
import sys
import time
from pathlib import Path

import click

from ..cueengine import CuesheetFormatError, parse_cuesheet
from ..motionplayer import ClipCatalogError, UnknownClip, load_clip_catalog
from ..scene import LevelFormatError, load_level
from .service import (
    MAX_TICK_RATE,
    MIN_TICK_RATE,
    EndpointError,
    Service,
    ServiceConfig,
    parse_udp_endpoint,
    parse_ws_endpoint,
)

log = logging.getLogger("regie.cli")

_PATH = click.Path(exists=True, dir_okay=False, path_type=Path)


@click.group()
def main() -> None:
    """Headless staging engine for live avatar shows."""
    level_name = os.environ.get("REGIE_LOG", "INFO").upper()
    logging.basicConfig(
        level=getattr(logging, level_name, logging.INFO),
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )


def _load_errors(exc: Exception) -> list[str]:
    causes = getattr(exc, "errors", None)
    if causes:
        return [str(item) for item in causes]
    return [str(exc)]


@main.command()
@click.option("--level", "level_path", required=True, type=_PATH, help="Level geometry file.")
@click.option("--cuesheet", "cuesheet_path", required=True, type=_PATH, help="Show cue sheet.")
@click.option("--clips", "clips_path", type=_PATH, default=None, help="Animation clip catalog.")
@click.option(
    "--tick",
    default=60,
    show_default=True,
    type=click.IntRange(MIN_TICK_RATE, MAX_TICK_RATE),
    help="Engine tick rate in Hz.",
)
@click.option("--mocap", default="udp://0.0.0.0:7000", show_default=True, help="Capture intake.")
@click.option("--osc-in", default="udp://0.0.0.0:8000", show_default=True, help="OSC remote intake.")
@click.option("--osc-out", default="udp://127.0.0.1:9000", show_default=True, help="OSC effect target.")
@click.option("--serve", default="127.0.0.1:8080", show_default=True, help="WebSocket console address.")
def run(
    level_path: Path,
    cuesheet_path: Path,
    clips_path: Path | None,
    tick: int,
    mocap: str,
    osc_in: str,
    osc_out: str,
    serve: str,
) -> None:
    """Run the live service until interrupted.

    Prints one ``listening <name> <scheme>://host:port`` line per bound
    socket once everything is up, so wrappers can discover ephemeral
    ports (ask for them with port 0).
    """
    try:
        config = ServiceConfig(
            level_path=level_path,
            cuesheet_path=cuesheet_path,
            clips_path=clips_path,
            tick_rate=tick,
            mocap=parse_udp_endpoint(mocap),
            osc_in=parse_udp_endpoint(osc_in),
            osc_out=parse_udp_endpoint(osc_out),
            serve=parse_ws_endpoint(serve),
        )
    except (EndpointError, ValueError) as exc:
        raise click.ClickException(str(exc)) from None

    try:
        service = Service(config)
    except (LevelFormatError, CuesheetFormatError, ClipCatalogError, UnknownClip) as exc:
        for line in _load_errors(exc):
            click.echo(f"error: {line}", err=True)
        raise SystemExit(1) from None

    def announce(bound: dict[str, object]) -> None:
        for name in ("mocap", "osc_in", "osc_out"):
            click.echo(f"listening {name} udp://{bound[name]}")
        if "serve" in bound:
            click.echo(f"listening serve ws://{bound['serve']}")
        sys.stdout.flush()

    try:
        asyncio.run(service.run(on_ready=announce))
    except KeyboardInterrupt:
        click.echo("stopped", err=True)


@main.command()
@click.argument("level", type=_PATH)
@click.argument("cuesheet", type=_PATH)
@click.option("--clips", "clips_path", type=_PATH, default=None, help="Also check clip references.")
def check(level: Path, cuesheet: Path, clips_path: Path | None) -> None:
    """Validate show documents; exit 1 if anything is wrong."""
    problems: list[str] = []
    parsed_level = None
    try:
        parsed_level = load_level(level.read_text("utf-8"))
    except LevelFormatError as exc:
        problems += [f"{level}: {line}" for line in _load_errors(exc)]

    parsed_sheet = None
    if parsed_level is not None:
        try:
            parsed_sheet = parse_cuesheet(cuesheet.read_text("utf-8"), parsed_level)
        except CuesheetFormatError as exc:
            problems += [f"{cuesheet}: {line}" for line in _load_errors(exc)]

    if clips_path is not None and parsed_sheet is not None:
        try:
            catalog = load_clip_catalog(clips_path.read_text("utf-8"))
        except ClipCatalogError as exc:
            problems += [f"{clips_path}: {line}" for line in _load_errors(exc)]
        else:
            from .service import _clip_references

            for clip_id in sorted(_clip_references(parsed_sheet) - set(catalog)):
                problems.append(f"{cuesheet}: clip {clip_id!r} not in catalog")

    for line in problems:
        click.echo(line)
    if problems:
        raise SystemExit(1)
    click.echo("ok")


@main.command("simulate-mocap")
@click.argument("frames", type=_PATH)
@click.option("--to", "target", default="udp://127.0.0.1:7000", show_default=True)
@click.option("--speed", default=1.0, show_default=True, help="Playback speed multiplier.")
@click.option("--loop", "looping", is_flag=True, help="Replay forever, rebasing timestamps.")
def simulate_mocap(frames: Path, target: str, speed: float, looping: bool) -> None:
    """Replay an ndjson capture file to a UDP endpoint, paced by its timestamps."""
    if speed <= 0:
        raise click.ClickException("--speed must be positive")
    try:
        endpoint = parse_udp_endpoint(target)
    except EndpointError as exc:
        raise click.ClickException(str(exc)) from None

    lines = [line for line in frames.read_text("utf-8").splitlines() if line.strip()]
    if not lines:
        raise click.ClickException(f"{frames}: no frames")
    records = [json.loads(line) for line in lines]

    sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
    addr = (endpoint.host, endpoint.port)
    offset = 0.0
    sent = 0
    try:
        while True:
            base = None
            for record in records:
                t = float(record["t"])
                if base is not None:
                    time.sleep(max(0.0, (t - base) / speed))
                base = t
                shifted = dict(record, t=t + offset)
                sock.sendto(json.dumps(shifted).encode("utf-8"), addr)
                sent += 1
            if not looping:
                break
            # keep timestamps increasing across passes so nothing reads as stale
            span = float(records[-1]["t"]) - float(records[0]["t"])
            offset += span + 1.0 / 60.0
    except KeyboardInterrupt:
        pass
    finally:
        sock.close()
    click.echo(f"sent {sent} frames to udp://{endpoint}")


if __name__ == "__main__":
    main()
