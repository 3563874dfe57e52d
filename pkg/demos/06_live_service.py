#!/usr/bin/env python3
"""A complete live session against the running service.

Starts the service on ephemeral ports, connects as an operator console
would, replays the bundled capture file into the mocap socket, fires
cues over OSC, and prints what every renderer on the network would see
in the shared snapshots.
"""

import asyncio
import json
import socket
import subprocess
import sys
from pathlib import Path

from regie.netio.mocap import decode_mocap_line
from regie.netio.osc import OscMessage, encode
from regie.netio.service import Endpoint, Service, ServiceConfig

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"


async def wait_for(ws, predicate, what):
    while True:
        frame = json.loads(await ws.recv())
        if frame.get("type") == "snapshot" and predicate(frame):
            print(f"tick {frame['tick']:4d}  {what}")
            return frame


async def main() -> None:
    config = ServiceConfig(
        level_path=FIXTURES / "figure4.level.json",
        cuesheet_path=FIXTURES / "figure4.cue.json",
        clips_path=FIXTURES / "clips.json",
        mocap=Endpoint("127.0.0.1", 0),
        osc_in=Endpoint("127.0.0.1", 0),
        osc_out=Endpoint("127.0.0.1", 9),
        serve=Endpoint("127.0.0.1", 0),
    )
    service = Service(config)
    stop, ready = asyncio.Event(), asyncio.Event()
    bound: dict[str, Endpoint] = {}

    def on_ready(endpoints):
        bound.update(endpoints)
        ready.set()

    task = asyncio.create_task(service.run(stop=stop, on_ready=on_ready))
    await ready.wait()
    for name, endpoint in bound.items():
        print(f"{name:>8} on {endpoint}")

    from websockets.asyncio.client import connect

    async with connect(f"ws://{bound['serve']}") as ws:
        hello = json.loads(await ws.recv())
        print("\nhello:", hello["level"]["name"], "cuelists", list(hello["cuelists"]))

        print("\nreplaying the captured walk at 10x...")
        simulator = await asyncio.create_subprocess_exec(
            sys.executable, "-m", "regie.netio.cli", "simulate-mocap",
            str(FIXTURES / "walk_arc.ndjson"),
            "--to", f"udp://127.0.0.1:{bound['mocap'].port}", "--speed", "10",
            stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL,
        )
        await simulator.wait()
        # let the walk land before the cue so the anchor is its last frame
        walk_end = decode_mocap_line(
            (FIXTURES / "walk_arc.ndjson").read_text().splitlines()[-1]
        ).root
        frame = await wait_for(
            ws,
            lambda f: abs(f["avatars"]["Avatar1"]["world"]["pos"][0] - walk_end.position.x) < 1e-9,
            "capture replay landed",
        )
        raw = frame["avatars"]["Avatar1"]["world"]
        print(f"           Avatar1 raw root: ({raw['pos'][0]:.2f}, {raw['pos'][1]:.2f}) yaw {raw['yaw']:.1f}")

        udp = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        osc_in = ("127.0.0.1", bound["osc_in"].port)

        udp.sendto(encode(OscMessage("/regie/go", ())), osc_in)
        frame = await wait_for(ws, lambda f: f["cue"] == 10, "cue 10: places")
        a1 = frame["avatars"]["Avatar1"]["world"]
        print(f"           Avatar1 snapped to its goal: ({a1['pos'][0]:.2f}, {a1['pos'][1]:.2f}) yaw {a1['yaw']:.1f}")

        udp.sendto(encode(OscMessage("/regie/go", ())), osc_in)
        frame = await wait_for(ws, lambda f: f["cue"] == 20, "cue 20: second entrance")
        print("           Avatar2 clips:", frame["avatars"]["Avatar2"]["clips"])

        udp.sendto(encode(OscMessage("/regie/go", ())), osc_in)
        frame = await wait_for(ws, lambda f: f["cue"] == 30, "cue 30: finale")
        frame = await wait_for(ws, lambda f: f["sequences"], "finale sequence running")
        print("           sequence:", frame["sequences"][0])

        frame = await wait_for(
            ws, lambda f: f["camera"]["fade_level"] < 0.5, "camera past half fade-out"
        )
        print(f"           fade level {frame['camera']['fade_level']:.2f}")
        udp.close()

    stop.set()
    await task
    print("\nmocap frames delivered:", service.mocap_stream.delivered,
          "stale dropped:", service.mocap_stream.stale_dropped)


if __name__ == "__main__":
    asyncio.run(main())
