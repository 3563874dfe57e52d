"""The live service: one fixed-rate loop around the cue engine.

Everything that can change show state funnels into a single queue
(operator actions from WebSocket clients, decoded device events, OSC
remote commands) and is drained once per tick, so every externally
visible state is the result of a deterministic sequence of inputs.
The tick itself runs in a strict order:

    drain queue -> apply mocap -> advance players/fades/sequences
    -> act on effects -> broadcast snapshot

which guarantees that a command accepted before a tick is reflected
in the very next snapshot.

Mocap frames arrive over UDP as newline-delimited JSON, one frame per
line, possibly several lines per datagram.  OSC commands arrive over a
second UDP socket under the ``/regie/`` address space.  Snapshots go
out to every connected WebSocket client; clients may send JSON command
objects back but never receive private state, so a misbehaving client
cannot desynchronize the others.
"""

from __future__ import annotations

import asyncio
import json
import logging
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

from websockets.asyncio.server import Server, ServerConnection, broadcast, serve

from .. import devio
from ..cueengine import (
    Effect,
    Engine,
    EngineError,
    PlaySalient,
    SendOsc,
    StartSequence,
    TriggerSalient,
    parse_cuesheet,
)
from ..motionplayer import (
    FINISHED,
    Idle,
    MotionError,
    PlayerState,
    SequencePlayback,
    UnknownClip,
    load_clip_catalog,
    output as player_output,
    sequence_tick,
    tick as player_tick,
    trigger_salient,
)
from ..scene import MocapSource, load_level
from .mocap import MocapStream
from .osc import OscError, OscMessage, decode, encode
from .snapshot import build_hello, build_snapshot, to_wire

log = logging.getLogger("regie.service")

MIN_TICK_RATE = 10
MAX_TICK_RATE = 240

EFFECT_LOG_LENGTH = 50


class EndpointError(ValueError):
    """An endpoint string could not be parsed."""


@dataclass(frozen=True)
class Endpoint:
    host: str
    port: int

    def __str__(self) -> str:
        return f"{self.host}:{self.port}"


def _split_host_port(text: str, where: str) -> Endpoint:
    host, sep, port_text = text.rpartition(":")
    if not sep or not host:
        raise EndpointError(f"{where}: expected host:port, got {text!r}")
    try:
        port = int(port_text)
    except ValueError:
        raise EndpointError(f"{where}: port is not a number in {text!r}") from None
    if not 0 <= port <= 65535:
        raise EndpointError(f"{where}: port {port} out of range")
    return Endpoint(host, port)


def parse_udp_endpoint(text: str) -> Endpoint:
    """Parse ``udp://host:port``; the scheme prefix is required."""
    if not text.startswith("udp://"):
        raise EndpointError(f"expected udp://host:port, got {text!r}")
    return _split_host_port(text[len("udp://") :], text)


def parse_ws_endpoint(text: str) -> Endpoint:
    """Parse a plain ``host:port`` WebSocket listen address."""
    return _split_host_port(text, text)


@dataclass(frozen=True)
class ServiceConfig:
    """Where to load the show from and where to listen.

    Port 0 asks the OS for an ephemeral port; the bound address is
    reported through :attr:`Service.bound` once the service is up.
    """

    level_path: Path
    cuesheet_path: Path
    clips_path: Path | None = None
    tick_rate: int = 60
    mocap: Endpoint = Endpoint("0.0.0.0", 7000)
    osc_in: Endpoint = Endpoint("0.0.0.0", 8000)
    osc_out: Endpoint = Endpoint("127.0.0.1", 9000)
    serve: Endpoint | None = Endpoint("127.0.0.1", 8080)

    def __post_init__(self) -> None:
        if not isinstance(self.tick_rate, int) or isinstance(self.tick_rate, bool):
            raise ValueError(f"tick rate must be an integer, got {self.tick_rate!r}")
        if not MIN_TICK_RATE <= self.tick_rate <= MAX_TICK_RATE:
            raise ValueError(
                f"tick rate {self.tick_rate} outside {MIN_TICK_RATE}..{MAX_TICK_RATE}"
            )


class _DatagramSink(asyncio.DatagramProtocol):
    """Forwards received datagrams to a callback, drops transport errors."""

    def __init__(self, on_datagram: Callable[[bytes], None]) -> None:
        self._on_datagram = on_datagram

    def datagram_received(self, data: bytes, addr: Any) -> None:
        self._on_datagram(data)

    def error_received(self, exc: OSError) -> None:
        log.warning("datagram socket error: %s", exc)


def _clip_references(cuesheet: Any) -> set[str]:
    refs: set[str] = set()
    for cue in cuesheet.cues.values():
        for spec in cue.sets:
            animation = getattr(spec, "animation", None)
            if isinstance(animation, PlaySalient):
                refs.add(animation.salient)
                refs.add(animation.idle)
    return refs


class Service:
    """Owns the engine, the players and every network face of the show."""

    def __init__(self, config: ServiceConfig) -> None:
        self.config = config
        for path in (config.level_path, config.cuesheet_path, config.clips_path):
            if path is not None and not Path(path).is_file():
                raise FileNotFoundError(f"no such file: {path}")
        self.level = load_level(Path(config.level_path).read_text("utf-8"))
        self.cuesheet = parse_cuesheet(
            Path(config.cuesheet_path).read_text("utf-8"), self.level
        )
        if config.clips_path is not None:
            self.clips = load_clip_catalog(Path(config.clips_path).read_text("utf-8"))
            missing = sorted(_clip_references(self.cuesheet) - set(self.clips))
            if missing:
                raise UnknownClip(missing[0])
        else:
            self.clips = {}

        self.engine = Engine(self.cuesheet, self.level)
        self.period = 1.0 / config.tick_rate
        self.tick_count = 0
        self.players: dict[str, PlayerState] = {}
        self.player_outputs: dict[str, Any] = {}
        self.sequences: list[SequencePlayback] = []
        self.effects_log: deque[tuple[int, Effect]] = deque(maxlen=EFFECT_LOG_LENGTH)
        self.bus = devio.DispatchBus()
        self.tracker = devio.GamepadTracker()
        self.mocap_stream = MocapStream()
        self.unrouted_osc = 0
        self.rejected_commands = 0
        self.latest_snapshot: dict[str, Any] | None = None
        self.bound: dict[str, Endpoint] = {}

        self._mailbox: dict[str, Any] = {}
        self._queue: deque[tuple[str, Any]] = deque()
        self._clients: set[ServerConnection] = set()
        self._osc_out: asyncio.DatagramTransport | None = None
        self._subject_avatars: dict[str, list[str]] = {}
        for avatar in self.cuesheet.cast.avatars:
            if isinstance(avatar.source, MocapSource):
                self._subject_avatars.setdefault(avatar.source.subject, []).append(
                    avatar.id
                )

    # -- intake ------------------------------------------------------------

    def submit_action(self, action: devio.Action) -> None:
        """Queue an operator action for the next tick."""
        self._queue.append(("action", action))

    def submit_event(self, event: devio.InputEvent) -> None:
        """Queue a raw device event for the next tick."""
        self._queue.append(("event", event))

    def submit_mocap_datagram(self, data: bytes) -> None:
        """Feed one capture datagram; each line is one frame, latest wins."""
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError:
            self.mocap_stream.malformed_dropped += 1
            return
        for line in text.splitlines():
            if not line.strip():
                continue
            frame = self.mocap_stream.feed(line)
            if frame is not None:
                self._mailbox[frame.subject] = frame

    def submit_osc_datagram(self, data: bytes) -> None:
        """Decode one OSC packet and route it into the command queue."""
        try:
            message = decode(data)
        except OscError as exc:
            self.rejected_commands += 1
            log.warning("bad OSC packet: %s", exc)
            return
        try:
            self._route_osc(message)
        except (IndexError, TypeError, ValueError) as exc:
            self.rejected_commands += 1
            log.warning("OSC %s: bad arguments %r (%s)", message.address, message.args, exc)

    def _route_osc(self, message: OscMessage) -> None:
        address, args = message.address, message.args
        if address == "/regie/go":
            self.submit_action(devio.Go())
        elif address == "/regie/goback":
            self.submit_action(devio.GoBack())
        elif address == "/regie/cuelist":
            name = args[0] if args else None
            if name is not None and not isinstance(name, str):
                raise TypeError("cuelist name must be a string")
            self.submit_action(devio.SelectCuelist(name or None))
        elif address == "/regie/bypass":
            cue, set_index, flag = (int(args[0]), int(args[1]), int(args[2]))
            mode = "toggle" if flag < 0 else ("on" if flag else "off")
            self.submit_action(devio.Bypass(cue if cue > 0 else None, set_index, mode))
        elif address == "/regie/key":
            key = str(args[0])
            edge = devio.Edge(str(args[1])) if len(args) > 1 else devio.Edge.DOWN
            self.submit_event(
                devio.InputEvent(devio.DeviceKind.KEYBOARD, 0, key, 1.0, edge)
            )
        elif address == "/regie/gamepad":
            index, control, value = int(args[0]), str(args[1]), float(args[2])
            if control in ("lx", "ly", "rx", "ry"):
                edge = devio.Edge.MOVE
            else:
                edge = devio.Edge.DOWN if value > 0 else devio.Edge.UP
            self.submit_event(
                devio.InputEvent(devio.DeviceKind.GAMEPAD, index, control, value, edge)
            )
        elif address == "/regie/midi":
            status, data1, data2 = int(args[0]), int(args[1]), int(args[2])
            if status & 0xF0 != 0xB0:
                raise ValueError(f"only control change supported, got status {status:#x}")
            edge = devio.Edge.DOWN if data2 > 0 else devio.Edge.UP
            self.submit_event(
                devio.InputEvent(
                    devio.DeviceKind.MIDI, status & 0x0F, f"cc:{data1}", data2 / 127.0, edge
                )
            )
        else:
            self.unrouted_osc += 1
            log.debug("unrouted OSC address %s", address)

    # -- the tick ------------------------------------------------------------

    def tick(self, dt: float | None = None) -> dict[str, Any]:
        """Advance the show by one frame and return the snapshot."""
        if dt is None:
            dt = self.period
        self.tick_count += 1
        effects = self._drain_queue()
        effects.extend(self._run_actions(self.tracker.poll(self.cuesheet.devices, dt)))
        self._apply_mocap()
        self._advance(dt)
        self._act_on_effects(effects)
        snapshot = build_snapshot(
            self.tick_count,
            self.tick_count * self.period,
            self.engine,
            self.player_outputs,
            self.sequences,
            self.effects_log,
        )
        self.latest_snapshot = snapshot
        if self._clients:
            broadcast(self._clients, to_wire(snapshot))
        return snapshot

    def _drain_queue(self) -> list[Effect]:
        effects: list[Effect] = []
        pending = len(self._queue)
        for _ in range(pending):
            kind, payload = self._queue.popleft()
            if kind == "event":
                self.tracker.update(payload)
                actions = devio.dispatch(payload, self.cuesheet.devices, self.bus)
            else:
                actions = [payload]
            effects.extend(self._run_actions(actions))
        return effects

    def _run_actions(self, actions: list[devio.Action]) -> list[Effect]:
        effects: list[Effect] = []
        for action in actions:
            try:
                effects.extend(self.engine.execute(action))
            except (EngineError, devio.UnknownTarget, ValueError) as exc:
                self.rejected_commands += 1
                log.warning("action %r rejected: %s", action, exc)
        return effects

    def _apply_mocap(self) -> None:
        for subject, frame in self._mailbox.items():
            for avatar_id in self._subject_avatars.get(subject, ()):
                self.engine.live_roots[avatar_id] = frame.root

    def _advance(self, dt: float) -> None:
        self.engine.tick_fade(dt)
        for avatar_id, state in list(self.players.items()):
            self.players[avatar_id], self.player_outputs[avatar_id] = player_tick(
                state, dt
            )
        kept: list[SequencePlayback] = []
        for playback in self.sequences:
            advanced = sequence_tick(playback, dt)
            if advanced is not FINISHED:
                kept.append(advanced)
        self.sequences = kept

    def _act_on_effects(self, effects: list[Effect]) -> None:
        for effect in effects:
            if isinstance(effect, SendOsc):
                self._send_osc(effect)
            elif isinstance(effect, TriggerSalient):
                self._trigger(effect)
            elif isinstance(effect, StartSequence):
                self.sequences.append(
                    SequencePlayback(
                        effect.sequence,
                        float(effect.start_frame),
                        effect.start_frame,
                        effect.end_frame,
                        effect.rate,
                    )
                )
            # fades are advanced by the engine itself; audio and particle
            # effects only exist for the renderer, which reads the log
            self.effects_log.append((self.tick_count, effect))

    def _send_osc(self, effect: SendOsc) -> None:
        if self._osc_out is None:
            return
        try:
            self._osc_out.sendto(encode(OscMessage(effect.address, effect.args)))
        except (OscError, OSError) as exc:
            log.warning("OSC out %s failed: %s", effect.address, exc)

    def _trigger(self, effect: TriggerSalient) -> None:
        salient = self.clips.get(effect.salient)
        idle = self.clips.get(effect.idle)
        if salient is None or idle is None:
            log.warning(
                "no clip for %r on %s, trigger dropped",
                effect.salient if salient is None else effect.idle,
                effect.avatar,
            )
            return
        state = self.players.get(effect.avatar, Idle(idle, 0.0))
        try:
            advanced = trigger_salient(state, salient, idle)
        except MotionError as exc:
            log.warning("trigger on %s rejected: %s", effect.avatar, exc)
            return
        self.players[effect.avatar] = advanced
        self.player_outputs[effect.avatar] = player_output(advanced)

    # -- client protocol -----------------------------------------------------

    async def _handle_client(self, connection: ServerConnection) -> None:
        self._clients.add(connection)
        try:
            await connection.send(to_wire(build_hello(self.cuesheet, self.level)))
            if self.latest_snapshot is not None:
                await connection.send(to_wire(self.latest_snapshot))
            async for raw in connection:
                self._handle_client_message(raw)
        finally:
            self._clients.discard(connection)

    def _handle_client_message(self, raw: str | bytes) -> None:
        try:
            if isinstance(raw, bytes):
                raw = raw.decode("utf-8")
            data = json.loads(raw)
            action_or_event = decode_command(data)
        except (UnicodeDecodeError, ValueError, KeyError, TypeError) as exc:
            self.rejected_commands += 1
            log.warning("bad client command %.120r: %s", raw, exc)
            return
        if isinstance(action_or_event, devio.InputEvent):
            self.submit_event(action_or_event)
        else:
            self.submit_action(action_or_event)

    # -- lifecycle -------------------------------------------------------------

    async def run(
        self,
        *,
        stop: asyncio.Event | None = None,
        on_ready: Callable[[dict[str, Endpoint]], None] | None = None,
    ) -> None:
        """Bind all sockets, then tick until ``stop`` is set."""
        loop = asyncio.get_running_loop()
        mocap_transport, _ = await loop.create_datagram_endpoint(
            lambda: _DatagramSink(self.submit_mocap_datagram),
            local_addr=(self.config.mocap.host, self.config.mocap.port),
        )
        osc_in_transport, _ = await loop.create_datagram_endpoint(
            lambda: _DatagramSink(self.submit_osc_datagram),
            local_addr=(self.config.osc_in.host, self.config.osc_in.port),
        )
        self._osc_out, _ = await loop.create_datagram_endpoint(
            asyncio.DatagramProtocol,
            remote_addr=(self.config.osc_out.host, self.config.osc_out.port),
        )
        server: Server | None = None
        if self.config.serve is not None:
            server = await serve(
                self._handle_client, self.config.serve.host, self.config.serve.port
            )

        self.bound = {
            "mocap": _bound_endpoint(mocap_transport),
            "osc_in": _bound_endpoint(osc_in_transport),
            "osc_out": self.config.osc_out,
        }
        if server is not None:
            host, port = next(iter(server.sockets)).getsockname()[:2]
            self.bound["serve"] = Endpoint(host, port)
        if on_ready is not None:
            on_ready(self.bound)

        try:
            next_t = loop.time()
            while stop is None or not stop.is_set():
                self.tick()
                next_t += self.period
                delay = next_t - loop.time()
                if delay <= 0:
                    # fell behind; rebase rather than trying to catch up
                    next_t = loop.time()
                    delay = 0.0
                # sleep(0) still yields, so receive callbacks always run
                await asyncio.sleep(delay)
        finally:
            mocap_transport.close()
            osc_in_transport.close()
            self._osc_out.close()
            self._osc_out = None
            if server is not None:
                server.close()
                await server.wait_closed()


def _bound_endpoint(transport: asyncio.DatagramTransport) -> Endpoint:
    host, port = transport.get_extra_info("sockname")[:2]
    return Endpoint(host, port)


def decode_command(data: Any) -> devio.Action | devio.InputEvent:
    """Decode one client command object into an action or a raw event.

    The command grammar mirrors the operator surface: ``go``, ``goback``,
    ``select``, ``bypass``, ``nudge``, ``rotate``, ``fader`` and ``event``
    for raw device injection.  Raises ValueError on anything else.
    """
    if not isinstance(data, dict):
        raise ValueError("command must be an object")
    cmd = data.get("cmd")
    if cmd == "go":
        return devio.Go()
    if cmd == "goback":
        return devio.GoBack()
    if cmd == "select":
        name = data.get("name")
        if name is not None and not isinstance(name, str):
            raise ValueError("select: name must be a string or null")
        return devio.SelectCuelist(name)
    if cmd == "bypass":
        cue = data.get("cue")
        if cue is not None and (isinstance(cue, bool) or not isinstance(cue, int)):
            raise ValueError("bypass: cue must be an integer or null")
        mode = data.get("mode", "toggle")
        if mode not in ("on", "off", "toggle"):
            raise ValueError(f"bypass: bad mode {mode!r}")
        return devio.Bypass(cue, int(data["set"]), mode)
    if cmd == "nudge":
        return devio.Nudge(str(data["target"]), float(data["dx"]), float(data["dy"]))
    if cmd == "rotate":
        return devio.Rotate(str(data["target"]), float(data["degrees"]))
    if cmd == "fader":
        return devio.Fader(str(data["path"]), float(data["value"]))
    if cmd == "event":
        return devio.InputEvent(
            devio.DeviceKind(str(data["kind"])),
            int(data.get("index", 0)),
            str(data["control"]),
            float(data.get("value", 1.0)),
            devio.Edge(str(data.get("edge", "down"))),
        )
    raise ValueError(f"unknown command {cmd!r}")
