"""Network faces of the engine: OSC, mocap intake, snapshots, the service."""

from .mocap import MalformedFrame, MocapStream, StaleFrame, decode_mocap_line
from .osc import InvalidAddress, MalformedPacket, OscError, OscMessage, decode, encode
from .service import (
    Endpoint,
    EndpointError,
    Service,
    ServiceConfig,
    decode_command,
    parse_udp_endpoint,
    parse_ws_endpoint,
)
from .snapshot import build_hello, build_snapshot, effect_to_dict, to_wire

__all__ = [
    "MalformedFrame",
    "MocapStream",
    "StaleFrame",
    "decode_mocap_line",
    "InvalidAddress",
    "MalformedPacket",
    "OscError",
    "OscMessage",
    "decode",
    "encode",
    "Endpoint",
    "EndpointError",
    "Service",
    "ServiceConfig",
    "decode_command",
    "parse_udp_endpoint",
    "parse_ws_endpoint",
    "build_hello",
    "build_snapshot",
    "effect_to_dict",
    "to_wire",
]
