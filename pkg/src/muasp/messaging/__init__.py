"""Message envelope, wire codec, yellow-pages registry and transports."""

from .codec import CodecError, FrameDecoder, decode, encode
from .message import Message, MessageError, Performative
from .registry import Registry, RegistryEntry, RegistryError, RegistryService
from .tcp import RegistryClient, RegistryServer, TcpTransport
from .transport import POSTMASTER, Endpoint, InProcessTransport, Transport

__all__ = [
    "POSTMASTER",
    "CodecError",
    "Endpoint",
    "FrameDecoder",
    "InProcessTransport",
    "Message",
    "MessageError",
    "Performative",
    "Registry",
    "RegistryClient",
    "RegistryEntry",
    "RegistryError",
    "RegistryServer",
    "RegistryService",
    "TcpTransport",
    "Transport",
    "decode",
    "encode",
]
