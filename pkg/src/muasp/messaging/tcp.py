"""TCP transport and the network-facing registry component.

Each registered component listens on its own port; a sender keeps one
connection per (sender, receiver) pair, so TCP ordering gives per-pair FIFO.
"""

from __future__ import annotations

import logging
import socket
import socketserver
import threading
from collections import defaultdict, deque

from .codec import FrameDecoder, encode
from .message import Message
from .registry import Registry, RegistryEntry, RegistryService, lookup_message, register_message
from .transport import Transport

log = logging.getLogger(__name__)


class _Server(socketserver.ThreadingTCPServer):
    daemon_threads = True
    allow_reuse_address = True


def _read_frames(sock: socket.socket, on_message) -> None:
    decoder = FrameDecoder()
    while True:
        try:
            data = sock.recv(65536)
        except OSError:
            return
        if not data:
            return
        for m in decoder.feed(data):
            on_message(m)


class TcpTransport(Transport):
    def __init__(self, registry: Registry | None = None, host: str = "127.0.0.1"):
        super().__init__(registry)
        self.host = host
        self._servers: dict[str, _Server] = {}
        self._inboxes: dict[str, deque] = defaultdict(deque)
        self._inbox_lock = threading.Lock()
        self._conns: dict[tuple[str, str], tuple[socket.socket, threading.Lock]] = {}
        self._conn_lock = threading.Lock()

    def register(self, entry: RegistryEntry) -> None:
        if entry.name in self.registry:
            super().register(entry)  # raises the duplicate error
        transport = self
        name = entry.name

        class Handler(socketserver.BaseRequestHandler):
            def handle(self):
                _read_frames(self.request, lambda m: transport._inbox_put(name, m))

        server = _Server((self.host, 0), Handler)
        port = server.server_address[1]
        threading.Thread(target=server.serve_forever, args=(0.05,), name=f"tcp-{name}", daemon=True).start()
        self._servers[name] = server
        super().register(RegistryEntry(name, entry.roles, f"tcp://{self.host}:{port}"))

    def _inbox_put(self, name: str, m: Message) -> None:
        with self._inbox_lock:
            self._inboxes[name].append(m)
        self._delivered()

    def _connection(self, sender: str, receiver: str) -> tuple[socket.socket, threading.Lock]:
        key = (sender, receiver)
        with self._conn_lock:
            conn = self._conns.get(key)
            if conn is None:
                address = self.registry.get(receiver).address
                host, port = address.removeprefix("tcp://").rsplit(":", 1)
                sock = socket.create_connection((host, int(port)))
                sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
                conn = self._conns[key] = (sock, threading.Lock())
            return conn

    def _transmit(self, m: Message) -> None:
        frame = encode(m)
        sock, lock = self._connection(m.sender, m.receiver)
        with lock:
            sock.sendall(frame)

    def drain(self, name: str) -> list[Message]:
        with self._inbox_lock:
            q = self._inboxes.pop(name, None)
        return list(q) if q else []

    def close(self) -> None:
        with self._conn_lock:
            for sock, _ in self._conns.values():
                try:
                    sock.shutdown(socket.SHUT_RDWR)
                except OSError:
                    pass
                sock.close()
            self._conns.clear()
        for server in self._servers.values():
            server.shutdown()
            server.server_close()
        self._servers.clear()


class RegistryServer:
    """Serve a :class:`RegistryService` over TCP; replies use the same connection."""

    def __init__(self, service: RegistryService | None = None, host: str = "127.0.0.1", port: int = 0):
        self.service = service or RegistryService()
        svc = self.service
        lock = threading.Lock()

        class Handler(socketserver.BaseRequestHandler):
            def handle(self):
                def answer(m: Message) -> None:
                    with lock:
                        reply = svc.handle(m)
                    self.request.sendall(encode(reply))

                _read_frames(self.request, answer)

        self._server = _Server((host, port), Handler)
        self.address = self._server.server_address

    def start(self) -> RegistryServer:
        threading.Thread(target=self._server.serve_forever, args=(0.05,), name="registry", daemon=True).start()
        return self

    def serve_forever(self) -> None:
        self._server.serve_forever()

    def close(self) -> None:
        self._server.shutdown()
        self._server.server_close()


class RegistryClient:
    """Blocking request/reply client for a :class:`RegistryServer`."""

    def __init__(self, address: tuple[str, int], name: str):
        self.name = name
        self._sock = socket.create_connection(address)
        self._decoder = FrameDecoder()
        self._pending: deque = deque()
        self._seq = 0

    def _next_id(self) -> str:
        self._seq += 1
        return f"{self.name}#{self._seq}"

    def call(self, m: Message) -> Message:
        self._sock.sendall(encode(m))
        while not self._pending:
            data = self._sock.recv(65536)
            if not data:
                raise ConnectionError("registry closed the connection")
            self._pending.extend(self._decoder.feed(data))
        return self._pending.popleft()

    def register(self, entry: RegistryEntry) -> Message:
        return self.call(register_message(self.name, self._next_id(), entry))

    def lookup(self, role: str) -> list[str]:
        reply = self.call(lookup_message(self.name, self._next_id(), role))
        return [a.predicate for a in reply.content] if isinstance(reply.content, tuple) else []

    def close(self) -> None:
        self._sock.close()
