"""Asynchronous point-to-point delivery behind one interface.

:class:`InProcessTransport` is the deterministic reference used in
simulation; :class:`~muasp.messaging.tcp.TcpTransport` carries the same
frames over sockets.  Both keep per-(sender, receiver) FIFO order and bounce
a FAILURE back to the sender when the receiver is unknown.
"""

from __future__ import annotations

import itertools
import logging
import threading
import time
from collections import defaultdict, deque

from .codec import decode, encode
from .message import Content, Message, Performative
from .registry import Registry, RegistryEntry

log = logging.getLogger(__name__)

POSTMASTER = "postmaster"


class Transport:
    def __init__(self, registry: Registry | None = None):
        self.registry = registry if registry is not None else Registry()
        self._id_lock = threading.Lock()
        self._ids: dict[str, itertools.count] = defaultdict(lambda: itertools.count(1))
        self._counter_lock = threading.Condition()
        self.sent = 0
        self.delivered = 0

    # -- naming ----------------------------------------------------------

    def register(self, entry: RegistryEntry) -> None:
        self.registry.register(entry)

    def lookup(self, role: str) -> list[str]:
        return self.registry.lookup(role)

    def next_id(self, sender: str) -> str:
        with self._id_lock:
            return f"{sender}#{next(self._ids[sender])}"

    def endpoint(self, name: str) -> Endpoint:
        return Endpoint(name, self)

    # -- delivery ----------------------------------------------------------

    def send(self, m: Message) -> None:
        m.validate()
        if m.receiver not in self.registry:
            self._bounce(m)
            return
        with self._counter_lock:
            self.sent += 1
        self._transmit(m)

    def _bounce(self, m: Message) -> None:
        if m.sender not in self.registry:
            log.warning("dropping %s: neither end is registered", m)
            return
        failure = Message(
            Performative.FAILURE,
            POSTMASTER,
            m.sender,
            self.next_id(POSTMASTER),
            f"unknown receiver {m.receiver}",
            in_reply_to=m.id,
        )
        with self._counter_lock:
            self.sent += 1
        self._transmit(failure)

    def _delivered(self) -> None:
        with self._counter_lock:
            self.delivered += 1
            self._counter_lock.notify_all()

    def wait_quiescent(self, timeout: float = 10.0) -> bool:
        """Block until every sent message has reached its inbox."""
        deadline = time.monotonic() + timeout
        with self._counter_lock:
            while self.delivered < self.sent:
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    return False
                self._counter_lock.wait(remaining)
        return True

    def _transmit(self, m: Message) -> None:
        raise NotImplementedError

    def drain(self, name: str) -> list[Message]:
        raise NotImplementedError

    def close(self) -> None:
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class InProcessTransport(Transport):
    """Single-process queues; every message still goes through the codec."""

    def __init__(self, registry: Registry | None = None):
        super().__init__(registry)
        self._queues: dict[str, deque] = defaultdict(deque)
        self._lock = threading.Lock()

    def _transmit(self, m: Message) -> None:
        wire = decode(encode(m))
        with self._lock:
            self._queues[m.receiver].append(wire)
        self._delivered()

    def drain(self, name: str) -> list[Message]:
        with self._lock:
            q = self._queues.pop(name, None)
        return list(q) if q else []


class Endpoint:
    """A component's handle on a transport: allocates ids and sends."""

    def __init__(self, name: str, transport: Transport):
        self.name = name
        self.transport = transport

    def send(
        self,
        performative: Performative,
        receiver: str,
        content: Content = (),
        in_reply_to: str | None = None,
    ) -> Message:
        m = Message(performative, self.name, receiver, self.transport.next_id(self.name), content, in_reply_to)
        self.transport.send(m)
        return m

    def reply(self, to: Message, performative: Performative, content: Content = ()) -> Message:
        return self.send(performative, to.sender, content, in_reply_to=to.id)

    def drain(self) -> list[Message]:
        return self.transport.drain(self.name)
