"""Yellow-pages registry: components register a name and roles, others look
them up by role."""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field

from ..asp import Atom, Constant
from .message import Message, Performative


class RegistryError(Exception):
    pass


@dataclass(frozen=True)
class RegistryEntry:
    name: str
    roles: frozenset = field(default_factory=frozenset)
    address: str = ""

    def __post_init__(self) -> None:
        if not isinstance(self.roles, frozenset):
            object.__setattr__(self, "roles", frozenset(self.roles))


class Registry:
    def __init__(self) -> None:
        self._entries: dict[str, RegistryEntry] = {}
        self._lock = threading.Lock()

    def register(self, entry: RegistryEntry) -> None:
        with self._lock:
            if entry.name in self._entries:
                raise RegistryError(f"name already registered: {entry.name}")
            self._entries[entry.name] = entry

    def unregister(self, name: str) -> None:
        with self._lock:
            self._entries.pop(name, None)

    def lookup(self, role: str) -> list[str]:
        """Names carrying ``role``, in registration order."""
        with self._lock:
            return [e.name for e in self._entries.values() if role in e.roles]

    def get(self, name: str) -> RegistryEntry | None:
        with self._lock:
            return self._entries.get(name)

    def __contains__(self, name: str) -> bool:
        with self._lock:
            return name in self._entries

    def names(self) -> list[str]:
        with self._lock:
            return list(self._entries)


class RegistryService:
    """The registry as a component speaking the message protocol.

    ``REQUEST(register(name,role,...))`` registers a component;
    ``QUERY_IF(lookup(role))`` is answered by a CONFIRM carrying the
    registered names as zero-arity atoms.
    """

    def __init__(self, registry: Registry | None = None, name: str = "registry"):
        self.registry = registry if registry is not None else Registry()
        self.name = name
        self._ids = itertools.count(1)

    def _next_id(self) -> str:
        return f"{self.name}#{next(self._ids)}"

    def handle(self, m: Message) -> Message:
        c = m.content
        try:
            if m.performative is Performative.REQUEST and isinstance(c, Atom) and c.predicate == "register":
                if not c.args:
                    raise RegistryError("register needs a component name")
                name, *roles = (str(t) for t in c.args)
                self.registry.register(RegistryEntry(name, frozenset(roles), f"msg:{name}"))
                return m.reply(Performative.CONFIRM, self._next_id(), c)
            if m.performative is Performative.QUERY_IF and isinstance(c, Atom) and c.predicate == "lookup":
                if len(c.args) != 1:
                    raise RegistryError("lookup takes exactly one role")
                names = self.registry.lookup(str(c.args[0]))
                return m.reply(Performative.CONFIRM, self._next_id(), tuple(Atom(n) for n in names))
        except RegistryError as e:
            return m.reply(Performative.FAILURE, self._next_id(), str(e))
        return m.reply(Performative.FAILURE, self._next_id(), f"unsupported registry message {c}")


def register_message(sender: str, id: str, entry: RegistryEntry, registry_name: str = "registry") -> Message:
    args = (Constant(entry.name),) + tuple(Constant(r) for r in sorted(entry.roles))
    return Message(Performative.REQUEST, sender, registry_name, id, Atom("register", args))


def lookup_message(sender: str, id: str, role: str, registry_name: str = "registry") -> Message:
    return Message(Performative.QUERY_IF, sender, registry_name, id, Atom("lookup", (Constant(role),)))
