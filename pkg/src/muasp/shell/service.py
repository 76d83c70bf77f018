"""A shell driven by messages: requests and sensor pushes in, confirms out."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from ..asp import Atom
from ..messaging import Endpoint, Message, Performative
from ..query import Query
from .descriptor import SENSOR, ServiceDescriptor
from .runtime import Arrival, Phase, SelectionPolicy, Shell, TickResult, first

log = logging.getLogger(__name__)


@dataclass
class PollReport:
    """What one poll did, for transcripts."""

    tick: TickResult | None = None
    received: list[Message] = field(default_factory=list)
    sent: list[Message] = field(default_factory=list)
    signals: list[str] = field(default_factory=list)


class MicroService:
    """Binds a :class:`Shell` to a transport endpoint.

    REQUEST carries input atoms and is answered by one CONFIRM (the output
    atoms) or FAILURE.  INFORM carries sensor inputs and gets no reply.
    QUERY_IF carries a declared query and is answered by a CONFIRM holding
    the QueryResult.  Activation and stop atoms may arrive through any of
    REQUEST or INFORM.
    """

    def __init__(self, descriptor: ServiceDescriptor, endpoint: Endpoint, policy: SelectionPolicy = first):
        self.shell = Shell(descriptor, policy)
        self.endpoint = endpoint
        if descriptor.activation is None:
            self.shell.activate()

    @property
    def name(self) -> str:
        return self.endpoint.name

    @property
    def descriptor(self) -> ServiceDescriptor:
        return self.shell.descriptor

    def _fail(self, m: Message, reason: str, report: PollReport) -> None:
        if m.performative in (Performative.REQUEST, Performative.QUERY_IF):
            report.sent.append(self.endpoint.reply(m, Performative.FAILURE, reason))
        else:
            log.info("%s ignoring %s: %s", self.name, m, reason)

    def _signal(self, a: Atom, m: Message, report: PollReport) -> bool:
        d = self.descriptor
        if a == d.activation and self.shell.phase is Phase.NO_OPERATION:
            self.shell.activate()
        elif a == d.stop and self.shell.phase is Phase.ACTIVE:
            self.shell.stop()
        else:
            return False
        report.signals.append(str(a))
        return True

    def _arrivals(self, m: Message, report: PollReport) -> list[Arrival] | None:
        """Translate a message; None means it was fully handled here."""
        c = m.content
        if m.performative is Performative.QUERY_IF:
            if not isinstance(c, Query) or c not in self.descriptor.queries:
                self._fail(m, f"undeclared query {c}", report)
                return None
            return [Arrival(c, m.sender, m.id)]
        if m.performative not in (Performative.REQUEST, Performative.INFORM):
            log.info("%s ignoring %s", self.name, m)
            return None
        atoms = c if isinstance(c, tuple) else (c,) if isinstance(c, Atom) else None
        if atoms is None:
            self._fail(m, "content must be input atoms", report)
            return None
        inputs = [a for a in atoms if not self._signal(a, m, report)]
        bad = [a for a in inputs if not self.descriptor.is_input(a)]
        if bad:
            self._fail(m, f"not an input: {', '.join(map(str, bad))}", report)
            return None
        if not inputs:
            if m.performative is Performative.REQUEST:
                report.sent.append(self.endpoint.reply(m, Performative.CONFIRM, atoms))
            return None
        requester = m.sender if m.performative is Performative.REQUEST else SENSOR
        return [Arrival(a, requester, m.id) for a in inputs]

    def poll(self, run_tick: bool = True) -> PollReport:
        """Drain the inbox, run one tick if active, and send the replies."""
        report = PollReport(received=self.endpoint.drain())
        arrivals: list[Arrival] = []
        held: list[Message] = []
        for m in report.received:
            if self.shell.phase is not Phase.ACTIVE and not self._is_signal(m):
                self._fail(m, f"service is {self.shell.phase.value}", report)
                continue
            got = self._arrivals(m, report)
            if got:
                arrivals += got
                held.append(m)
        if self.shell.phase is not Phase.ACTIVE:
            for m in held:
                self._fail(m, f"service is {self.shell.phase.value}", report)
            return report
        if run_tick:
            report.tick = self.shell.tick(arrivals)
            self._reply(report.tick, {m.id: m for m in held}, report)
        return report

    def _is_signal(self, m: Message) -> bool:
        c = m.content
        atoms = c if isinstance(c, tuple) else (c,) if isinstance(c, Atom) else ()
        d = self.descriptor
        return any(a in (d.activation, d.stop) for a in atoms if a is not None)

    def _reply(self, t: TickResult, by_id: dict[str, Message], report: PollReport) -> None:
        outputs: dict[str, list[Atom]] = {}
        for e, a in t.outputs:
            outputs.setdefault(e.message_id, [])
            if a not in outputs[e.message_id]:
                outputs[e.message_id].append(a)
        done: set[str] = set()
        for e in t.failures:
            if e.message_id in by_id and e.message_id not in done:
                done.add(e.message_id)
                report.sent.append(self.endpoint.reply(by_id[e.message_id], Performative.FAILURE, "inconsistent"))
        for e, r in t.answers:
            if e.message_id in by_id:
                report.sent.append(self.endpoint.reply(by_id[e.message_id], Performative.CONFIRM, r))
                done.add(e.message_id)
        for mid, m in by_id.items():
            if mid in done or m.performative is not Performative.REQUEST:
                continue
            report.sent.append(self.endpoint.reply(m, Performative.CONFIRM, tuple(outputs.get(mid, ()))))
