"""Running a system as message-passing agents, one per context.

Time advances in rounds separated by a quiescence barrier.  In each round
every context sends, to each context that has bridge rules reading it, the
part of its consequences those rules can match, but only when that part
changed since the last send.  Receivers then apply their triggered bridge
rules to what they have heard, update their knowledge base and recompute
their consequences; service contexts answer each REQUEST with CONFIRM (their
current outputs) or FAILURE.  A round in which no consequence set changes is
an equilibrium, so rounds correspond one to one with :func:`step`.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

from ..asp import Atom, match_atom
from ..messaging import Endpoint, Message, Performative, RegistryEntry, Transport
from .bridge import BridgeRule, head_instances, resolve_designators
from .context import Consequences, ServiceContext
from .system import DataState, NonConvergenceError, Schedule, System, SystemTrigger

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TranscriptLine:
    time: int
    round: int
    message: Message

    def __str__(self) -> str:
        return f"T{self.time} R{self.round} {self.message}"


@dataclass
class DistributedRun:
    trace: list[tuple[int, DataState]] = field(default_factory=list)
    iterations: list[int] = field(default_factory=list)
    transcript: list[TranscriptLine] = field(default_factory=list)
    kbs: list[tuple[int, dict]] = field(default_factory=list)

    def lines(self) -> list[str]:
        return [str(x) for x in self.transcript]


def _seq(m: Message) -> tuple:
    head, _, n = m.id.rpartition("#")
    return (m.sender, head, int(n) if n.isdigit() else 0, m.id)


class _Agent:
    def __init__(self, system: System, name: str, endpoint: Endpoint, rules: Sequence[BridgeRule]):
        self.context = system.contexts[name]
        self.name = name
        self.endpoint = endpoint
        self.kb = system.kbs[name]
        self.cons = Consequences(frozenset())
        self.inbound = [r for r in rules if r.dest == name]
        self.outbound: dict[str, list[Atom]] = {}
        for r in rules:
            for src, pattern in r.body:
                if src == name:
                    self.outbound.setdefault(r.dest, []).append(pattern)
        self.views: dict[str, frozenset] = {}
        self.last_sent: dict[str, frozenset] = {}
        self.requests: list[Message] = []

    @property
    def is_service(self) -> bool:
        return isinstance(self.context, ServiceContext)

    def send_changes(self, dests: dict[str, bool]) -> None:
        for dest, patterns in self.outbound.items():
            part = frozenset(a for a in self.cons.atoms if any(match_atom(p, a) is not None for p in patterns))
            if part == self.last_sent.get(dest, frozenset()):
                continue
            self.last_sent[dest] = part
            perf = Performative.REQUEST if dests[dest] else Performative.INFORM
            self.endpoint.send(perf, dest, tuple(sorted(part)))

    def receive_and_compute(self, time: int, trigger: SystemTrigger | None) -> list[Message]:
        got = sorted(self.endpoint.drain(), key=_seq)
        self.requests = []
        for m in got:
            if m.performative in (Performative.REQUEST, Performative.INFORM):
                self.views[m.sender] = frozenset(m.content)
                if m.performative is Performative.REQUEST:
                    self.requests.append(m)
            else:
                log.warning("%s: unexpected %s during compute phase", self.name, m)
        heads: list[tuple[str, Atom]] = []
        for r in self.inbound:
            if not self.context.triggered(time, r, self.kb):
                continue
            if trigger is not None and not trigger(time, r, self.kb):
                continue
            sets = {src: self.views.get(src, frozenset()) for src in r.sources()}
            heads += [(r.op, h) for h in head_instances(r, sets)]
        self.kb = self.context.mng(heads, self.kb)
        self.cons = self.context.acc(self.kb)
        return got

    def answer_requests(self) -> None:
        for m in self.requests:
            if self.cons.failed:
                self.endpoint.reply(m, Performative.FAILURE, "inconsistent")
            else:
                d = self.context.descriptor
                self.endpoint.reply(m, Performative.CONFIRM, tuple(a for a in sorted(self.cons.atoms) if d.is_output(a)))
        self.requests = []


def run_distributed(
    M: System,
    schedule: Schedule,
    horizon: int,
    transport: Transport,
    max_iter: int = 1000,
    trigger: SystemTrigger | None = None,
    live: bool = False,
    timeout: float = 30.0,
) -> DistributedRun:
    """Run ``M`` over ``transport``; ``live`` runs each agent phase in its own thread.

    Contexts register with the transport's registry and designators are
    resolved there.  ``M.kbs`` is only read, never written.
    """
    for name, c in M.contexts.items():
        transport.register(RegistryEntry(name, c.roles))
    rules = [cr for r in M.bridge_rules for cr in resolve_designators(r, transport.registry)]
    agents = {n: _Agent(M, n, transport.endpoint(n), rules) for n in M.contexts}
    is_service = {n: a.is_service for n, a in agents.items()}
    run = DistributedRun()
    pool = ThreadPoolExecutor(max_workers=max(1, len(agents))) if live else None

    def each(fn: Callable[[_Agent], object]) -> list:
        if pool is None:
            return [fn(a) for a in agents.values()]
        return [f.result() for f in [pool.submit(fn, a) for a in agents.values()]]

    def barrier() -> None:
        if not transport.wait_quiescent(timeout):
            raise TimeoutError("messages still in flight after barrier timeout")

    def state() -> DataState:
        return DataState.of(
            {n: a.cons.atoms for n, a in agents.items()},
            [n for n, a in agents.items() if a.cons.failed],
        )

    try:
        for t in range(horizon + 1):
            for name, u in schedule.get(t, ()):
                agents[name].kb = agents[name].context.update(agents[name].kb, u)
            if t == 0:
                for a in agents.values():
                    a.cons = a.context.acc(a.kb)
            s = prev = state()
            for rnd in range(1, max_iter + 1):
                each(lambda a: a.send_changes(is_service))
                barrier()
                received = each(lambda a: a.receive_and_compute(t, trigger))
                each(_Agent.answer_requests)
                barrier()
                replies = [m for n in agents for m in transport.drain(n)]
                msgs = sorted([m for batch in received for m in batch] + replies, key=_seq)
                run.transcript += [TranscriptLine(t, rnd, m) for m in msgs]
                nxt = state()
                if nxt == s:
                    run.trace.append((t, s))
                    run.kbs.append((t, {n: a.kb for n, a in agents.items()}))
                    run.iterations.append(rnd)
                    break
                prev, s = s, nxt
            else:
                raise NonConvergenceError(f"no equilibrium within {max_iter} rounds", prev, s, t)
    finally:
        if pool is not None:
            pool.shutdown()
    return run
