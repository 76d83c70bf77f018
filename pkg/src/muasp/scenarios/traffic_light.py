"""Virtual traffic light: one service context and five scripted cars.

Cars push ``car(C)`` and ``want_go(C,t1,Lane,T)`` to whatever context has
role ``a_traffic_light``; the light collects them through the designator
``anycar(C)`` and each car collects its own ``go``/``wait`` atoms back.
"""

from __future__ import annotations

import json
import time as _time
from dataclasses import dataclass, field
from importlib import resources
from typing import Sequence

from ..asp import AnswerSet, Atom, Constant, Integer, Program, parse_atom, parse_program, solve
from ..messaging import InProcessTransport, TcpTransport, Transport
from ..query import Query, QueryResult
from ..shell import ServiceDescriptor, evaluate, stateful, validate_descriptor
from ..mcs import (
    DataState,
    FactContext,
    ServiceContext,
    System,
    Update,
    parse_bridge_rules,
    run_distributed,
)

LIGHT = "t1"
ACTIVATION = Atom("active", (Constant(LIGHT),))

# (car, lane, requested time, scenario tick at which the request is sent)
DEFAULT_REQUESTS: tuple[tuple[str, str, int, int], ...] = (
    ("c1", "ns", 2, 0),
    ("c2", "ns", 2, 0),
    ("c3", "ew", 2, 0),
    ("c4", "ns", 4, 1),
    ("c5", "ew", 4, 1),
)

BRIDGE_RULES = """
t1: add(car(C)) <- (anycar(C): car(C)).
t1: add(want_go(C,TL,L,T)) <- (anycar(C): want_go(C,TL,L,T)).
anycar(C): add(go(C,TL,L,T)) <- (a_traffic_light(TL): go(C,TL,L,T)).
anycar(C): add(wait(C,TL,L,T)) <- (a_traffic_light(TL): wait(C,TL,L,T)).
"""

DEFAULT_QUERIES = (Query.parse("K go(c1,t1,ns,3)"), Query.parse("NOT go(c4,t1,ns,4)"))


class ScenarioError(RuntimeError):
    pass


def program_text() -> str:
    return resources.files(__package__).joinpath("traffic_light.lp").read_text()


def full_program() -> Program:
    """The light's program as written, including the ``active(t1).`` fact."""
    return parse_program(program_text())


def gated_program() -> Program:
    """The program without its activation fact; the shell supplies it."""
    return Program(tuple(r for r in full_program() if not (r.is_fact and r.head == ACTIVATION)))


def request_facts(requests: Sequence[tuple] = DEFAULT_REQUESTS) -> list[Atom]:
    out: list[Atom] = []
    for car, lane, t, *_ in requests:
        out += [Atom("car", (Constant(car),)), Atom("want_go", (Constant(car), Constant(LIGHT), Constant(lane), Integer(t)))]
    return out


def traffic_light_descriptor(queries: Sequence[Query] = DEFAULT_QUERIES) -> ServiceDescriptor:
    return ServiceDescriptor(
        program=gated_program(),
        activation=ACTIVATION,
        inputs=tuple(map(parse_atom, ("car(C)", "want_go(C,TL,L,T)", "fault_tl(TL,L,T)"))),
        outputs=tuple(map(parse_atom, ("go(C,TL,L,T)", "wait(C,TL,L,T)"))),
        queries=tuple(queries),
        retention=stateful("car", "want_go"),
    )


def build_system(
    requests: Sequence[tuple] = DEFAULT_REQUESTS,
    faults: Sequence[Atom] = (),
    activated: bool = True,
    queries: Sequence[Query] = DEFAULT_QUERIES,
) -> tuple[System, dict[int, list[tuple[str, Update]]], int]:
    """The system, its update schedule and the horizon (last request tick)."""
    cars = sorted({r[0] for r in requests} | {f"c{i}" for i in range(1, 6)})
    light = ServiceContext(LIGHT, {"a_traffic_light"}, descriptor=traffic_light_descriptor(queries), activated=activated)
    contexts = [light] + [FactContext(c, {"anycar"}) for c in cars]
    schedule: dict[int, list[tuple[str, Update]]] = {}
    for car, lane, t, tick in requests:
        atoms = (Atom("car", (Constant(car),)), Atom("want_go", (Constant(car), Constant(LIGHT), Constant(lane), Integer(t))))
        schedule.setdefault(tick, []).append((car, Update("add", atoms)))
    if faults:
        schedule.setdefault(0, []).append((LIGHT, Update("add", tuple(faults))))
    horizon = max([r[3] for r in requests] + [0])
    return System(contexts, parse_bridge_rules(BRIDGE_RULES)), schedule, horizon


@dataclass
class TickRecord:
    time: int
    injected: list[str]
    answer_set_size: int
    go: list[str]
    wait: list[str]
    queries: list[str]
    failures: list[str]
    delivered: dict[str, list[str]] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "time": self.time,
            "injected": self.injected,
            "answer_set_size": self.answer_set_size,
            "go": self.go,
            "wait": self.wait,
            "queries": self.queries,
            "failures": self.failures,
            "delivered": self.delivered,
        }


@dataclass
class ScenarioReport:
    ticks: list[TickRecord]
    transcript: list[str]
    violations: list[str]
    elapsed: float
    trace: list[tuple[int, DataState]] = field(default_factory=list)

    @property
    def final(self) -> TickRecord:
        return self.ticks[-1]

    @property
    def failed(self) -> bool:
        return bool(self.final.failures)

    def to_json(self) -> dict:
        return {
            "ticks": [t.to_json() for t in self.ticks],
            "descriptor_violations": self.violations,
            "transcript": self.transcript,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)

    def table(self) -> str:
        rows = [("T", "injected", "|AS|", "go", "wait", "failures")]
        for t in self.ticks:
            rows.append(
                (
                    str(t.time),
                    " ".join(t.injected) or "-",
                    str(t.answer_set_size),
                    " ".join(t.go) or "-",
                    " ".join(t.wait) or "-",
                    " ".join(t.failures) or "-",
                )
            )
        widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
        lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows]
        lines.insert(1, "  ".join("-" * w for w in widths))
        return "\n".join(lines)


def _check_safety(s: frozenset) -> None:
    """No car may go on a red lane."""
    for a in s:
        if a.predicate == "go":
            _, tl, lane, t = a.args
            if Atom("tl", (Constant("r"), tl, lane, t)) in s:
                raise ScenarioError(f"{a} goes on a red light")


def run_traffic_light_scenario(
    requests: Sequence[tuple] = DEFAULT_REQUESTS,
    faults: Sequence[Atom] = (),
    activated: bool = True,
    live: bool = False,
    transport: Transport | None = None,
    queries: Sequence[Query] = DEFAULT_QUERIES,
) -> ScenarioReport:
    """Run the case study over a transport and collect the per-tick report.

    The default transport is the in-process one; ``live`` switches to TCP
    with one thread per context.
    """
    start = _time.perf_counter()
    M, schedule, horizon = build_system(requests, faults, activated, queries)
    desc = M.contexts[LIGHT].descriptor
    own = transport is None
    if own:
        transport = TcpTransport() if live else InProcessTransport()
    try:
        run = run_distributed(M, schedule, horizon, transport, live=live)
    finally:
        if own:
            transport.close()

    ticks = []
    for (t, s), (_, kbs) in zip(run.trace, run.kbs):
        light = s[LIGHT]
        _check_safety(light)
        results: list[QueryResult] = []
        if LIGHT not in s.failures:
            ev = evaluate(desc, kbs[LIGHT])
            results = list(ev.query_results)
        delivered = {n: [str(a) for a in sorted(s[n]) if a.predicate in ("go", "wait")] for n in s if n != LIGHT}
        ticks.append(
            TickRecord(
                time=t,
                injected=[f"{n}:{u}" for n, u in schedule.get(t, ())],
                answer_set_size=len(light),
                go=[str(a) for a in sorted(light) if a.predicate == "go"],
                wait=[str(a) for a in sorted(light) if a.predicate == "wait"],
                queries=[str(r) for r in results],
                failures=sorted(s.failures),
                delivered={n: v for n, v in delivered.items() if v},
            )
        )
    violations = [str(v) for v in validate_descriptor(desc)]
    return ScenarioReport(ticks, run.lines(), violations, _time.perf_counter() - start, run.trace)


def solve_with_requests(requests: Sequence[tuple] = DEFAULT_REQUESTS, extra: Sequence[Atom] = ()) -> list[AnswerSet]:
    """Solve the program as written with the request facts added directly."""
    return solve(full_program().with_facts(request_facts(requests) + list(extra)))


__all__ = [
    "ACTIVATION",
    "BRIDGE_RULES",
    "LIGHT",
    "DEFAULT_REQUESTS",
    "ScenarioError",
    "ScenarioReport",
    "TickRecord",
    "build_system",
    "full_program",
    "gated_program",
    "program_text",
    "request_facts",
    "run_traffic_light_scenario",
    "solve_with_requests",
    "traffic_light_descriptor",
]
