"""Command-line entry point.

Exit codes: 0 success (consistent), 1 inconsistent, 2 usage, parse or
validation errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import yaml

from . import __version__
from .asp import AspError, parse_ground_atom, parse_program, solve
from .mcs import McsError, load_system, run_distributed
from .messaging import InProcessTransport, Performative, RegistryEntry, RegistryServer, TcpTransport
from .query import InconsistentProgramError, Query, run_query
from .shell import DescriptorError, MicroService, Phase, load_descriptor, validate_descriptor

EXIT_OK, EXIT_INCONSISTENT, EXIT_ERROR = 0, 1, 2

SERVICE = "service"


def _err(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return EXIT_ERROR


# -- solve --------------------------------------------------------------------


def cmd_solve(args: argparse.Namespace) -> int:
    try:
        program = parse_program(Path(args.file).read_text())
        queries = [Query.parse(q) for q in args.query]
        sets = solve(program, limit=1 if args.first else None)
    except (OSError, AspError, ValueError) as e:
        return _err(str(e))
    if not sets:
        print("inconsistent")
        return EXIT_INCONSISTENT
    if queries:
        # queries always range over every answer set, even with --first
        every = sets if not args.first else solve(program)
        for q in queries:
            print(run_query(q, every))
    else:
        for s in sets:
            print(" ".join(str(a) for a in s))
    return EXIT_OK


# -- run-service --------------------------------------------------------------


def _load_script(path: str | None) -> list[dict]:
    if path is None:
        return []
    data = yaml.safe_load(Path(path).read_text()) or []
    if not isinstance(data, list):
        raise ValueError("script must be a list of timed messages")
    return data


def _script_message(item: dict):
    perf = Performative(item.get("performative", "request"))
    if perf is Performative.QUERY_IF:
        return perf, Query.parse(str(item["query"]))
    content = item.get("content", [])
    if isinstance(content, str):
        content = [content]
    return perf, tuple(parse_ground_atom(str(a)) for a in content)


def cmd_run_service(args: argparse.Namespace) -> int:
    try:
        d = load_descriptor(args.descriptor)
        script = _load_script(args.script)
        plan = [(int(it.get("time", 0)), str(it.get("from", "client")), *_script_message(it)) for it in script]
    except (OSError, AspError, DescriptorError, ValueError, KeyError, yaml.YAMLError) as e:
        return _err(str(e))
    violations = validate_descriptor(d)
    if violations:
        for v in violations:
            print(f"invalid descriptor: {v}", file=sys.stderr)
        return EXIT_ERROR
    horizon = args.horizon if args.horizon is not None else max([t for t, *_ in plan] + [0])

    transport = TcpTransport() if args.live else InProcessTransport()
    with transport:
        transport.register(RegistryEntry(SERVICE, {"service"}))
        for name in sorted({s for _, s, *_ in plan}):
            transport.register(RegistryEntry(name, {"client"}))
        svc = MicroService(d, transport.endpoint(SERVICE))
        for t in range(horizon + 1):
            for when, sender, perf, content in plan:
                if when == t:
                    m = transport.endpoint(sender).send(perf, SERVICE, content)
                    print(f"t={t} send {m}")
            transport.wait_quiescent()
            if t % d.frequency:
                continue
            report = svc.poll()
            for s in report.signals:
                print(f"t={t} signal {s} -> {svc.shell.phase.value}")
            if report.tick is not None:
                tk = report.tick
                status = f"answer set {tk.evaluation.selected}" if tk.consistent else "failure (inconsistent, no-operation)"
                print(f"t={t} tick {tk.state.tick_count}: {status}")
                for r in tk.query_results:
                    print(f"t={t} query {r}")
            for m in report.sent:
                print(f"t={t} reply {m}")
            if svc.shell.phase is Phase.STOPPED:
                print(f"t={t} service stopped")
                break
    return EXIT_OK


# -- run-system -----------------------------------------------------------------


def cmd_run_system(args: argparse.Namespace) -> int:
    try:
        sf = load_system(args.file)
    except (OSError, AspError, McsError, DescriptorError, ValueError, KeyError, yaml.YAMLError) as e:
        return _err(str(e))
    horizon = sf.horizon if args.horizon is None else args.horizon
    transport = TcpTransport() if args.live else InProcessTransport()
    with transport:
        try:
            run = run_distributed(sf.system, sf.schedule, horizon, transport, live=args.live)
        except McsError as e:
            return _err(str(e))
    if args.json:
        print(json.dumps({"trace": [{"time": t, **s.to_json()} for t, s in run.trace], "transcript": run.lines()}, indent=2))
    else:
        for line in run.lines():
            print(line)
        for t, s in run.trace:
            print(f"T{t} equilibrium:")
            for name, atoms in s.items:
                flag = "  FAILED" if name in s.failures else ""
                print(f"  {name}: {{{', '.join(map(str, sorted(atoms)))}}}{flag}")
    return EXIT_INCONSISTENT if run.trace and run.trace[-1][1].failures else EXIT_OK


# -- scenario -------------------------------------------------------------------


def cmd_scenario(args: argparse.Namespace) -> int:
    from .scenarios.traffic_light import DEFAULT_REQUESTS, run_traffic_light_scenario

    faults = []
    for spec in args.fault:
        lane, _, t = spec.partition(",")
        faults.append(parse_ground_atom(f"fault_tl(t1,{lane},{t})"))
    requests = DEFAULT_REQUESTS
    if args.horizon is not None:
        requests = tuple(r for r in requests if r[3] <= args.horizon)
    report = run_traffic_light_scenario(requests, faults, activated=not args.no_activation, live=args.live)
    if args.json:
        print(report.dumps())
    else:
        print(report.table())
        for v in report.violations:
            print(f"note: {v}")
    return EXIT_INCONSISTENT if report.failed else EXIT_OK


# -- registry / check ---------------------------------------------------------------


def cmd_registry(args: argparse.Namespace) -> int:
    server = RegistryServer(host=args.host, port=args.port)
    host, port = server.address
    print(f"registry listening on {host}:{port}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.close()
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    from .harness import check

    result = check(args.seed, args.count)
    print(f"{result.count} random programs, {len(result.mismatches)} mismatches (seed {args.seed})")
    for p in result.mismatches[:5]:
        print(f"mismatch:\n{p}")
    return EXIT_OK if result.ok else EXIT_INCONSISTENT


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="muasp", description="ASP microservices and multi-context systems")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log debug output")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="print the answer sets of a program")
    p.add_argument("file")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--all", action="store_true", help="print every answer set (default)")
    mode.add_argument("--first", action="store_true", help="print only the first answer set")
    p.add_argument("--query", action="append", default=[], metavar='"MODE ATOM"', help="e.g. --query 'K p'")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("run-service", help="replay a script of messages through one service")
    p.add_argument("descriptor")
    p.add_argument("script", nargs="?")
    p.add_argument("--horizon", type=int)
    p.add_argument("--live", action="store_true", help="use the TCP transport")
    p.set_defaults(func=cmd_run_service)

    p = sub.add_parser("run-system", help="run a system file to its timed equilibria")
    p.add_argument("file")
    p.add_argument("--horizon", type=int)
    p.add_argument("--live", action="store_true", help="TCP transport, one thread per context")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_run_system)

    p = sub.add_parser("scenario", help="packaged case studies")
    p.add_argument("name", choices=["traffic-light"])
    p.add_argument("--horizon", type=int, help="only send requests scheduled up to this tick")
    p.add_argument("--live", action="store_true")
    p.add_argument("--json", action="store_true")
    p.add_argument("--fault", action="append", default=[], metavar="LANE,T", help="inject fault_tl(t1,LANE,T)")
    p.add_argument("--no-activation", action="store_true", help="never deliver active(t1)")
    p.set_defaults(func=cmd_scenario)

    p = sub.add_parser("registry", help="yellow-pages registry")
    p.add_argument("action", choices=["serve"])
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=0)
    p.set_defaults(func=cmd_registry)

    p = sub.add_parser("check", help="compare the solver with exhaustive enumeration on random programs")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=500)
    p.set_defaults(func=cmd_check)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InconsistentProgramError as e:
        print(f"inconsistent: {e}", file=sys.stderr)
        return EXIT_INCONSISTENT
    except (AspError, McsError, DescriptorError) as e:
        return _err(str(e))
