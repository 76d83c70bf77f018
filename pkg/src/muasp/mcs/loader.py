"""YAML system files: contexts, bridge rules, a schedule of updates and a horizon.

Example::

    contexts:
      - name: t1
        roles: [a_traffic_light]
        descriptor: traffic_light.yaml     # path or inline mapping
      - name: c1
        roles: [anycar]
        facts: []
    bridge_rules:
      - "t1: add(want_go(C,TL,L,T)) <- (anycar(C): want_go(C,TL,L,T))."
    schedule:
      0:
        - {context: c1, op: add, atoms: ["car(c1)", "want_go(c1,t1,ns,2)"]}
    horizon: 1
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from ..asp import parse_ground_atom
from ..shell import descriptor_from_dict, load_descriptor
from .bridge import McsError, parse_bridge_rule
from .context import Context, FactContext, ServiceContext, Update
from .system import Schedule, System


@dataclass
class SystemFile:
    system: System
    schedule: Schedule = field(default_factory=dict)
    horizon: int = 0


def _context(entry: dict, base: Path) -> Context:
    if not isinstance(entry, dict) or "name" not in entry:
        raise McsError(f"context entry needs a name: {entry!r}")
    name = str(entry["name"])
    roles = frozenset(map(str, entry.get("roles") or ()))
    facts = frozenset(parse_ground_atom(str(a)) for a in entry.get("facts") or ())
    desc = entry.get("descriptor")
    if desc is None:
        return FactContext(name, roles, facts=facts)
    descriptor = descriptor_from_dict(desc, base) if isinstance(desc, dict) else load_descriptor(base / str(desc))
    return ServiceContext(name, roles, descriptor=descriptor, facts=facts, activated=bool(entry.get("activated", True)))


def _schedule(raw) -> dict[int, list[tuple[str, Update]]]:
    out: dict[int, list[tuple[str, Update]]] = {}
    for t, items in (raw or {}).items():
        for item in items or ():
            atoms = tuple(parse_ground_atom(str(a)) for a in item.get("atoms") or ())
            out.setdefault(int(t), []).append((str(item["context"]), Update(str(item.get("op", "add")), atoms)))
    return out


def system_from_dict(data: dict, base: Path | str = ".") -> SystemFile:
    base = Path(base)
    if not isinstance(data, dict) or not data.get("contexts"):
        raise McsError("system file needs a nonempty 'contexts' list")
    contexts = [_context(e, base) for e in data["contexts"]]
    rules = [parse_bridge_rule(str(r)) for r in data.get("bridge_rules") or ()]
    return SystemFile(System(contexts, rules), _schedule(data.get("schedule")), int(data.get("horizon", 0)))


def load_system(path: Path | str) -> SystemFile:
    path = Path(path)
    return system_from_dict(yaml.safe_load(path.read_text()), path.parent)
