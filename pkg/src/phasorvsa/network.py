"""Network description: populations of typed neurons plus weighted, delayed connections.

This is the serializable contract between the compiler and the simulation
engine.  Delays are stored in seconds (already reduced modulo the cycle
period), weights are scalars, and phase-subtraction targets distinguish
their two inputs through the `port` field.  Descriptions are immutable
after validation and safe to share between simulation runs.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

POPULATION_KINDS = ("source", "relay", "sum", "sub", "mult", "avg", "rf")

# Inbound-degree contract per model kind (checked structurally at build time).
_INBOUND_RULES = {
    "source": (0, 0),
    "relay": (1, None),
    "sum": (2, 2),
    "sub": (2, 2),
    "mult": (1, 1),
    "avg": (2, 2),
    "rf": (0, None),
}


class NetworkValidationError(ValueError):
    """The network description violates a structural contract."""


@dataclass(frozen=True)
class PopulationSpec:
    name: str
    kind: str
    size: int
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in POPULATION_KINDS:
            raise NetworkValidationError(f"unknown population kind {self.kind!r}")
        if self.size < 1:
            raise NetworkValidationError(f"population {self.name!r} has size {self.size}")


@dataclass(frozen=True)
class ConnectionSpec:
    """Directed synapse: (population, neuron index) endpoints, weight, delay, port.

    Positive weights deliver phase-carrying kicks; negative weights are
    inhibitory (resonate-and-fire targets only) and subtract |weight| from
    the target's oscillation amplitude.  `port` is "a"/"b" for
    phase-subtraction targets and "" everywhere else.
    """

    source: tuple[str, int]
    target: tuple[str, int]
    weight: float = 1.0
    delay: float = 0.0
    port: str = ""


@dataclass
class NetworkDescription:
    period: float
    populations: list[PopulationSpec] = field(default_factory=list)
    connections: list[ConnectionSpec] = field(default_factory=list)
    readouts: list[tuple[str, str]] = field(default_factory=list)  # (population, label)

    def population(self, name: str) -> PopulationSpec:
        for pop in self.populations:
            if pop.name == name:
                return pop
        raise KeyError(name)

    def neuron_count(self) -> int:
        return sum(pop.size for pop in self.populations)

    def add_population(self, name, kind, size, params=None) -> PopulationSpec:
        if any(p.name == name for p in self.populations):
            raise NetworkValidationError(f"duplicate population name {name!r}")
        pop = PopulationSpec(name, kind, size, dict(params or {}))
        self.populations.append(pop)
        return pop

    def connect(self, source, target, weight=1.0, delay=0.0, port="") -> None:
        # A delay of one full period is a phase no-op; store the canonical
        # representative in [0, T).
        if not math.isfinite(delay) or delay < 0:
            raise NetworkValidationError(f"invalid delay {delay!r}")
        delay = math.fmod(delay, self.period)
        if delay > self.period * (1 - 1e-12):
            delay = 0.0
        self.connections.append(ConnectionSpec(source, target, weight, delay, port))

    def validate(self) -> None:
        names = {}
        for pop in self.populations:
            if pop.name in names:
                raise NetworkValidationError(f"duplicate population name {pop.name!r}")
            names[pop.name] = pop

        inbound: dict[tuple[str, int], list[ConnectionSpec]] = {}
        for conn in self.connections:
            for end, role in ((conn.source, "source"), (conn.target, "target")):
                pname, idx = end
                if pname not in names:
                    raise NetworkValidationError(f"connection {role} {pname!r} does not exist")
                if not (0 <= idx < names[pname].size):
                    raise NetworkValidationError(
                        f"connection {role} index {idx} out of range for {pname!r}"
                    )
            if not math.isfinite(conn.weight) or conn.weight == 0:
                raise NetworkValidationError(f"invalid weight {conn.weight!r}")
            if conn.delay < 0 or conn.delay >= self.period:
                raise NetworkValidationError(
                    f"delay {conn.delay} outside [0, T={self.period})"
                )
            tkind = names[conn.target[0]].kind
            if conn.port and tkind != "sub":
                raise NetworkValidationError(
                    f"port {conn.port!r} on connection into non-sub population "
                    f"{conn.target[0]!r}"
                )
            if tkind == "sub" and conn.port not in ("a", "b"):
                raise NetworkValidationError(
                    f"connection into sub population {conn.target[0]!r} must use port a or b"
                )
            if conn.weight < 0 and tkind != "rf":
                raise NetworkValidationError(
                    f"negative (inhibitory) weight into non-rf population {conn.target[0]!r}"
                )
            if tkind != "rf" and conn.weight != 1.0:
                raise NetworkValidationError(
                    f"phase-model inputs carry unit weight, got {conn.weight} "
                    f"into {conn.target[0]!r}"
                )
            inbound.setdefault(conn.target, []).append(conn)

        for pop in self.populations:
            lo, hi = _INBOUND_RULES[pop.kind]
            for i in range(pop.size):
                conns = inbound.get((pop.name, i), [])
                if len(conns) < lo or (hi is not None and len(conns) > hi):
                    raise NetworkValidationError(
                        f"{pop.kind} neuron {pop.name}[{i}] has {len(conns)} inputs, "
                        f"expected {lo}" + (f"..{hi}" if hi != lo else "")
                    )
                if pop.kind == "sub":
                    ports = sorted(c.port for c in conns)
                    if ports != ["a", "b"]:
                        raise NetworkValidationError(
                            f"sub neuron {pop.name}[{i}] needs exactly one port-a and "
                            f"one port-b input, got {ports}"
                        )

    def to_json(self) -> str:
        doc = {
            "period": self.period,
            "populations": [
                {"name": p.name, "kind": p.kind, "size": p.size, "params": p.params}
                for p in self.populations
            ],
            "connections": [
                {
                    "source": list(c.source),
                    "target": list(c.target),
                    "weight": c.weight,
                    "delay": c.delay,  # repr round-trips float64 (17 sig digits)
                    "port": c.port,
                }
                for c in self.connections
            ],
            "readouts": [list(r) for r in self.readouts],
        }
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "NetworkDescription":
        doc = json.loads(text)
        desc = cls(period=float(doc["period"]))
        for p in doc["populations"]:
            desc.add_population(p["name"], p["kind"], int(p["size"]), p.get("params", {}))
        for c in doc["connections"]:
            desc.connections.append(
                ConnectionSpec(
                    (c["source"][0], int(c["source"][1])),
                    (c["target"][0], int(c["target"][1])),
                    float(c["weight"]),
                    float(c["delay"]),
                    c.get("port", ""),
                )
            )
        desc.readouts = [(r[0], r[1]) for r in doc.get("readouts", [])]
        return desc

    def content_hash(self) -> str:
        """Deterministic content hash of the canonical JSON form."""
        canonical = json.dumps(json.loads(self.to_json()), sort_keys=True)
        return hashlib.sha256(canonical.encode()).hexdigest()
