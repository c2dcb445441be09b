"""Deterministic spiking simulation kernel.

All neurons share a global cycle of period T = 1/base_frequency; phases and
spike offsets are isomorphic through t/T = phi/2pi.  Two interchangeable
kernels run the same network:

* fixed-step: advance every integrator by its slope each dt and check spike
  conditions once per step (delivery, then integration, then threshold
  tests).  This is the reference semantics.
* event-driven: exact crossing times computed analytically, processed from
  a priority queue.  Simultaneous events order as (time, kind, source id,
  target id); cycle boundaries act first, then deliveries, then threshold
  crossings, so zero-delay inhibition can preempt a crossing at the same
  instant.

Both kernels are strictly single-threaded and bit-reproducible for a fixed
(network, config) pair.  Networks and configs are immutable after build, so
independent runs may execute concurrently.
"""

from __future__ import annotations

import heapq
import math
from collections import defaultdict, deque
from dataclasses import dataclass

import numpy as np

from .network import NetworkDescription, NetworkValidationError
from .neurons import MODEL_CLASSES, Anomaly, RFPopulation

TWO_PI = 2.0 * math.pi

MODE_FIXED = "fixed_step"
MODE_EVENT = "event_driven"
_MODE_ALIASES = {
    "fixed": MODE_FIXED,
    "fixed_step": MODE_FIXED,
    "event": MODE_EVENT,
    "event_driven": MODE_EVENT,
}

_MAX_EVENTS = 50_000_000


class SimulationError(RuntimeError):
    """Non-finite state or a runaway event load aborted the run."""


@dataclass(frozen=True)
class SimConfig:
    """Global clock and run-length settings.

    duration is expressed in whole cycles, so it is a positive multiple of
    the period by construction; dt must divide the period to one part in
    1e9 and only matters in fixed-step mode.
    """

    base_frequency_hz: float = 10.0
    dt_s: float = 1e-4
    duration_cycles: int = 12
    mode: str = MODE_EVENT
    seed: int = 0

    def __post_init__(self):
        if self.base_frequency_hz <= 0:
            raise ValueError("base_frequency_hz must be positive")
        if self.duration_cycles < 1:
            raise ValueError("duration_cycles must be >= 1")
        mode = _MODE_ALIASES.get(self.mode)
        if mode is None:
            raise ValueError(f"unknown mode {self.mode!r}")
        object.__setattr__(self, "mode", mode)
        ratio = self.period / self.dt_s
        if abs(ratio - round(ratio)) > 1e-9 * ratio or round(ratio) < 1:
            raise ValueError(
                f"dt={self.dt_s} does not divide the period {self.period} evenly"
            )

    @property
    def period(self) -> float:
        return 1.0 / self.base_frequency_hz

    @property
    def duration_s(self) -> float:
        return self.duration_cycles * self.period

    @property
    def steps_per_cycle(self) -> int:
        return round(self.period / self.dt_s)

    def to_file_text(self) -> str:
        return (
            f"base_frequency_hz = {self.base_frequency_hz!r}\n"
            f"dt_s = {self.dt_s!r}\n"
            f"duration_cycles = {self.duration_cycles}\n"
            f"mode = {self.mode}\n"
            f"seed = {self.seed}\n"
        )

    @classmethod
    def from_file(cls, path) -> "SimConfig":
        values = {}
        with open(path) as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ValueError(f"{path}:{lineno}: expected 'key = value'")
                key, _, val = (s.strip() for s in line.partition("="))
                values[key] = val
        kwargs = {}
        for key, conv in (
            ("base_frequency_hz", float),
            ("dt_s", float),
            ("duration_cycles", int),
            ("mode", str),
            ("seed", int),
        ):
            if key in values:
                kwargs[key] = conv(values.pop(key))
        if values:
            raise ValueError(f"unknown config keys: {sorted(values)}")
        return cls(**kwargs)


class GlobalClock:
    """Phase of the shared cycle: x(t) = 2pi * (t mod T) / T, reset at boundaries.

    A spike landing exactly on a boundary reads as phase 0 of the new cycle.
    """

    def __init__(self, period: float):
        self.period = period
        self._eps = 1e-9 * period

    def cycle_of(self, t: float) -> int:
        return int(math.floor((t + self._eps) / self.period))

    def phase_of(self, t: float) -> float:
        phase = TWO_PI * (t - self.cycle_of(t) * self.period) / self.period
        return max(phase, 0.0)

    def cycle_and_phase(self, t: float) -> tuple[int, float]:
        c = self.cycle_of(t)
        return c, max(TWO_PI * (t - c * self.period) / self.period, 0.0)


@dataclass(frozen=True)
class SpikeEvent:
    source_neuron: int
    time: float


@dataclass(frozen=True)
class RuntimeConnection:
    src_gid: int
    tgt_pop: int  # population index
    tgt_local: int
    tgt_gid: int
    weight: float
    delay: float
    port: object  # "a"/"b" for sub, slot int for avg, "" otherwise
    delay_steps: int = 0
    immediate_inhibition: bool = False  # zero-delay inhibition within one rf pop


class EventQueue:
    """Priority queue with the deterministic tie rule.

    Simultaneous entries order by (time, kind, source id, target id); a
    monotone sequence number breaks any remaining ties, so two runs pop in
    identical order.  Kinds: 0 cycle boundary, 1 spike delivery, 2
    threshold crossing.
    """

    BOUNDARY, DELIVERY, CROSSING = 0, 1, 2

    def __init__(self):
        self._heap: list = []
        self._seq = 0

    def push(self, time: float, kind: int, k1, k2, payload) -> None:
        heapq.heappush(self._heap, (time, kind, k1, k2, self._seq, payload))
        self._seq += 1

    def schedule(self, event: SpikeEvent, conn: RuntimeConnection) -> None:
        """Queue the delayed delivery of a spike along one connection."""
        self.push(
            event.time + conn.delay,
            self.DELIVERY,
            event.source_neuron,
            conn.tgt_gid,
            conn,
        )

    def pop(self):
        return heapq.heappop(self._heap)

    def __len__(self):
        return len(self._heap)


class SpikeRecord:
    """All spikes of one run, grouped by neuron, with anomaly flags."""

    def __init__(self, desc: NetworkDescription, config: SimConfig):
        self.period = config.period
        self.config = config
        self.clock = GlobalClock(config.period)
        self.populations = []  # (name, kind, offset, size)
        offset = 0
        for pop in desc.populations:
            self.populations.append((pop.name, pop.kind, offset, pop.size))
            offset += pop.size
        self.total_neurons = offset
        self._times: list[list[float]] = [[] for _ in range(offset)]
        self.anomalies: list[Anomaly] = []
        self._by_name = {name: (off, size) for name, _, off, size in self.populations}

    def add(self, gid: int, time: float) -> None:
        self._times[gid].append(float(time))

    def finalize(self) -> None:
        self.spikes = [np.asarray(ts) for ts in self._times]
        # one-spike-per-cycle contract: extra spikes are kept but flagged
        for gid, ts in enumerate(self.spikes):
            if len(ts) < 2:
                continue
            cycles = np.floor((ts + 1e-9 * self.period) / self.period).astype(int)
            dup = np.nonzero(np.diff(cycles) == 0)[0]
            for j in dup:
                self.anomalies.append(
                    Anomaly(gid, float(ts[j + 1]), "multi-spike-cycle")
                )

    def gid(self, population: str, i: int) -> int:
        off, size = self._by_name[population]
        if not (0 <= i < size):
            raise IndexError(f"{population}[{i}] out of range")
        return off + i

    def times(self, population: str, i: int) -> np.ndarray:
        return self.spikes[self.gid(population, i)]

    def spikes_in_cycle(self, population: str, i: int, cycle: int) -> np.ndarray:
        ts = self.times(population, i)
        cycles = np.floor((ts + 1e-9 * self.period) / self.period).astype(int)
        return ts[cycles == cycle]

    def decode_phase(self, population: str, i: int, cycle: int):
        """Phase of the neuron's spike within the given cycle, or None.

        With several spikes in one cycle the first decides the phase; the
        surplus is already flagged in `anomalies`.
        """
        ts = self.spikes_in_cycle(population, i, cycle)
        if len(ts) == 0:
            return None
        return self.clock.phase_of(float(ts[0]))

    def population_phases(self, population: str, cycle: int) -> np.ndarray:
        """Decoded phases for a whole population; NaN marks silent neurons."""
        off, size = self._by_name[population]
        out = np.full(size, np.nan)
        for i in range(size):
            phase = self.decode_phase(population, i, cycle)
            if phase is not None:
                out[i] = phase
        return out

    def to_csv(self) -> str:
        lines = ["neuron_id,population,time_s,cycle,phase_rad"]
        for name, _, off, size in self.populations:
            for i in range(size):
                for t in self.spikes[off + i]:
                    c, phase = self.clock.cycle_and_phase(float(t))
                    lines.append(f"{off + i},{name},{float(t)!r},{c},{phase!r}")
        return "\n".join(lines) + "\n"

    def save_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_csv())


class _Runtime:
    """Network description lowered to model instances plus dispatch tables."""

    def __init__(self, desc: NetworkDescription, config: SimConfig):
        if abs(desc.period - config.period) > 1e-12 * config.period:
            raise NetworkValidationError(
                f"network was built for period {desc.period}, config has {config.period}"
            )
        desc.validate()
        self.desc = desc
        self.pops = []
        self.pop_index = {}
        offset = 0
        for spec in desc.populations:
            cls = MODEL_CLASSES[spec.kind]
            pop = cls(spec.name, spec.size, offset, spec.params, config.period)
            self.pop_index[spec.name] = len(self.pops)
            self.pops.append(pop)
            offset += spec.size
        self.total = offset

        # avg inputs get slot numbers by ascending source gid
        def src_gid(conn):
            p = self.pops[self.pop_index[conn.source[0]]]
            return p.offset + conn.source[1]

        avg_slot_count: dict[tuple[str, int], int] = {}
        self.outgoing: list[list[RuntimeConnection]] = [[] for _ in range(offset)]
        for conn in sorted(desc.connections, key=lambda c: (src_gid(c), c.target)):
            tgt_idx = self.pop_index[conn.target[0]]
            tgt_pop = self.pops[tgt_idx]
            port: object = conn.port
            if tgt_pop.kind == "avg":
                key = conn.target
                port = avg_slot_count.get(key, 0)
                avg_slot_count[key] = port + 1
            immediate = (
                conn.weight < 0
                and conn.delay == 0.0
                and conn.source[0] == conn.target[0]
                and tgt_pop.kind == "rf"
            )
            rc = RuntimeConnection(
                src_gid=src_gid(conn),
                tgt_pop=tgt_idx,
                tgt_local=conn.target[1],
                tgt_gid=tgt_pop.offset + conn.target[1],
                weight=conn.weight,
                delay=conn.delay,
                port=port,
                delay_steps=round(conn.delay / config.dt_s),
                immediate_inhibition=immediate,
            )
            self.outgoing[rc.src_gid].append(rc)

    def check_finite(self, time: float):
        for pop in self.pops:
            bad = pop.check_finite()
            if bad is not None:
                raise SimulationError(
                    f"non-finite state in neuron {pop.name}[{bad}] "
                    f"(gid {pop.offset + bad}) at t={time:.6f}s"
                )


def run(desc: NetworkDescription, config: SimConfig) -> SpikeRecord:
    """Simulate the network for the configured duration; deterministic."""
    rt = _Runtime(desc, config)
    record = SpikeRecord(desc, config)
    if config.mode == MODE_FIXED:
        _run_fixed(rt, config, record)
    else:
        _run_event(rt, config, record)
    for pop in rt.pops:
        record.anomalies.extend(pop.anomalies)
    record.finalize()
    return record


def _run_event(rt: _Runtime, config: SimConfig, record: SpikeRecord) -> None:
    T = config.period
    horizon = config.duration_s + 1e-9 * T
    queue = EventQueue()

    for n in range(config.duration_cycles + 1):
        queue.push(n * T, EventQueue.BOUNDARY, 0, 0, n)

    for pop in rt.pops:
        pop.reset()

    def sched(pop, i):
        hint = pop.ev_crossing(i, pop.last[i])
        if hint is not None:
            t_c, key = hint
            queue.push(t_c, EventQueue.CROSSING, key, pop.offset + i, (pop, i, pop.gen[i]))

    def emit(pop, i, t):
        gid = pop.offset + i
        record.add(gid, t)
        ev = SpikeEvent(gid, t)
        for conn in rt.outgoing[gid]:
            queue.schedule(ev, conn)

    for pop in rt.pops:
        for i in range(pop.size):
            pop.last[i] = 0.0
            sched(pop, i)

    processed = 0
    while len(queue):
        time, kind, _k1, _k2, _seq, payload = queue.pop()
        if time > horizon:
            break
        processed += 1
        if processed > _MAX_EVENTS:
            raise SimulationError(f"event budget exceeded at t={time:.6f}s")
        if kind == EventQueue.BOUNDARY:
            rt.check_finite(time)
            for pop in rt.pops:
                for i in pop.ev_boundary(time, payload):
                    sched(pop, i)
        elif kind == EventQueue.DELIVERY:
            conn = payload
            pop = rt.pops[conn.tgt_pop]
            fire_now, resched = pop.ev_deliver(
                conn.tgt_local, time, conn.weight, conn.port, conn.src_gid
            )
            if fire_now:
                emit(pop, conn.tgt_local, time)
            if resched:
                sched(pop, conn.tgt_local)
        else:  # CROSSING
            pop, i, gen = payload
            if pop.gen[i] != gen:
                continue  # invalidated by a later state change
            if pop.ev_fire(i, time):
                emit(pop, i, time)
                sched(pop, i)


def _run_fixed(rt: _Runtime, config: SimConfig, record: SpikeRecord) -> None:
    dt = config.dt_s
    spc = config.steps_per_cycle
    total_steps = config.duration_cycles * spc
    buckets: dict[int, list] = defaultdict(list)

    for pop in rt.pops:
        pop.reset()

    def fan_out(gid, step):
        for conn in rt.outgoing[gid]:
            buckets[step + conn.delay_steps].append((conn.src_gid, conn.tgt_gid, conn))

    for k in range(total_steps):
        t = k * dt
        if k % spc == 0:
            rt.check_finite(t)
            for pop in rt.pops:
                pop.fs_boundary(k // spc)

        batch = buckets.pop(k, None)
        if batch:
            batch.sort(key=lambda entry: (entry[0], entry[1]))
            pending = deque(batch)
            while pending:
                _src, _tgt, conn = pending.popleft()
                pop = rt.pops[conn.tgt_pop]
                if pop.fs_deliver(conn.tgt_local, t, conn.weight, conn.port):
                    gid = pop.offset + conn.tgt_local
                    record.add(gid, t)
                    for oc in rt.outgoing[gid]:
                        if oc.delay_steps == 0:
                            pending.append((oc.src_gid, oc.tgt_gid, oc))
                        else:
                            buckets[k + oc.delay_steps].append(
                                (oc.src_gid, oc.tgt_gid, oc)
                            )

        for pop in rt.pops:
            pop.fs_integrate(dt)

        t_next = (k + 1) * dt
        for pop in rt.pops:
            if isinstance(pop, RFPopulation):
                # candidates come ordered by descending amplitude; zero-delay
                # inhibition inside the population preempts weaker ones
                for i in pop.fs_test(t_next):
                    if not pop.fs_confirm_fire(i, t_next):
                        continue
                    gid = pop.offset + i
                    record.add(gid, t_next)
                    for conn in rt.outgoing[gid]:
                        if conn.immediate_inhibition:
                            pop.fs_inhibit_now(conn.tgt_local, conn.weight)
                        else:
                            buckets[(k + 1) + conn.delay_steps].append(
                                (conn.src_gid, conn.tgt_gid, conn)
                            )
            else:
                for i in pop.fs_test(t_next):
                    record.add(pop.offset + int(i), t_next)
                    fan_out(pop.offset + int(i), k + 1)
