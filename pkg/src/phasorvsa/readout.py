"""Convert spike records back into phasor vectors and similarity reports.

The CSV schemas written here are the contract consumed by the plotting
component:

    similarity report:  query,vocab_name,similarity,winner_flag
    SSP sweep:          query,x,similarity

All functions are pure over immutable records.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import fhrr
from .engine import SpikeRecord
from .fhrr import PhasorVector, Vocabulary


class SilentNeuronError(RuntimeError):
    """A population readout found neurons without a spike in the cycle."""

    def __init__(self, population: str, cycle: int, silent: list[int]):
        self.population = population
        self.cycle = cycle
        self.silent = silent
        shown = ", ".join(str(i) for i in silent[:10])
        more = "" if len(silent) <= 10 else f" (+{len(silent) - 10} more)"
        super().__init__(
            f"population {population!r} has silent neurons in cycle {cycle}: "
            f"[{shown}]{more}"
        )


def record_to_vector(
    record: SpikeRecord,
    population: str,
    cycle: int,
    index_map=None,
) -> PhasorVector:
    """Decode one cycle of a population into a PhasorVector.

    Component k is the spike phase of neuron index_map[k] (identity by
    default).  Every neuron must have spiked in the cycle; silent neurons
    raise with their indices.  Multi-spike cycles were already flagged in
    the record's anomaly list and decode to their first spike.
    """
    phases = record.population_phases(population, cycle)
    silent = np.nonzero(np.isnan(phases))[0]
    if len(silent) > 0:
        raise SilentNeuronError(population, cycle, [int(i) for i in silent])
    if index_map is not None:
        phases = phases[np.asarray(index_map)]
    return PhasorVector(phases)


def last_fully_spiking_cycle(
    record: SpikeRecord, population: str, last_cycle: int, lookback: int = 3
) -> int:
    """Latest cycle <= last_cycle in which every neuron of the population spiked.

    Resonate-and-fire phases near the cycle boundary can occasionally skip a
    bucketed cycle while converging; readouts step back up to `lookback`
    cycles before giving up (the silent-neuron error then names the gaps).
    """
    for cycle in range(last_cycle, max(last_cycle - lookback, -1), -1):
        if not np.any(np.isnan(record.population_phases(population, cycle))):
            return cycle
    return last_cycle


@dataclass
class SimilarityReport:
    """Similarity of one query's output against every vocabulary entry."""

    query: str
    entries: list[tuple[str, float]]
    winner: str
    winner_score: float

    @classmethod
    def from_vector(cls, query: str, v: PhasorVector, vocab: Vocabulary):
        entries = [(name, fhrr.similarity(v, vec)) for name, vec in vocab.entries]
        best = int(np.argmax([s for _, s in entries]))
        return cls(query, entries, entries[best][0], entries[best][1])

    def to_csv(self) -> str:
        lines = ["query,vocab_name,similarity,winner_flag"]
        for name, sim in self.entries:
            flag = 1 if name == self.winner else 0
            lines.append(f"{self.query},{name},{sim!r},{flag}")
        return "\n".join(lines) + "\n"


@dataclass
class SspSweep:
    """Similarity of a query vector against axis^x over a uniform grid."""

    query: str
    axis_name: str
    xs: list[float]
    similarities: list[float]

    def peak(self) -> tuple[float, float]:
        best = int(np.argmax(self.similarities))
        return self.xs[best], self.similarities[best]

    def to_csv(self) -> str:
        lines = ["query,x,similarity"]
        for x, s in zip(self.xs, self.similarities):
            lines.append(f"{self.query},{x!r},{s!r}")
        return "\n".join(lines) + "\n"


def ssp_sweep(
    q: PhasorVector,
    axis: PhasorVector,
    x_min: float,
    x_max: float,
    steps: int,
    query: str = "q",
    axis_name: str = "X",
) -> SspSweep:
    """Sweep similarity(q, axis^x) over a uniform, strictly increasing grid."""
    if steps < 2:
        raise ValueError("steps must be >= 2")
    if not x_max > x_min:
        raise ValueError("x_max must exceed x_min")
    xs = np.linspace(x_min, x_max, steps)
    sims = [fhrr.similarity(q, fhrr.fractional_power(axis, x)) for x in xs]
    return SspSweep(query, axis_name, [float(x) for x in xs], [float(s) for s in sims])


def merge_sweep_csv(sweeps: list[SspSweep]) -> str:
    lines = ["query,x,similarity"]
    for sweep in sweeps:
        for x, s in zip(sweep.xs, sweep.similarities):
            lines.append(f"{sweep.query},{x!r},{s!r}")
    return "\n".join(lines) + "\n"
