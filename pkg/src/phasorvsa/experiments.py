"""End-to-end experiment drivers: state-transition stopwatch, spatial memory,
and ad-hoc expression evaluation through the compiled spiking path.

Each driver builds vectors offline with the exact algebra, compiles the
query expressions to spiking networks, simulates, decodes, and emits CSV
reports plus a manifest.json capturing the spec, per-network content
hashes, and neuron counts.  Identical specs (including seed) produce
byte-identical outputs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import fhrr
from .compiler import CompileOptions, compile_expression, oracle_eval
from .engine import SimConfig, run
from .expr import expression_symbols, parse_expression
from .fhrr import PhasorVector, Vocabulary
from .readout import (
    SimilarityReport,
    SspSweep,
    last_fully_spiking_cycle,
    merge_sweep_csv,
    record_to_vector,
    ssp_sweep,
)

TWO_PI = 2.0 * math.pi

STOPWATCH_STATES = ("C", "T", "P")
STOPWATCH_ACTIONS = ("R", "S")
# (state, action) -> next state, one row per edge of the stopwatch graph
STOPWATCH_TRANSITIONS = (
    ("C", "R", "C"),
    ("C", "S", "T"),
    ("T", "R", "T"),
    ("T", "S", "P"),
    ("P", "R", "C"),
    ("P", "S", "T"),
)

SPATIAL_BASE_SYMBOLS = ("Square", "Circle", "Red", "Blue", "X", "Y")
SPATIAL_LOCATIONS = {"Red*Square": 1.85, "Blue*Circle": -0.65}
SWEEP_RANGE = (-3.0, 3.0)
SWEEP_STEPS = 601  # h = 0.01


@dataclass
class ExperimentSpec:
    kind: str  # stopwatch | spatial | expression
    dim: int
    seed: int
    config: SimConfig
    expression: str | None = None
    out_dir: str | Path | None = None
    vocab_path: str | Path | None = None
    options: CompileOptions | None = None

    def compile_options(self) -> CompileOptions:
        if self.options is not None:
            return self.options
        return CompileOptions(base_frequency_hz=self.config.base_frequency_hz)


@dataclass
class QueryResult:
    label: str
    expression: str
    report: SimilarityReport
    network_hash: str
    neuron_count: int
    anomaly_count: int
    label_spike_counts: list[int] = field(default_factory=list)
    readout_cycle: int = -1
    expected: str | None = None
    correct: bool | None = None
    expected_peak: float | None = None
    peak: tuple[float, float] | None = None


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    queries: list[QueryResult]
    sweeps: list[SspSweep] = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    @property
    def total_neurons(self) -> int:
        return sum(q.neuron_count for q in self.queries)

    @property
    def anomaly_count(self) -> int:
        return sum(q.anomaly_count for q in self.queries)


def random_vocabulary(names, dim: int, seed: int) -> Vocabulary:
    """Named random vectors drawn sequentially from one seeded stream."""
    rng = np.random.default_rng(seed)
    vocab = Vocabulary(dim)
    for name in names:
        vocab.add(name, PhasorVector(rng.uniform(0.0, TWO_PI, dim)))
    return vocab


def _decode_output(net, record, config):
    """Decode the root population at the last complete cycle.

    Resonate-and-fire feature layers occasionally skip a cycle bucket while
    a phase crosses the cycle boundary, so the readout steps back to the
    latest fully spiking cycle (normally the last one).
    """
    last = config.duration_cycles - 1
    cycle = last_fully_spiking_cycle(record, net.root.population, last)
    vec = record_to_vector(record, net.root.population, cycle, net.root.index_map)
    return vec, cycle


def _run_query(label, expression, symbols, cleanup_vocab, report_vocab, spec):
    net = compile_expression(
        parse_expression(expression),
        symbols,
        cleanup_vocab=cleanup_vocab,
        options=spec.compile_options(),
    )
    record = run(net.description, spec.config)
    vec, cycle = _decode_output(net, record, spec.config)
    report = SimilarityReport.from_vector(label, vec, report_vocab)
    label_counts = []
    for pop, tap in net.description.readouts:
        if tap == "cleanup_labels":
            size = net.description.population(pop).size
            label_counts = [int(len(record.times(pop, j))) for j in range(size)]
    return QueryResult(
        label=label,
        expression=expression,
        report=report,
        network_hash=net.description.content_hash(),
        neuron_count=net.neuron_count(),
        anomaly_count=len(record.anomalies),
        label_spike_counts=label_counts,
        readout_cycle=cycle,
    ), net, record, vec


def stopwatch_vectors(dim: int, seed: int):
    """The five symbol vectors and the bundled transition vector f."""
    vocab = random_vocabulary(STOPWATCH_STATES + STOPWATCH_ACTIONS, dim, seed)
    terms = [
        fhrr.bind(fhrr.bind(vocab[s], vocab[a]), fhrr.permute(vocab[n], 1))
        for s, a, n in STOPWATCH_TRANSITIONS
    ]
    f = fhrr.bundle(terms)
    return vocab, f


def run_stopwatch(spec: ExperimentSpec) -> ExperimentResult:
    """All six state-transition queries through the spiking clean-up path."""
    vocab, f = stopwatch_vectors(spec.dim, spec.seed)
    symbols = Vocabulary(spec.dim, list(vocab.entries))
    symbols.add("f", f)

    queries = []
    for state, action, expected in STOPWATCH_TRANSITIONS:
        expression = f"cleanup(rho(f / {state} / {action}, -1))"
        result, _, _, _ = _run_query(
            f"{state}+{action}", expression, symbols, vocab, vocab, spec
        )
        result.expected = expected
        result.correct = result.report.winner == expected
        queries.append(result)

    return ExperimentResult(spec=spec, queries=queries)


def spatial_vectors(dim: int, seed: int):
    """Base symbols, the 10-entry vocabulary, and the scene vector v."""
    base = random_vocabulary(SPATIAL_BASE_SYMBOLS, dim, seed)
    vocab = Vocabulary(dim, list(base.entries))
    for left, right in (("Red", "Square"), ("Blue", "Circle"),
                        ("Red", "Circle"), ("Blue", "Square")):
        vocab.add(f"{left}*{right}", fhrr.bind(base[left], base[right]))
    v = fhrr.bundle([
        fhrr.bind(vocab["Red*Square"], fhrr.fractional_power(base["X"], 1.85)),
        fhrr.bind(vocab["Blue*Circle"], fhrr.fractional_power(base["X"], -0.65)),
    ])
    return base, vocab, v


def run_spatial(spec: ExperimentSpec) -> ExperimentResult:
    """Location query through clean-up plus the two SSP similarity sweeps."""
    base, vocab, v = spatial_vectors(spec.dim, spec.seed)
    symbols = Vocabulary(spec.dim, list(base.entries))
    symbols.add("v", v)

    location, _, _, _ = _run_query(
        "at_1.85", "cleanup(v / X ^ 1.85)", symbols, vocab, vocab, spec
    )
    location.expected = "Red*Square"
    location.correct = location.report.winner == "Red*Square"
    queries = [location]

    sweeps = []
    for label, expression, x0 in (
        ("q1", "v / (Red * Square)", 1.85),
        ("q2", "v / (Blue * Circle)", -0.65),
    ):
        result, net, record, vec = _run_query(
            label, expression, symbols, vocab, vocab, spec
        )
        queries.append(result)
        sweep = ssp_sweep(
            vec, base["X"], SWEEP_RANGE[0], SWEEP_RANGE[1], SWEEP_STEPS,
            query=label, axis_name="X",
        )
        sweeps.append(sweep)
        result.expected_peak = x0
        result.peak = sweep.peak()

    return ExperimentResult(spec=spec, queries=queries, sweeps=sweeps)


def run_expression(spec: ExperimentSpec) -> ExperimentResult:
    """Compile and simulate an ad-hoc expression; compare against the oracle."""
    if not spec.expression:
        raise ValueError("expression experiments need an expression")
    tree = parse_expression(spec.expression)
    names = expression_symbols(tree)
    if spec.vocab_path:
        symbols = Vocabulary.load(spec.vocab_path)
        missing = [n for n in names if n not in symbols]
        if missing:
            raise ValueError(f"symbols not in vocabulary file: {missing}")
        if symbols.dim != spec.dim:
            spec.dim = symbols.dim
    else:
        symbols = random_vocabulary(names, spec.dim, spec.seed)

    net = compile_expression(
        tree, symbols, options=spec.compile_options()
    )
    record = run(net.description, spec.config)
    vec, cycle = _decode_output(net, record, spec.config)
    report = SimilarityReport.from_vector("eval", vec, symbols)

    oracle_vec = oracle_eval(tree, symbols)
    deviation = float(np.max(fhrr.circular_distance(vec.phases, oracle_vec.phases)))

    result = QueryResult(
        label="eval",
        expression=spec.expression,
        report=report,
        network_hash=net.description.content_hash(),
        neuron_count=net.neuron_count(),
        anomaly_count=len(record.anomalies),
        readout_cycle=cycle,
    )
    extra = {
        "decoded_phases": [float(p) for p in vec.phases],
        "oracle_phases": [float(p) for p in oracle_vec.phases],
        "oracle_max_phase_deviation_rad": deviation,
        "record": record,
        "vector": vec,
    }
    return ExperimentResult(spec=spec, queries=[result], extra=extra)


# ---- output files -----------------------------------------------------------


def _config_dict(config: SimConfig) -> dict:
    return {
        "base_frequency_hz": config.base_frequency_hz,
        "dt_s": config.dt_s,
        "duration_cycles": config.duration_cycles,
        "mode": config.mode,
        "seed": config.seed,
    }


def write_outputs(result: ExperimentResult) -> list[Path]:
    """Write per-query report CSVs, sweep CSVs, summary and manifest JSON."""
    spec = result.spec
    out_dir = Path(spec.out_dir or "phasorvsa_out")
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    def put(name: str, text: str):
        path = out_dir / name
        path.write_text(text)
        written.append(path)

    summary_queries = []
    for q in result.queries:
        filename = f"{spec.kind}_{q.label.replace('+', '_').replace('*', 'x')}.csv"
        put(filename, q.report.to_csv())
        entry = {
            "label": q.label,
            "expression": q.expression,
            "winner": q.report.winner,
            "winner_similarity": q.report.winner_score,
            "anomalies": q.anomaly_count,
            "readout_cycle": q.readout_cycle,
            "report_csv": filename,
        }
        for key in ("expected", "correct", "expected_peak", "peak"):
            value = getattr(q, key)
            if value is not None:
                entry[key] = value
        if q.label_spike_counts:
            entry["label_spike_counts"] = q.label_spike_counts
        summary_queries.append(entry)

    if result.sweeps:
        put("ssp_sweeps.csv", merge_sweep_csv(result.sweeps))

    if "decoded_phases" in result.extra:
        put(
            "decoded.json",
            json.dumps(
                {
                    "dim": spec.dim,
                    "phases": result.extra["decoded_phases"],
                    "oracle_phases": result.extra["oracle_phases"],
                    "oracle_max_phase_deviation_rad": result.extra[
                        "oracle_max_phase_deviation_rad"
                    ],
                },
                indent=2,
            ),
        )
        result.extra["record"].save_csv(out_dir / "spikes.csv")
        written.append(out_dir / "spikes.csv")

    put(
        "summary.json",
        json.dumps({"experiment": spec.kind, "queries": summary_queries}, indent=2,
                   sort_keys=True),
    )

    manifest = {
        "experiment": spec.kind,
        "dim": spec.dim,
        "seed": spec.seed,
        "config": _config_dict(spec.config),
        "expression": spec.expression,
        "networks": [
            {
                "query": q.label,
                "content_hash": q.network_hash,
                "neuron_count": q.neuron_count,
            }
            for q in result.queries
        ],
        "total_neurons": result.total_neurons,
        "anomaly_count": result.anomaly_count,
        "outputs": sorted([p.name for p in written] + ["manifest.json"]),
    }
    put("manifest.json", json.dumps(manifest, indent=2, sort_keys=True))
    return written
