"""Lower VSA expressions over named symbols into executable spiking networks.

Each operator becomes a population of the matching neuron model, one neuron
per vector component; permutation is pure rewiring and adds no neurons.  A
clean-up node becomes a gate relay (which passes the seed input during an
initial cycle window), a feature layer of N resonate-and-fire neurons, and
a label layer of M resonate-and-fire neurons wired with the vocabulary:
feature->label connections conjugate-delay each stored pattern (an inner
product realized as scalar weights and spike delays), labels mutually
inhibit into a winner-take-all, and the winning label feeds each pattern
back with direct delays.

Compilation is pure; descriptions are immutable once built.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import fhrr
from .expr import Bind, Bundle, Cleanup, Permute, Power, Symbol, Unbind
from .fhrr import PhasorVector, Vocabulary
from .network import NetworkDescription

TWO_PI = 2.0 * math.pi


class UnresolvedSymbolError(KeyError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"symbol {name!r} is not in the vocabulary")


@dataclass(frozen=True)
class CompileOptions:
    """Build-time knobs; the resonate-and-fire constants are all exposed here."""

    base_frequency_hz: float = 10.0
    gate_open_cycles: float = 4.0  # clean-up seed window: cycles [0, gate_open)
    rf_decay_half_life: float = 3.0  # cycles for the amplitude to halve
    rf_threshold_scale: float = 0.5  # x the coherent per-cycle drive
    rf_inhibition_scale: float = 1.5  # x threshold, subtracted per rival spike
    rf_reset_factor: float = 2.0  # post-spike amplitude clamp, x threshold
    rf_saturation_factor: float = 10.0  # amplitude cap, x threshold

    @property
    def period(self) -> float:
        return 1.0 / self.base_frequency_hz


@dataclass(frozen=True)
class View:
    """A node's value: component k lives in neuron index_map[k] of population."""

    population: str
    index_map: np.ndarray


@dataclass
class CompiledNetwork:
    description: NetworkDescription
    root: View
    dim: int
    cleanup_vocab_names: list[str] = field(default_factory=list)

    def neuron_count(self) -> int:
        return self.description.neuron_count()


def phases_to_delays(v: PhasorVector, period: float, conjugate: bool = False):
    """Encode phases as (weight=+1, delay) pairs; conjugation mirrors the delay."""
    phases = v.phases
    if conjugate:
        phases = np.mod(TWO_PI - phases, TWO_PI)
    return [(1.0, float(p) / TWO_PI * period) for p in phases]


def encode_population(
    desc: NetworkDescription, v: PhasorVector, name: str
) -> None:
    """Add a population of phasor sources spiking at the vector's phases."""
    desc.add_population(name, "source", v.dim, {"phases": [float(p) for p in v.phases]})


def oracle_eval(node, symbols: Vocabulary, cleanup_vocab: Vocabulary | None = None):
    """Evaluate the expression exactly with the complex-vector algebra.

    Clean-up returns the winning vocabulary entry's vector.
    """
    cleanup_vocab = cleanup_vocab or symbols
    if isinstance(node, Symbol):
        if node.name not in symbols:
            raise UnresolvedSymbolError(node.name)
        return symbols[node.name]
    if isinstance(node, Bind):
        return fhrr.bind(oracle_eval(node.left, symbols, cleanup_vocab),
                         oracle_eval(node.right, symbols, cleanup_vocab))
    if isinstance(node, Unbind):
        return fhrr.unbind(oracle_eval(node.left, symbols, cleanup_vocab),
                           oracle_eval(node.right, symbols, cleanup_vocab))
    if isinstance(node, Bundle):
        return fhrr.bundle([oracle_eval(node.left, symbols, cleanup_vocab),
                            oracle_eval(node.right, symbols, cleanup_vocab)])
    if isinstance(node, Permute):
        return fhrr.permute(oracle_eval(node.child, symbols, cleanup_vocab), node.shift)
    if isinstance(node, Power):
        return fhrr.fractional_power(
            oracle_eval(node.child, symbols, cleanup_vocab), node.alpha
        )
    if isinstance(node, Cleanup):
        child = oracle_eval(node.child, symbols, cleanup_vocab)
        name, _ = fhrr.cleanup_oracle(child, cleanup_vocab)
        return cleanup_vocab[name]
    raise TypeError(f"not a VSA expression node: {node!r}")


class _Compiler:
    def __init__(self, symbols: Vocabulary, cleanup_vocab: Vocabulary, opts: CompileOptions):
        self.symbols = symbols
        self.cleanup_vocab = cleanup_vocab
        self.opts = opts
        self.desc = NetworkDescription(period=opts.period)
        self.dim = symbols.dim
        self.counter = 0
        self.symbol_pops: dict[str, str] = {}
        self.used_cleanup = False

    def fresh(self, stem: str) -> str:
        name = f"{stem}_{self.counter}"
        self.counter += 1
        return name

    def identity(self) -> np.ndarray:
        return np.arange(self.dim)

    def lower(self, node) -> View:
        if isinstance(node, Symbol):
            if node.name not in self.symbols:
                raise UnresolvedSymbolError(node.name)
            if node.name not in self.symbol_pops:
                pop = f"sym_{node.name}"
                encode_population(self.desc, self.symbols[node.name], pop)
                self.symbol_pops[node.name] = pop
            return View(self.symbol_pops[node.name], self.identity())

        if isinstance(node, Permute):
            child = self.lower(node.child)
            # result_k = child_{(k+shift) mod N}: rewiring only, zero neurons
            return View(child.population, np.roll(child.index_map, -node.shift))

        if isinstance(node, (Bind, Unbind, Bundle)):
            left = self.lower(node.left)
            right = self.lower(node.right)
            kind, stem = {
                Bind: ("sum", "bind"),
                Unbind: ("sub", "unbind"),
                Bundle: ("avg", "bundle"),
            }[type(node)]
            name = self.fresh(stem)
            self.desc.add_population(name, kind, self.dim)
            # unbinding subtracts the right operand: left on port a, right on b
            lport, rport = ("a", "b") if kind == "sub" else ("", "")
            for k in range(self.dim):
                self.desc.connect(
                    (left.population, int(left.index_map[k])), (name, k), port=lport
                )
                self.desc.connect(
                    (right.population, int(right.index_map[k])), (name, k), port=rport
                )
            return View(name, self.identity())

        if isinstance(node, Power):
            child = self.lower(node.child)
            name = self.fresh("power")
            self.desc.add_population(name, "mult", self.dim, {"alpha": float(node.alpha)})
            for k in range(self.dim):
                self.desc.connect(
                    (child.population, int(child.index_map[k])), (name, k)
                )
            return View(name, self.identity())

        if isinstance(node, Cleanup):
            child = self.lower(node.child)
            return self.lower_cleanup(child)

        raise TypeError(f"not a VSA expression node: {node!r}")

    def lower_cleanup(self, child: View) -> View:
        vocab = self.cleanup_vocab
        if vocab.dim != self.dim:
            raise ValueError("clean-up vocabulary dimension mismatch")
        opts = self.opts
        n, m = self.dim, len(vocab)
        tag = self.counter
        self.counter += 1
        gate = f"cleanup{tag}_gate"
        feat = f"cleanup{tag}_feature"
        label = f"cleanup{tag}_label"

        self.desc.add_population(
            gate, "relay", n,
            {"window_start_cycle": 0.0, "window_end_cycle": opts.gate_open_cycles},
        )
        rf_common = {
            "decay_half_life": opts.rf_decay_half_life,
            "saturation_factor": opts.rf_saturation_factor,
            "reset_factor": opts.rf_reset_factor,
        }
        # thresholds scale with the coherent per-cycle drive: one aligned kick
        # per cycle for a feature neuron, the full feature layer for a label
        feat_threshold = opts.rf_threshold_scale * 1.0
        label_threshold = opts.rf_threshold_scale * n
        self.desc.add_population(
            feat, "rf", n,
            {"threshold": feat_threshold, "phase_locked": False, **rf_common},
        )
        self.desc.add_population(
            label, "rf", m,
            {"threshold": label_threshold, "phase_locked": True, **rf_common},
        )

        for k in range(n):
            self.desc.connect((child.population, int(child.index_map[k])), (gate, k))
            self.desc.connect((gate, k), (feat, k))

        period = opts.period
        for j, (_, pattern) in enumerate(vocab.entries):
            forward = phases_to_delays(pattern, period, conjugate=True)
            backward = phases_to_delays(pattern, period, conjugate=False)
            for k in range(n):
                w, d = forward[k]
                self.desc.connect((feat, k), (label, j), weight=w, delay=d)
                w, d = backward[k]
                self.desc.connect((label, j), (feat, k), weight=w, delay=d)

        inhibition = -opts.rf_inhibition_scale * label_threshold
        for j in range(m):
            for j2 in range(m):
                if j != j2:
                    self.desc.connect((label, j), (label, j2), weight=inhibition)

        self.desc.readouts.append((label, "cleanup_labels"))
        self.used_cleanup = True
        return View(feat, self.identity())


def compile_expression(
    node,
    symbols: Vocabulary,
    cleanup_vocab: Vocabulary | None = None,
    options: CompileOptions | None = None,
) -> CompiledNetwork:
    """Compile an expression tree into a network description plus root view.

    `symbols` resolves Symbol leaves; `cleanup_vocab` (defaulting to the
    symbols) provides the stored patterns of any clean-up stage.  The root
    of the network is tapped as readout "out"; a root-level permutation is
    carried in the returned view's index map.
    """
    cleanup_vocab = cleanup_vocab or symbols
    opts = options or CompileOptions()
    comp = _Compiler(symbols, cleanup_vocab, opts)
    root = comp.lower(node)
    comp.desc.readouts.insert(0, (root.population, "out"))
    comp.desc.validate()
    return CompiledNetwork(
        description=comp.desc,
        root=root,
        dim=symbols.dim,
        cleanup_vocab_names=cleanup_vocab.names() if comp.used_cleanup else [],
    )


def neuron_count(desc: NetworkDescription) -> int:
    return desc.neuron_count()
