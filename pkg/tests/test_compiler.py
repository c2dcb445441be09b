"""Compiler lowering: population counts, rewiring, delays, oracle commutation."""

import math

import numpy as np
import pytest

from conftest import TWO_PI, circ_diff
from phasorvsa import fhrr
from phasorvsa.compiler import (
    CompileOptions,
    UnresolvedSymbolError,
    compile_expression,
    oracle_eval,
    phases_to_delays,
)
from phasorvsa.engine import SimConfig, run
from phasorvsa.expr import parse_expression
from phasorvsa.experiments import random_vocabulary, stopwatch_vectors, spatial_vectors
from phasorvsa.fhrr import PhasorVector, Vocabulary
from phasorvsa.readout import record_to_vector


def make_symbols(names, dim=16, seed=0):
    return random_vocabulary(names, dim, seed)


def run_and_decode(net, cycles=10, mode="event"):
    config = SimConfig(duration_cycles=cycles, mode=mode)
    record = run(net.description, config)
    return record_to_vector(record, net.root.population, cycles - 1, net.root.index_map)


class TestLowering:
    def test_symbol_compiles_to_sources_only(self):
        symbols = make_symbols(["A"])
        net = compile_expression(parse_expression("A"), symbols)
        assert net.neuron_count() == 16
        assert [p.kind for p in net.description.populations] == ["source"]

    def test_symbol_reuse(self):
        symbols = make_symbols(["A"])
        net = compile_expression(parse_expression("A * A"), symbols)
        # one shared source population plus the phase-sum stage
        assert net.neuron_count() == 32

    def test_permute_adds_no_neurons(self):
        symbols = make_symbols(["A"])
        net = compile_expression(parse_expression("rho(A, 3)"), symbols)
        assert net.neuron_count() == 16
        decoded = run_and_decode(net, cycles=4)
        expected = fhrr.permute(symbols["A"], 3)
        assert np.max(circ_diff(decoded.phases, expected.phases)) < 1e-9

    def test_permute_inverse_round_trip(self):
        symbols = make_symbols(["A"])
        net = compile_expression(parse_expression("rho(rho(A, 1), -1)"), symbols)
        decoded = run_and_decode(net, cycles=4)
        assert np.max(circ_diff(decoded.phases, symbols["A"].phases)) < 1e-9

    def test_unbind_port_convention(self):
        # Unbind(w, v) must compute w - v, not v - w
        symbols = make_symbols(["W", "V"], dim=8)
        net = compile_expression(parse_expression("W / V"), symbols)
        decoded = run_and_decode(net)
        expected = fhrr.unbind(symbols["W"], symbols["V"])
        assert np.max(circ_diff(decoded.phases, expected.phases)) < 1e-6

    def test_unresolved_symbol(self):
        with pytest.raises(UnresolvedSymbolError):
            compile_expression(parse_expression("A * Ghost"), make_symbols(["A"]))

    def test_structural_contract_of_sub_stages(self):
        symbols = make_symbols(["A", "B"])
        net = compile_expression(parse_expression("A / B"), symbols)
        ports = {}
        for conn in net.description.connections:
            if conn.target[0].startswith("unbind"):
                ports.setdefault(conn.target[1], []).append(conn.port)
        assert all(sorted(v) == ["a", "b"] for v in ports.values())
        assert len(ports) == 16


class TestCleanupAssembly:
    def test_populations_and_counts(self):
        vocab = make_symbols([f"w{k}" for k in range(5)], dim=16)
        net = compile_expression(parse_expression("w0"), vocab,
                                 cleanup_vocab=vocab)
        # no cleanup in the expression: just the source
        assert net.neuron_count() == 16

        net = compile_expression(parse_expression("cleanup(w0)"), vocab)
        kinds = {p.name: (p.kind, p.size) for p in net.description.populations}
        assert any(k.startswith("cleanup") and kinds[k] == ("relay", 16) for k in kinds)
        feature = [k for k in kinds if k.endswith("_feature")]
        label = [k for k in kinds if k.endswith("_label")]
        assert kinds[feature[0]] == ("rf", 16)
        assert kinds[label[0]] == ("rf", 5)
        # the memory proper is exactly N + M neurons
        assert kinds[feature[0]][1] + kinds[label[0]][1] == 16 + 5

    def test_label_inhibition_all_pairs(self):
        vocab = make_symbols([f"w{k}" for k in range(4)], dim=8)
        net = compile_expression(parse_expression("cleanup(w0)"), vocab)
        label = [p.name for p in net.description.populations if p.name.endswith("_label")][0]
        inhib = [
            c for c in net.description.connections
            if c.source[0] == label and c.target[0] == label
        ]
        assert len(inhib) == 4 * 3
        assert all(c.weight < 0 for c in inhib)

    def test_readout_taps(self):
        vocab = make_symbols(["w0", "w1"], dim=8)
        net = compile_expression(parse_expression("cleanup(w0)"), vocab)
        labels = dict((lbl, pop) for pop, lbl in net.description.readouts)
        assert labels["out"].endswith("_feature")
        assert labels["cleanup_labels"].endswith("_label")


class TestPhasesToDelays:
    def test_zero_phase_zero_delay(self):
        v = PhasorVector(np.array([0.0]))
        assert phases_to_delays(v, 1.0) == [(1.0, 0.0)]

    def test_quarter_cycle(self):
        v = PhasorVector(np.array([math.pi / 2]))
        (w, d), = phases_to_delays(v, 1.0)
        assert (w, d) == (1.0, pytest.approx(0.25))

    def test_conjugate_mirrors_delay(self):
        v = PhasorVector(np.array([math.pi / 2]))
        (_, d), = phases_to_delays(v, 1.0, conjugate=True)
        assert d == pytest.approx(0.75)

    def test_matched_pattern_maximizes_coherence(self):
        # delay-encoding a pattern makes kicks from that same pattern align:
        # the matched complex sum dominates 1000 random patterns
        rng = np.random.default_rng(3)
        pattern = rng.uniform(0, TWO_PI, 64)
        delays = np.array([d for _, d in phases_to_delays(
            PhasorVector(pattern), 1.0, conjugate=True)])
        def coherence(g):
            arrival = np.mod(g / TWO_PI + delays, 1.0) * TWO_PI
            return abs(np.sum(np.exp(1j * arrival)))
        matched = coherence(pattern)
        assert matched == pytest.approx(64.0, rel=1e-9)
        for _ in range(1000):
            assert coherence(rng.uniform(0, TWO_PI, 64)) < matched


class TestOracleEval:
    def test_cleanup_returns_clean_entry(self):
        vocab = make_symbols(["a", "b"], dim=32)
        noisy = PhasorVector(vocab["a"].phases + 0.05)
        symbols = Vocabulary(32, list(vocab.entries))
        symbols.add("noisy", noisy)
        out = oracle_eval(parse_expression("cleanup(noisy)"), symbols, vocab)
        assert out == vocab["a"]

    def test_matches_direct_algebra(self):
        symbols = make_symbols(["A", "B", "C"], dim=24, seed=9)
        expr = parse_expression("rho(A * B, 2) / C ^ 0.5 + B")
        got = oracle_eval(expr, symbols)
        expected = fhrr.bundle([
            fhrr.unbind(
                fhrr.permute(fhrr.bind(symbols["A"], symbols["B"]), 2),
                fhrr.fractional_power(symbols["C"], 0.5),
            ),
            symbols["B"],
        ])
        assert np.max(circ_diff(got.phases, expected.phases)) < 1e-12


class TestCompilerOracleCommutation:
    def test_small_random_expressions(self):
        # depth <= 3 over random vocabularies; event mode is near-exact
        templates = [
            "A * B",
            "A / B * C",
            "rho(A * B, 1) / C",
            "A ^ 0.8 * B",
            "A + B * C",
            "rho(A + B, -2) * C ^ -1.2",
        ]
        for seed, template in enumerate(templates):
            symbols = make_symbols(["A", "B", "C"], dim=16, seed=100 + seed)
            expr = parse_expression(template)
            net = compile_expression(expr, symbols)
            decoded = run_and_decode(net, cycles=12)
            expected = oracle_eval(expr, symbols)
            assert np.max(circ_diff(decoded.phases, expected.phases)) < 1e-6, template


class TestExperimentNetworks:
    def test_stopwatch_network_is_705_neurons(self):
        vocab, f = stopwatch_vectors(100, 0)
        symbols = Vocabulary(100, list(vocab.entries))
        symbols.add("f", f)
        net = compile_expression(
            parse_expression("cleanup(rho(f / C / S, -1))"), symbols,
            cleanup_vocab=vocab,
        )
        assert net.neuron_count() == 705
        by_kind = {}
        for p in net.description.populations:
            by_kind[p.kind] = by_kind.get(p.kind, 0) + p.size
        assert by_kind == {"source": 300, "sub": 200, "relay": 100, "rf": 105}

    def test_spatial_location_network(self):
        base, vocab, v = spatial_vectors(50, 0)
        symbols = Vocabulary(50, list(base.entries))
        symbols.add("v", v)
        net = compile_expression(
            parse_expression("cleanup(v / X ^ 1.85)"), symbols, cleanup_vocab=vocab
        )
        # v, X sources + mult + sub + gate + feature + 10 labels
        assert net.neuron_count() == 6 * 50 + 10
