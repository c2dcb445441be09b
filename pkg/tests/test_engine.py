"""Engine kernel tests: clock, scheduling, determinism, decode conventions."""

import math

import numpy as np
import pytest

from conftest import TWO_PI, run_single_op, single_op_network
from phasorvsa.engine import (
    EventQueue,
    GlobalClock,
    RuntimeConnection,
    SimConfig,
    SpikeEvent,
    run,
)
from phasorvsa.network import NetworkDescription, NetworkValidationError


class TestSimConfig:
    def test_period_and_steps(self):
        cfg = SimConfig(base_frequency_hz=10.0, dt_s=1e-4, duration_cycles=8)
        assert cfg.period == 0.1
        assert cfg.steps_per_cycle == 1000
        assert cfg.duration_s == pytest.approx(0.8)

    def test_dt_must_divide_period(self):
        with pytest.raises(ValueError):
            SimConfig(base_frequency_hz=10.0, dt_s=3e-4)

    def test_mode_aliases(self):
        assert SimConfig(mode="fixed").mode == "fixed_step"
        assert SimConfig(mode="event").mode == "event_driven"
        with pytest.raises(ValueError):
            SimConfig(mode="warp")

    def test_config_file_round_trip(self, tmp_path):
        cfg = SimConfig(base_frequency_hz=5.0, dt_s=2e-4, duration_cycles=9,
                        mode="fixed", seed=17)
        path = tmp_path / "sim.cfg"
        path.write_text(cfg.to_file_text() + "# trailing comment\n")
        loaded = SimConfig.from_file(path)
        assert loaded == cfg

    def test_config_file_unknown_key(self, tmp_path):
        path = tmp_path / "sim.cfg"
        path.write_text("base_frequency_hz = 10\nwarp_factor = 9\n")
        with pytest.raises(ValueError, match="warp_factor"):
            SimConfig.from_file(path)


class TestGlobalClock:
    def test_phase_formula(self):
        clock = GlobalClock(1.0)
        assert clock.phase_of(0.25) == pytest.approx(math.pi / 2, abs=1e-12)
        assert clock.cycle_of(2.25) == 2

    def test_boundary_belongs_to_new_cycle(self):
        clock = GlobalClock(0.1)
        assert clock.cycle_of(0.3) == 3
        assert clock.phase_of(0.3) == pytest.approx(0.0, abs=1e-6)

    def test_consistency_over_many_cycles(self):
        clock = GlobalClock(0.1)
        for n in range(50):
            t = n * 0.1 + 0.0371
            assert abs(clock.phase_of(t) - TWO_PI * 0.371) < 1e-9


class TestEventQueue:
    def test_schedule_applies_delay(self):
        q = EventQueue()
        conn = RuntimeConnection(0, 0, 0, 5, 1.0, 0.025, "")
        q.schedule(SpikeEvent(0, 0.4), conn)
        time, kind, src, tgt, _seq, payload = q.pop()
        assert time == pytest.approx(0.425)
        assert (kind, src, tgt) == (EventQueue.DELIVERY, 0, 5)
        assert payload is conn

    def test_zero_delay_delivers_at_spike_time(self):
        q = EventQueue()
        q.schedule(SpikeEvent(3, 0.2), RuntimeConnection(3, 0, 0, 4, 1.0, 0.0, ""))
        assert q.pop()[0] == 0.2

    def test_tie_order_time_then_source_then_target(self):
        q = EventQueue()
        q.schedule(SpikeEvent(7, 0.1), RuntimeConnection(7, 0, 0, 1, 1.0, 0.0, ""))
        q.schedule(SpikeEvent(2, 0.1), RuntimeConnection(2, 0, 0, 9, 1.0, 0.0, ""))
        q.schedule(SpikeEvent(2, 0.1), RuntimeConnection(2, 0, 0, 3, 1.0, 0.0, ""))
        order = [(e[2], e[3]) for e in (q.pop(), q.pop(), q.pop())]
        assert order == [(2, 3), (2, 9), (7, 1)]


class TestRun:
    def test_empty_network_empty_record(self):
        record = run(NetworkDescription(period=0.1), SimConfig(duration_cycles=3))
        assert record.total_neurons == 0
        assert record.to_csv().strip() == "neuron_id,population,time_s,cycle,phase_rad"

    def test_paper_source_timing(self):
        # phase pi/2 with a 1 s period spikes 0.25 s into every cycle
        desc = NetworkDescription(period=1.0)
        desc.add_population("src", "source", 1, {"phases": [math.pi / 2]})
        cfg = SimConfig(base_frequency_hz=1.0, dt_s=1e-3, duration_cycles=3,
                        mode="event")
        record = run(desc, cfg)
        assert np.allclose(record.times("src", 0), [0.25, 1.25, 2.25], atol=1e-9)

    def test_determinism_bit_identical(self):
        desc = single_op_network("sum", [0.3, 5.1], [2.2, 4.0])
        a = run_single_op(desc, "event").to_csv()
        b = run_single_op(desc, "event").to_csv()
        assert a == b
        c = run_single_op(desc, "fixed").to_csv()
        d = run_single_op(desc, "fixed").to_csv()
        assert c == d

    def test_commutative_tie_handling(self):
        # two sources spiking at the identical instant: swapping the source
        # order must not change a phase-sum output
        phase = 0.4 * TWO_PI
        out = {}
        for order in ("ab", "ba"):
            desc = NetworkDescription(period=0.1)
            first, second = ("in_a", "in_b") if order == "ab" else ("in_b", "in_a")
            desc.add_population(first, "source", 1, {"phases": [phase]})
            desc.add_population(second, "source", 1, {"phases": [phase]})
            desc.add_population("out", "sum", 1)
            desc.connect(("in_a", 0), ("out", 0))
            desc.connect(("in_b", 0), ("out", 0))
            record = run_single_op(desc, "event")
            out[order] = record.decode_phase("out", 0, 4)
        assert out["ab"] == pytest.approx(out["ba"], abs=1e-9)

    def test_delay_chain_composition(self):
        # m relay hops with delays shift the decoded phase by 2*pi*sum(d)/T
        period = 0.1
        delays = [0.013, 0.027, 0.041]
        desc = NetworkDescription(period=period)
        desc.add_population("src", "source", 1, {"phases": [0.2 * TWO_PI]})
        prev = "src"
        for j, d in enumerate(delays):
            name = f"hop{j}"
            desc.add_population(name, "relay", 1, {})
            desc.connect((prev, 0), (name, 0), delay=d)
            prev = name
        record = run_single_op(desc, "event", cycles=5)
        expected = (0.2 * TWO_PI + TWO_PI * sum(delays) / period) % TWO_PI
        got = record.decode_phase(prev, 0, 4)
        assert got == pytest.approx(expected, abs=1e-9)

    def test_full_period_delay_is_noop(self):
        desc = NetworkDescription(period=0.1)
        desc.add_population("src", "source", 1, {"phases": [1.0]})
        desc.add_population("relay", "relay", 1, {})
        desc.connect(("src", 0), ("relay", 0), delay=0.1)  # reduced mod T to 0
        assert desc.connections[0].delay == 0.0

    def test_mismatched_period_rejected(self):
        desc = NetworkDescription(period=0.5)
        desc.add_population("src", "source", 1, {"phases": [0.0]})
        with pytest.raises(NetworkValidationError):
            run(desc, SimConfig(base_frequency_hz=10.0))

    def test_non_finite_state_aborts_with_neuron_and_time(self):
        from phasorvsa.engine import SimulationError, _Runtime

        desc = single_op_network("sum", [0.2], [0.4])
        rt = _Runtime(desc, SimConfig())
        rt.pops[2].p[0] = math.inf
        with pytest.raises(SimulationError, match=r"out\[0\].*t="):
            rt.check_finite(0.25)


class TestDecode:
    def test_boundary_spike_is_phase_zero_of_new_cycle(self):
        desc = NetworkDescription(period=0.1)
        desc.add_population("src", "source", 1, {"phases": [0.0]})
        record = run_single_op(desc, "event", cycles=4)
        assert record.decode_phase("src", 0, 2) == pytest.approx(0.0, abs=1e-9)
        assert record.spikes_in_cycle("src", 0, 2)[0] == pytest.approx(0.2, abs=1e-12)

    def test_silent_neuron_decodes_to_none(self):
        desc = NetworkDescription(period=0.1)
        desc.add_population("src", "source", 1, {"phases": [0.0]})
        desc.add_population("dead", "rf", 1, {"threshold": 99.0})
        desc.connect(("src", 0), ("dead", 0))
        record = run_single_op(desc, "event", cycles=3)
        assert record.decode_phase("dead", 0, 2) is None

    def test_multi_spike_cycle_flagged_first_returned(self):
        # a relay fed by two sources re-emits twice per cycle
        desc = NetworkDescription(period=0.1)
        desc.add_population("a", "source", 1, {"phases": [0.1 * TWO_PI]})
        desc.add_population("b", "source", 1, {"phases": [0.6 * TWO_PI]})
        desc.add_population("relay", "relay", 1, {})
        desc.connect(("a", 0), ("relay", 0))
        desc.connect(("b", 0), ("relay", 0))
        record = run_single_op(desc, "event", cycles=3)
        assert any(a.kind == "multi-spike-cycle" for a in record.anomalies)
        assert record.decode_phase("relay", 0, 1) == pytest.approx(0.1 * TWO_PI, abs=1e-9)

    def test_csv_schema(self):
        desc = NetworkDescription(period=0.1)
        desc.add_population("src", "source", 1, {"phases": [math.pi]})
        record = run_single_op(desc, "event", cycles=2)
        lines = record.to_csv().strip().splitlines()
        assert lines[0] == "neuron_id,population,time_s,cycle,phase_rad"
        first = lines[1].split(",")
        assert first[0] == "0" and first[1] == "src"
        assert float(first[2]) == pytest.approx(0.05)
        assert int(first[3]) == 0
        assert float(first[4]) == pytest.approx(math.pi)


class TestStructuralValidation:
    def test_sub_needs_both_ports(self):
        desc = NetworkDescription(period=0.1)
        desc.add_population("a", "source", 1, {"phases": [0.0]})
        desc.add_population("b", "source", 1, {"phases": [0.0]})
        desc.add_population("out", "sub", 1)
        desc.connect(("a", 0), ("out", 0), port="a")
        desc.connect(("b", 0), ("out", 0), port="a")
        with pytest.raises(NetworkValidationError, match="port"):
            desc.validate()

    def test_mult_single_input(self):
        desc = NetworkDescription(period=0.1)
        desc.add_population("a", "source", 1, {"phases": [0.0]})
        desc.add_population("out", "mult", 1, {"alpha": 2.0})
        desc.connect(("a", 0), ("out", 0))
        desc.connect(("a", 0), ("out", 0))
        with pytest.raises(NetworkValidationError, match="inputs"):
            desc.validate()

    def test_negative_weight_only_into_rf(self):
        desc = NetworkDescription(period=0.1)
        desc.add_population("a", "source", 1, {"phases": [0.0]})
        desc.add_population("out", "relay", 1, {})
        desc.connect(("a", 0), ("out", 0), weight=-1.0)
        with pytest.raises(NetworkValidationError, match="inhibitory"):
            desc.validate()

    def test_description_json_round_trip(self):
        desc = single_op_network("sub", [0.3], [0.9])
        text = desc.to_json()
        loaded = NetworkDescription.from_json(text)
        assert loaded.to_json() == text
        assert loaded.content_hash() == desc.content_hash()
