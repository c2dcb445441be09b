"""Shared builders for single-operation spiking networks."""

import math

import numpy as np

from phasorvsa.engine import SimConfig, run
from phasorvsa.network import NetworkDescription

TWO_PI = 2.0 * math.pi


def single_op_network(kind, phases_a, phases_b=None, alpha=None, period=0.1):
    """Source population(s) feeding one operator population, one neuron per case."""
    phases_a = np.asarray(phases_a, dtype=float)
    n = len(phases_a)
    desc = NetworkDescription(period=period)
    desc.add_population("in_a", "source", n, {"phases": list(phases_a)})
    if phases_b is not None:
        phases_b = np.asarray(phases_b, dtype=float)
        desc.add_population("in_b", "source", n, {"phases": list(phases_b)})
    params = {} if alpha is None else {"alpha": float(alpha)}
    desc.add_population("out", kind, n, params)
    for k in range(n):
        desc.connect(("in_a", k), ("out", k), port="a" if kind == "sub" else "")
        if phases_b is not None:
            desc.connect(("in_b", k), ("out", k), port="b" if kind == "sub" else "")
    return desc


def run_single_op(desc, mode, cycles=6, freq=10.0, dt=None):
    dt = dt if dt is not None else (1.0 / freq) / 1000.0
    config = SimConfig(base_frequency_hz=freq, dt_s=dt, duration_cycles=cycles, mode=mode)
    return run(desc, config)


def decoded(record, pop, cycle):
    return record.population_phases(pop, cycle)


def circ_diff(a, b):
    return np.abs(np.mod(np.asarray(a) - np.asarray(b) + math.pi, TWO_PI) - math.pi)


def op_oracle(kind, a, b=None, alpha=None):
    """Componentwise exact result of one spike-timing operation."""
    a = np.asarray(a, dtype=float)
    if kind == "sum":
        return np.mod(a + b, TWO_PI)
    if kind == "sub":
        return np.mod(a - b, TWO_PI)
    if kind == "mult":
        centered = np.where(a <= math.pi, a, a - TWO_PI)
        return np.mod(centered * alpha, TWO_PI)
    if kind == "avg":
        return np.mod(np.angle(np.exp(1j * a) + np.exp(1j * np.asarray(b))), TWO_PI)
    raise ValueError(kind)
