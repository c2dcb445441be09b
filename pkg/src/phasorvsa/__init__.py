"""Spiking-phasor VSA: the FHRR operation set as spike-timing computations.

The exact complex-vector algebra lives in `fhrr`; `compiler` lowers
expressions over named symbols into networks of integrator neurons that
`engine` simulates in fixed-step or event-driven mode; `readout` converts
spike records back into vectors and similarity reports.
"""

from .compiler import (
    CompiledNetwork,
    CompileOptions,
    compile_expression,
    encode_population,
    neuron_count,
    oracle_eval,
    phases_to_delays,
)
from .engine import GlobalClock, SimConfig, SpikeEvent, SpikeRecord, run
from .expr import ParseError, parse_expression
from .fhrr import (
    DegenerateBundleError,
    PhasorVector,
    Vocabulary,
    bind,
    bundle,
    cleanup_oracle,
    fractional_power,
    permute,
    random_vector,
    similarity,
    unbind,
)
from .network import ConnectionSpec, NetworkDescription, PopulationSpec
from .readout import SimilarityReport, SilentNeuronError, SspSweep, record_to_vector, ssp_sweep

__version__ = "0.1.0"

__all__ = [
    "CompileOptions",
    "CompiledNetwork",
    "ConnectionSpec",
    "DegenerateBundleError",
    "GlobalClock",
    "NetworkDescription",
    "ParseError",
    "PhasorVector",
    "PopulationSpec",
    "SilentNeuronError",
    "SimConfig",
    "SimilarityReport",
    "SpikeEvent",
    "SpikeRecord",
    "SspSweep",
    "Vocabulary",
    "bind",
    "bundle",
    "cleanup_oracle",
    "compile_expression",
    "encode_population",
    "fractional_power",
    "neuron_count",
    "oracle_eval",
    "parse_expression",
    "permute",
    "phases_to_delays",
    "random_vector",
    "record_to_vector",
    "run",
    "similarity",
    "ssp_sweep",
    "unbind",
]
