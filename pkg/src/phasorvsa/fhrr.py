"""Exact FHRR algebra over unit-modulus complex vectors stored as phase angles.

A symbol is a vector of N phasors e^{i*phi_k}; since every modulus is 1 we
only keep the phases, canonically in [0, 2*pi).  Binding multiplies phasors
(adds phases), unbinding divides (subtracts phases), bundling adds the
complex numbers and keeps only the phase of the sum, permutation circularly
shifts components, and fractional powers scale the centered phase.

This module is the encoding front-end (building composite vectors offline)
and the correctness oracle for every spiking computation in the package.
All functions are pure and safe to call concurrently.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi

# Complex sums with modulus below this are treated as exact antipodal
# cancellation: there is no meaningful phase to keep.
DEGENERATE_BUNDLE_TOL = 1e-9


class DimensionMismatchError(ValueError):
    """Operands of an elementwise operation have different dimensions."""


class DegenerateBundleError(ValueError):
    """A bundle component cancelled to (numerically) zero modulus."""

    def __init__(self, component: int, modulus: float):
        self.component = component
        self.modulus = modulus
        super().__init__(
            f"bundle is degenerate at component {component}: "
            f"complex sum modulus {modulus:.3e} is below {DEGENERATE_BUNDLE_TOL:.0e} "
            "(antipodal cancellation)"
        )


def canonical_phase(phases: np.ndarray) -> np.ndarray:
    """Map arbitrary angles to the canonical representative in [0, 2*pi)."""
    out = np.mod(phases, TWO_PI)
    # mod can return 2*pi for inputs like -1e-17; fold those back to 0.
    out[out >= TWO_PI] = 0.0
    return out


def centered_phase(phases: np.ndarray) -> np.ndarray:
    """Map canonical phases [0, 2*pi) to the centered representative (-pi, pi]."""
    return np.where(phases <= math.pi, phases, phases - TWO_PI)


def circular_distance(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Absolute angular distance between phases, in [0, pi]."""
    d = np.abs(np.mod(np.asarray(a) - np.asarray(b) + math.pi, TWO_PI) - math.pi)
    return d


@dataclass(frozen=True)
class PhasorVector:
    """N unit-modulus complex numbers stored as phase angles in [0, 2*pi)."""

    phases: np.ndarray

    def __post_init__(self):
        phases = np.asarray(self.phases, dtype=np.float64)
        if phases.ndim != 1:
            raise ValueError("phases must be a 1-D array")
        if phases.size < 1:
            raise ValueError("PhasorVector needs at least one component")
        if not np.all(np.isfinite(phases)):
            raise ValueError("phases must be finite")
        object.__setattr__(self, "phases", canonical_phase(phases))
        self.phases.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.phases.shape[0]

    def to_complex(self) -> np.ndarray:
        return np.exp(1j * self.phases)

    def __eq__(self, other) -> bool:
        return isinstance(other, PhasorVector) and np.array_equal(self.phases, other.phases)


def _check_dims(u: PhasorVector, v: PhasorVector) -> None:
    if u.dim != v.dim:
        raise DimensionMismatchError(f"dimension mismatch: {u.dim} vs {v.dim}")


def random_vector(dim: int, seed: int) -> PhasorVector:
    """Draw dim phases i.i.d. uniform on [0, 2*pi) from a seeded generator.

    The same (dim, seed) always reproduces the identical vector.
    """
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    rng = np.random.default_rng(seed)
    return PhasorVector(rng.uniform(0.0, TWO_PI, size=dim))


def bind(u: PhasorVector, v: PhasorVector) -> PhasorVector:
    """Hadamard product of the phasors: componentwise phase addition mod 2*pi."""
    _check_dims(u, v)
    return PhasorVector(u.phases + v.phases)


def unbind(w: PhasorVector, v: PhasorVector) -> PhasorVector:
    """Multiply by the conjugate: componentwise phase subtraction mod 2*pi.

    unbind(bind(u, v), v) recovers u to machine precision.
    """
    _check_dims(w, v)
    return PhasorVector(w.phases - v.phases)


def bundle(vs: list[PhasorVector]) -> PhasorVector:
    """Superpose vectors: complex sum per component, modulus discarded.

    Raises DegenerateBundleError (naming the component) if some component's
    complex sum cancels to zero modulus, since an arbitrary phase there would
    corrupt downstream similarities undetectably.
    """
    if len(vs) < 1:
        raise ValueError("bundle needs at least one vector")
    dim = vs[0].dim
    for v in vs[1:]:
        if v.dim != dim:
            raise DimensionMismatchError(f"dimension mismatch: {dim} vs {v.dim}")
    total = np.sum([v.to_complex() for v in vs], axis=0)
    moduli = np.abs(total)
    if np.any(moduli < DEGENERATE_BUNDLE_TOL):
        k = int(np.argmin(moduli))
        raise DegenerateBundleError(k, float(moduli[k]))
    return PhasorVector(np.angle(total))


def permute(v: PhasorVector, shift: int) -> PhasorVector:
    """Circularly shift components so result_k = v_{(k+shift) mod N}."""
    return PhasorVector(np.roll(v.phases, -int(shift)))


def fractional_power(v: PhasorVector, alpha: float) -> PhasorVector:
    """Raise each phasor to a real exponent: scale the centered phase by alpha.

    Phases are interpreted in (-pi, pi] before scaling, so alpha between 0
    and 1 moves every component toward phase 0.
    """
    centered = centered_phase(v.phases)
    return PhasorVector(centered * float(alpha))


def similarity(u: PhasorVector, v: PhasorVector) -> float:
    """Real part of the normalized complex inner product Re((1/N) sum e^{i(u_k - v_k)}).

    Normalizing by N makes self-similarity exactly 1, so confidence
    thresholds like 0.99 are directly meaningful.
    """
    _check_dims(u, v)
    return float(np.mean(np.cos(u.phases - v.phases)))


@dataclass
class Vocabulary:
    """Ordered, uniquely named PhasorVectors sharing one dimension."""

    dim: int
    entries: list[tuple[str, PhasorVector]] = field(default_factory=list)

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("vocabulary dim must be >= 1")
        seen = set()
        for name, vec in self.entries:
            if name in seen:
                raise ValueError(f"duplicate vocabulary name: {name!r}")
            seen.add(name)
            if vec.dim != self.dim:
                raise DimensionMismatchError(
                    f"entry {name!r} has dim {vec.dim}, vocabulary has dim {self.dim}"
                )

    def add(self, name: str, vector: PhasorVector) -> None:
        if name in self.names():
            raise ValueError(f"duplicate vocabulary name: {name!r}")
        if vector.dim != self.dim:
            raise DimensionMismatchError(
                f"entry {name!r} has dim {vector.dim}, vocabulary has dim {self.dim}"
            )
        self.entries.append((name, vector))

    def names(self) -> list[str]:
        return [name for name, _ in self.entries]

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, name: str) -> bool:
        return name in self.names()

    def __getitem__(self, name: str) -> PhasorVector:
        for entry_name, vec in self.entries:
            if entry_name == name:
                return vec
        raise KeyError(name)

    def to_json(self) -> str:
        doc = {
            "dim": self.dim,
            "entries": [
                # repr round-trips float64 exactly (17 significant digits)
                {"name": name, "phases": [float(p) for p in vec.phases]}
                for name, vec in self.entries
            ],
        }
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "Vocabulary":
        doc = json.loads(text)
        entries = [
            (e["name"], PhasorVector(np.asarray(e["phases"], dtype=np.float64)))
            for e in doc["entries"]
        ]
        return cls(dim=int(doc["dim"]), entries=entries)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path) -> "Vocabulary":
        with open(path) as fh:
            return cls.from_json(fh.read())


def cleanup_oracle(v: PhasorVector, vocab: Vocabulary) -> tuple[str, float]:
    """Return the (name, similarity) of the closest vocabulary entry.

    Ties break toward the lowest entry index.
    """
    if len(vocab) == 0:
        raise ValueError("cleanup against an empty vocabulary")
    scores = [similarity(v, vec) for _, vec in vocab.entries]
    best = int(np.argmax(scores))
    return vocab.entries[best][0], float(scores[best])
