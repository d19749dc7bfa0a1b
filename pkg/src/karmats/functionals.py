"""Edge functionals, noise models, and node aggregation.

A functional maps ordered parent windows (lists of real-valued history,
most recent first) to a single real value. Structured kinds carry their
own parameters and report a fixed arity; ``eval_functional`` is the one
entry point the simulator uses, and it is pure: no state, no RNG.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import TYPE_CHECKING, Sequence, Union

import numpy as np

if TYPE_CHECKING:
    from .graph import VariableSpec

__all__ = [
    "NoiseSpec",
    "Identity",
    "Null",
    "LinearWindow",
    "Threshold",
    "CategoricalTable",
    "Mlp",
    "FunctionalSpec",
    "NAIVE_FUNCTIONALS",
    "eval_functional",
    "aggregate_node",
    "sample_noise",
    "random_mlp",
]


class FunctionalError(ValueError):
    """Raised when a functional is built or evaluated with bad shapes."""


def _require_finite(name: str, values: Sequence[float]) -> None:
    for v in values:
        if not math.isfinite(v):
            raise FunctionalError(f"{name}: non-finite parameter {v!r}")


@dataclass(frozen=True)
class NoiseSpec:
    """Per-variable additive noise: none, gaussian(mean, std) or uniform(low, high)."""

    kind: str = "none"
    mean: float = 0.0
    std: float = 0.0
    low: float = 0.0
    high: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ("none", "gaussian", "uniform"):
            raise FunctionalError(f"unknown noise kind {self.kind!r}")
        if self.kind == "gaussian":
            _require_finite("gaussian noise", (self.mean, self.std))
            if self.std < 0:
                raise FunctionalError(f"gaussian noise: std must be >= 0, got {self.std}")
        if self.kind == "uniform":
            _require_finite("uniform noise", (self.low, self.high))
            if self.high < self.low:
                raise FunctionalError(
                    f"uniform noise: high {self.high} < low {self.low}"
                )

    @classmethod
    def none(cls) -> "NoiseSpec":
        return cls(kind="none")

    @classmethod
    def gaussian(cls, mean: float, std: float) -> "NoiseSpec":
        return cls(kind="gaussian", mean=float(mean), std=float(std))

    @classmethod
    def uniform(cls, low: float, high: float) -> "NoiseSpec":
        return cls(kind="uniform", low=float(low), high=float(high))


def sample_noise(spec: NoiseSpec, rng: np.random.Generator) -> float:
    """Draw one value from ``spec`` using ``rng``.

    ``none`` consumes nothing from the stream and returns 0.0, so a
    noiseless variable keeps a stable substream position.
    """
    if spec.kind == "none":
        return 0.0
    if spec.kind == "gaussian":
        return float(rng.normal(spec.mean, spec.std))
    return float(rng.uniform(spec.low, spec.high))


@dataclass(frozen=True)
class Identity:
    """Copies the single parent value through unchanged."""

    kind = "identity"

    @property
    def arity(self) -> int:
        return 1

    @property
    def window(self) -> int:
        return 1

    def evaluate(self, inputs: Sequence[Sequence[float]]) -> float:
        return float(inputs[0][0])


@dataclass(frozen=True)
class Null:
    """Contributes exactly zero; the identity element of additive aggregation.

    Accepts any arity so a whole group can be silenced without retyping it.
    """

    kind = "null"

    @property
    def arity(self) -> None:
        return None

    @property
    def window(self) -> int:
        return 1

    def evaluate(self, inputs: Sequence[Sequence[float]]) -> float:
        return 0.0


@dataclass(frozen=True)
class LinearWindow:
    """Affine map over a per-parent history window.

    ``coeffs[p][w]`` multiplies parent ``p`` at ``w`` steps before its edge
    lag, so window length 1 is a plain weighted sum plus intercept.
    """

    coeffs: tuple[tuple[float, ...], ...]
    intercept: float = 0.0
    kind = "linear_window"

    def __post_init__(self) -> None:
        coeffs = tuple(tuple(float(c) for c in row) for row in self.coeffs)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "intercept", float(self.intercept))
        if not coeffs:
            raise FunctionalError("linear_window: needs at least one parent row")
        width = len(coeffs[0])
        if width < 1:
            raise FunctionalError("linear_window: window length must be >= 1")
        for row in coeffs:
            if len(row) != width:
                raise FunctionalError(
                    f"linear_window: ragged coefficient rows {[len(r) for r in coeffs]}"
                )
            _require_finite("linear_window", row)
        _require_finite("linear_window", (self.intercept,))

    @property
    def arity(self) -> int:
        return len(self.coeffs)

    @property
    def window(self) -> int:
        return len(self.coeffs[0])

    def evaluate(self, inputs: Sequence[Sequence[float]]) -> float:
        total = self.intercept
        for row, window in zip(self.coeffs, inputs):
            for c, x in zip(row, window):
                total += c * x
        return float(total)


@dataclass(frozen=True)
class Threshold:
    """Step map from one real parent to a pair of output codes."""

    cut: float
    low: float = 0.0
    high: float = 1.0
    kind = "threshold"

    def __post_init__(self) -> None:
        _require_finite("threshold", (self.cut, self.low, self.high))
        object.__setattr__(self, "cut", float(self.cut))
        object.__setattr__(self, "low", float(self.low))
        object.__setattr__(self, "high", float(self.high))

    @property
    def arity(self) -> int:
        return 1

    @property
    def window(self) -> int:
        return 1

    def evaluate(self, inputs: Sequence[Sequence[float]]) -> float:
        return self.high if inputs[0][0] >= self.cut else self.low


@dataclass(frozen=True)
class CategoricalTable:
    """Total lookup from parent code tuples to an output value.

    ``entries`` maps rounded parent codes to outputs; ``default`` covers
    unlisted combinations when given, otherwise they are an error.
    """

    entries: dict[tuple[int, ...], float]
    default: float | None = None
    kind = "categorical_table"

    def __post_init__(self) -> None:
        fixed = {}
        arity = None
        for codes, value in self.entries.items():
            key = tuple(int(c) for c in codes)
            if arity is None:
                arity = len(key)
            elif len(key) != arity:
                raise FunctionalError(
                    f"categorical_table: mixed key lengths {len(key)} vs {arity}"
                )
            _require_finite("categorical_table", (float(value),))
            fixed[key] = float(value)
        if not fixed:
            raise FunctionalError("categorical_table: empty table")
        object.__setattr__(self, "entries", fixed)
        if self.default is not None:
            _require_finite("categorical_table", (float(self.default),))
            object.__setattr__(self, "default", float(self.default))

    @property
    def arity(self) -> int:
        return len(next(iter(self.entries)))

    @property
    def window(self) -> int:
        return 1

    def evaluate(self, inputs: Sequence[Sequence[float]]) -> float:
        key = tuple(int(math.floor(w[0] + 0.5)) for w in inputs)
        if key in self.entries:
            return self.entries[key]
        if self.default is not None:
            return self.default
        raise FunctionalError(f"categorical_table: no entry for codes {key}")


@dataclass(frozen=True)
class Mlp:
    """Two-layer perceptron with ReLU, one scalar output.

    Weight orientation is input-major: ``w1`` is (arity x hidden), ``w2``
    has one weight per hidden unit.
    """

    w1: tuple[tuple[float, ...], ...]
    b1: tuple[float, ...]
    w2: tuple[float, ...]
    b2: float = 0.0
    kind = "mlp"

    def __post_init__(self) -> None:
        w1 = tuple(tuple(float(v) for v in row) for row in self.w1)
        b1 = tuple(float(v) for v in self.b1)
        w2 = tuple(float(v) for v in self.w2)
        object.__setattr__(self, "w1", w1)
        object.__setattr__(self, "b1", b1)
        object.__setattr__(self, "w2", w2)
        object.__setattr__(self, "b2", float(self.b2))
        if not w1 or not w1[0]:
            raise FunctionalError("mlp: empty first layer")
        hidden = len(w1[0])
        for row in w1:
            if len(row) != hidden:
                raise FunctionalError("mlp: ragged first-layer rows")
            _require_finite("mlp", row)
        if len(b1) != hidden or len(w2) != hidden:
            raise FunctionalError(
                f"mlp: hidden width mismatch w1={hidden} b1={len(b1)} w2={len(w2)}"
            )
        _require_finite("mlp", b1)
        _require_finite("mlp", w2)
        _require_finite("mlp", (self.b2,))

    @property
    def arity(self) -> int:
        return len(self.w1)

    @property
    def window(self) -> int:
        return 1

    @property
    def hidden(self) -> int:
        return len(self.b1)

    @cached_property
    def _arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return (
            np.asarray(self.w1, dtype=float),
            np.asarray(self.b1, dtype=float),
            np.asarray(self.w2, dtype=float),
        )

    def evaluate(self, inputs: Sequence[Sequence[float]]) -> float:
        w1, b1, w2 = self._arrays
        x = np.fromiter((w[0] for w in inputs), dtype=float, count=len(inputs))
        h = np.maximum(x @ w1 + b1, 0.0)
        return float(h @ w2 + self.b2)


FunctionalSpec = Union[Identity, Null, LinearWindow, Threshold, CategoricalTable, Mlp]

# Reserved functional ids every graph understands without a table entry.
NAIVE_FUNCTIONALS: dict[str, FunctionalSpec] = {
    "identity": Identity(),
    "null": Null(),
}


def _normalize_inputs(inputs: Sequence) -> list[list[float]]:
    windows: list[list[float]] = []
    for item in inputs:
        if isinstance(item, (int, float)):
            windows.append([float(item)])
        else:
            windows.append([float(v) for v in item])
    return windows


def eval_functional(spec: FunctionalSpec, inputs: Sequence) -> float:
    """Apply ``spec`` to ordered parent windows and return one real value.

    ``inputs`` holds one history window per parent (a bare number is
    shorthand for a window of length one). Arity and window length are
    checked against the spec; the result must be finite.
    """
    windows = _normalize_inputs(inputs)
    if spec.arity is not None and len(windows) != spec.arity:
        raise FunctionalError(
            f"{spec.kind}: expected {spec.arity} parent(s), got {len(windows)}"
        )
    for w in windows:
        if len(w) < spec.window:
            raise FunctionalError(
                f"{spec.kind}: window of {len(w)} value(s), needs {spec.window}"
            )
    out = spec.evaluate(windows)
    if not math.isfinite(out):
        raise FunctionalError(f"{spec.kind}: non-finite output {out!r}")
    return out


def _plurality(codes: Sequence[int]) -> int:
    # Ties resolve to the lowest code so voting stays deterministic.
    counts: dict[int, int] = {}
    for c in codes:
        counts[c] = counts.get(c, 0) + 1
    best = max(counts.values())
    return min(c for c, n in counts.items() if n == best)


def aggregate_node(var: "VariableSpec", outputs: Sequence[float], noise: float) -> float | int:
    """Combine partition-group outputs into one value of the target's kind.

    Continuous targets sum (or average) the outputs, add noise, and clamp
    to [min, max]. Binary targets clamp the noisy aggregate to [0, 1] and
    threshold at 0.5. Categorical targets either round-and-clamp the noisy
    aggregate to a valid code, or under vote mode take the plurality of the
    rounded outputs with noise ignored and ties resolved to the lowest code.
    """
    if var.aggregation == "vote":
        if var.kind == "continuous":
            raise FunctionalError(
                f"variable {var.name!r}: vote aggregation needs coded outputs"
            )
        n_codes = 2 if var.kind == "binary" else len(var.categories)
        if not outputs:
            return 0
        codes = [
            int(min(max(math.floor(o + 0.5), 0), n_codes - 1)) for o in outputs
        ]
        return _plurality(codes)

    if var.aggregation == "average":
        base = sum(outputs) / len(outputs) if outputs else 0.0
    else:
        base = sum(outputs)
    raw = base + noise

    if var.kind == "continuous":
        return float(min(max(raw, var.min), var.max))
    if var.kind == "binary":
        return 1 if min(max(raw, 0.0), 1.0) >= 0.5 else 0
    top = len(var.categories) - 1
    return int(min(max(math.floor(raw + 0.5), 0), top))


def random_mlp(arity: int, hidden: int, seed: int) -> Mlp:
    """Deterministically initialized MLP: uniform +-1/sqrt(fan_in) per layer."""
    if arity < 1 or hidden < 1:
        raise FunctionalError(f"random_mlp: arity {arity} and hidden {hidden} must be >= 1")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    s1 = 1.0 / math.sqrt(arity)
    s2 = 1.0 / math.sqrt(hidden)
    w1 = rng.uniform(-s1, s1, size=(arity, hidden))
    b1 = rng.uniform(-s1, s1, size=hidden)
    w2 = rng.uniform(-s2, s2, size=hidden)
    b2 = rng.uniform(-s2, s2)
    return Mlp(
        w1=tuple(tuple(float(v) for v in row) for row in w1),
        b1=tuple(float(v) for v in b1),
        w2=tuple(float(v) for v in w2),
        b2=float(b2),
    )
