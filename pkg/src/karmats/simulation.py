"""Discrete-time simulation of a lag-indexed causal graph.

Each step evaluates variables in contemporaneous topological order: gather
parent windows from the history buffer, run each partition group's
functional, aggregate with the node's noise draw, clamp to the variable's
domain. Noise comes from per-variable substreams derived from
(seed, variable id), so edits to one variable never perturb another's
stream, and the final generator states ride along in the frame metadata so
a resumed run continues the exact same streams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence, Union

import numpy as np

from .functionals import NoiseSpec, aggregate_node, sample_noise
from .graph import DscpGraph, GraphError, VariableSpec

__all__ = [
    "SimulationError",
    "DoClamp",
    "ShiftNoise",
    "InterventionSpec",
    "SimulationConfig",
    "RunMeta",
    "SeriesFrame",
    "simulate",
    "resume",
    "concat_frames",
]


class SimulationError(ValueError):
    """Raised when a run is configured badly or produces non-finite values."""


@dataclass(frozen=True)
class DoClamp:
    """Hold a variable at a fixed value over output steps [t_start, t_end].

    While the clamp is active the variable's functionals are never
    evaluated and its noise stream is not consumed: parent influence is
    severed, not overwritten.
    """

    variable: str
    value: float | int | str
    t_start: int
    t_end: int
    kind = "do_clamp"


@dataclass(frozen=True)
class ShiftNoise:
    """Swap a variable's noise spec over output steps [t_start, t_end]."""

    variable: str
    noise: NoiseSpec
    t_start: int
    t_end: int
    kind = "shift_noise"


InterventionSpec = Union[DoClamp, ShiftNoise]


@dataclass(frozen=True)
class SimulationConfig:
    """How to run: length, seed, warm-up, initialization, interventions.

    ``burn_in=None`` resolves to twice the graph's max lag when starting
    from offsets and to zero when starting from a real segment or resuming.
    """

    length: int
    seed: int = 0
    burn_in: int | None = None
    init: str = "offsets"
    segment: "SeriesFrame | None" = None
    interventions: tuple[InterventionSpec, ...] = ()
    record_latent: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "interventions", tuple(self.interventions))
        if self.length < 1:
            raise SimulationError(f"length must be >= 1, got {self.length}")
        if self.burn_in is not None and self.burn_in < 0:
            raise SimulationError(f"burn_in must be >= 0, got {self.burn_in}")
        if self.init not in ("offsets", "segment"):
            raise SimulationError(f"init must be 'offsets' or 'segment', got {self.init!r}")
        if self.init == "segment" and self.segment is None:
            raise SimulationError("init='segment' needs a segment frame")


@dataclass(frozen=True)
class RunMeta:
    """Everything needed to audit or continue a finished run."""

    seed: int
    graph_hash: str
    burn_in: int
    length: int
    init: str
    interventions: tuple[InterventionSpec, ...] = ()
    record_latent: bool = False
    rng_state: Mapping[str, dict] = field(default_factory=dict)


@dataclass(frozen=True)
class SeriesFrame:
    """Simulated (or imported) series: one typed column per variable.

    Columns are keyed by variable name; ``variables`` fixes the column
    order and carries kinds and category code lists.
    """

    variables: tuple[VariableSpec, ...]
    columns: Mapping[str, np.ndarray]
    meta: RunMeta | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "variables", tuple(self.variables))
        cols = {}
        length = None
        for v in self.variables:
            if v.name not in self.columns:
                raise SimulationError(f"frame is missing column {v.name!r}")
            arr = np.asarray(self.columns[v.name])
            if length is None:
                length = arr.shape[0]
            elif arr.shape[0] != length:
                raise SimulationError(
                    f"column {v.name!r} has {arr.shape[0]} rows, expected {length}"
                )
            cols[v.name] = arr
        object.__setattr__(self, "columns", cols)

    @property
    def length(self) -> int:
        if not self.variables:
            return 0
        return int(next(iter(self.columns.values())).shape[0])

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    def column(self, name: str) -> np.ndarray:
        try:
            return self.columns[name]
        except KeyError:
            raise SimulationError(f"no column named {name!r}") from None

    def variable_named(self, name: str) -> VariableSpec:
        for v in self.variables:
            if v.name == name:
                return v
        raise SimulationError(f"no column named {name!r}")


def _variable_rng(seed: int, var_id: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(var_id)]))


def _resolve_clamp_value(var: VariableSpec, value: float | int | str) -> float:
    if isinstance(value, str):
        if var.kind != "categorical":
            raise SimulationError(
                f"clamp of {var.name!r}: label {value!r} on a {var.kind} variable"
            )
        return float(var.code_of(value))
    v = float(value)
    if var.kind == "continuous":
        if not (var.min <= v <= var.max):
            raise SimulationError(
                f"clamp of {var.name!r}: {v} outside [{var.min}, {var.max}]"
            )
    elif var.kind == "binary":
        if v not in (0.0, 1.0):
            raise SimulationError(f"clamp of {var.name!r}: {v} is not 0 or 1")
    else:
        if v != int(v) or not (0 <= int(v) < len(var.categories)):
            raise SimulationError(
                f"clamp of {var.name!r}: {v} is not a code in 0..{len(var.categories) - 1}"
            )
    return v


def _check_interventions(graph: DscpGraph, config: SimulationConfig) -> None:
    for iv in config.interventions:
        var = graph.variable_named(iv.variable)
        if not (0 <= iv.t_start <= iv.t_end < config.length):
            raise SimulationError(
                f"intervention on {var.name!r}: window [{iv.t_start}, {iv.t_end}] "
                f"outside 0..{config.length - 1}"
            )
        if isinstance(iv, DoClamp):
            _resolve_clamp_value(var, iv.value)


def _initial_history(
    graph: DscpGraph, depth: int, config: SimulationConfig
) -> np.ndarray:
    buf = np.zeros((graph.n, depth))
    if depth == 0:
        return buf
    if config.init == "offsets":
        for v in graph.variables:
            if v.kind == "continuous":
                buf[v.id, :] = v.offset
            else:
                buf[v.id, :] = float(int(v.offset))
        return buf
    seg = config.segment
    if seg.length < depth:
        raise SimulationError(
            f"init segment has {seg.length} rows; graph needs {depth}"
        )
    for v in graph.variables:
        try:
            col = seg.column(v.name)
        except SimulationError:
            raise SimulationError(
                f"init segment is missing column {v.name!r}; "
                "latent columns require a frame recorded with record_latent"
            ) from None
        sv = seg.variable_named(v.name)
        if sv.kind != v.kind:
            raise SimulationError(
                f"init segment column {v.name!r} is {sv.kind}, graph says {v.kind}"
            )
        if v.kind == "categorical" and tuple(sv.categories) != tuple(v.categories):
            raise SimulationError(f"init segment column {v.name!r}: category lists differ")
        buf[v.id, :] = np.asarray(col[-depth:], dtype=float)
    return buf


def _run(
    graph: DscpGraph,
    config: SimulationConfig,
    burn_in: int,
    rngs: dict[int, np.random.Generator],
) -> SeriesFrame:
    report = graph.validate()
    if not report.ok:
        raise SimulationError(f"graph is not valid: {report}")
    _check_interventions(graph, config)

    order = graph.topo_order_contemporaneous()
    depth = graph.history_depth
    steps = burn_in + config.length
    buf = np.empty((graph.n, depth + steps))
    buf[:, :depth] = _initial_history(graph, depth, config)

    plans = []
    for j in range(graph.n):
        var = graph.variables[j]
        groups = []
        for g in graph.partitions.get(j, ()):
            fn = graph.resolve_functional(g.functional)
            groups.append((fn, g.parents, fn.window))
        clamps = [
            (iv.t_start, iv.t_end, _resolve_clamp_value(var, iv.value))
            for iv in config.interventions
            if isinstance(iv, DoClamp) and iv.variable == var.name
        ]
        shifts = [
            (iv.t_start, iv.t_end, iv.noise)
            for iv in config.interventions
            if isinstance(iv, ShiftNoise) and iv.variable == var.name
        ]
        plans.append((var, groups, clamps, shifts, graph.noise_of(j)))

    for s in range(steps):
        t_out = s - burn_in
        col = depth + s
        for j in order:
            var, groups, clamps, shifts, base_noise = plans[j]
            clamped = False
            if t_out >= 0:
                for t0, t1, value in clamps:
                    if t0 <= t_out <= t1:
                        buf[j, col] = value
                        clamped = True
                        break
            if clamped:
                continue
            spec = base_noise
            if t_out >= 0:
                for t0, t1, shifted in shifts:
                    if t0 <= t_out <= t1:
                        spec = shifted
                        break
            eps = sample_noise(spec, rngs[j])
            outs = []
            for fn, parents, window in groups:
                inputs = [
                    buf[src, col - lag - window + 1 : col - lag + 1][::-1]
                    for src, lag in parents
                ]
                outs.append(fn.evaluate(inputs))
            value = aggregate_node(var, outs, eps)
            if isinstance(value, float) and math.isnan(value):
                raise SimulationError(
                    f"variable {var.name!r} became NaN at output step {t_out}"
                )
            buf[j, col] = value

    exported = tuple(
        v for v in graph.variables if config.record_latent or not v.latent
    )
    columns: dict[str, np.ndarray] = {}
    for v in exported:
        out = buf[v.id, depth + burn_in :]
        if v.kind == "continuous":
            columns[v.name] = out.copy()
        else:
            columns[v.name] = out.astype(np.int64)

    from . import formats

    meta = RunMeta(
        seed=config.seed,
        graph_hash=formats.graph_hash(graph),
        burn_in=burn_in,
        length=config.length,
        init=config.init,
        interventions=config.interventions,
        record_latent=config.record_latent,
        rng_state={
            graph.variables[j].name: rngs[j].bit_generator.state for j in range(graph.n)
        },
    )
    return SeriesFrame(variables=exported, columns=columns, meta=meta)


def simulate(graph: DscpGraph, config: SimulationConfig) -> SeriesFrame:
    """Run the process and return the recorded output steps.

    Burn-in steps run before recording starts (and before any intervention
    window applies); with offset initialization they default to twice the
    graph's max lag so early output does not sit on the initial values.
    """
    if config.burn_in is not None:
        burn_in = config.burn_in
    elif config.init == "offsets":
        burn_in = 2 * graph.max_lag
    else:
        burn_in = 0
    rngs = {j: _variable_rng(config.seed, j) for j in range(graph.n)}
    return _run(graph, config, burn_in, rngs)


def resume(frame: SeriesFrame, graph: DscpGraph, config: SimulationConfig) -> SeriesFrame:
    """Continue a finished run for ``config.length`` more steps.

    The frame's trailing rows seed the history and, where the frame's
    metadata carries generator states, each variable's noise stream picks
    up exactly where it stopped: concatenating the two frames equals one
    longer run. Variables added to the graph since the original run get
    fresh substreams; the continuation then simply diverges.
    """
    for v in graph.variables:
        try:
            frame.variable_named(v.name)
        except SimulationError:
            raise SimulationError(
                f"resume: frame has no column for {v.name!r}; latent variables "
                "need a frame recorded with record_latent"
            ) from None
    cfg = replace(config, init="segment", segment=frame)
    burn_in = cfg.burn_in if cfg.burn_in is not None else 0
    rngs = {}
    saved = frame.meta.rng_state if frame.meta is not None else {}
    for j in range(graph.n):
        name = graph.variables[j].name
        gen = _variable_rng(cfg.seed, j)
        if name in saved:
            gen.bit_generator.state = saved[name]
        rngs[j] = gen
    return _run(graph, cfg, burn_in, rngs)


def concat_frames(first: SeriesFrame, second: SeriesFrame) -> SeriesFrame:
    """Stack two frames over the same variables along time."""
    if first.names != second.names:
        raise SimulationError(
            f"frames disagree on columns: {first.names} vs {second.names}"
        )
    columns = {
        name: np.concatenate([first.columns[name], second.columns[name]])
        for name in first.names
    }
    return SeriesFrame(variables=first.variables, columns=columns, meta=second.meta)
