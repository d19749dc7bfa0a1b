"""Benchmark suite generation: motif graphs, densification, replicates.

Suites are fully reproducible: the suite seed fixes every replicate's
structure, functional weights, and simulation streams, and the manifest
records file hashes so a rebuild can be checked byte for byte.

Generated graphs are lagged-only (every edge has lag >= 1, so the
contemporaneous subgraph is empty) with random MLP functionals, one per
target over its whole parent set, and gaussian noise on every variable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import formats
from .functionals import NoiseSpec, random_mlp
from .graph import DscpGraph, PartitionGroup, Provenance, VariableSpec
from .simulation import SimulationConfig, simulate

__all__ = [
    "BenchError",
    "LAG_BOUNDS",
    "ENR_BOUNDS",
    "gen_motif",
    "densify",
    "mark_latent",
    "gen_benchmark_graph",
    "SuiteConfig",
    "build_suite",
    "regime_findings",
    "suite_config_from_obj",
    "suite_config_to_obj",
]

STRUCTURES = ("star", "tree", "cycle")

# max edge lag per regime
LAG_BOUNDS = {"small": 5, "large": 10}

# edge-to-node ratio per regime: sparse caps at 2, dense sits strictly
# between 2 and 4; the sparse floor is whatever the motif skeleton has.
ENR_BOUNDS = {"sparse": (None, 2.0), "dense": (2.0, 4.0)}


class BenchError(ValueError):
    """Raised when a requested suite cannot satisfy its regime."""


def _upper_half_floor(bound: int) -> int:
    return bound // 2 + 1


def gen_motif(
    structure: str, n: int, rng: np.random.Generator, star_inward: bool = True
) -> DscpGraph:
    """Build one motif skeleton over n continuous variables, all edges lag 1.

    star: leaves feed the hub (reverse with ``star_inward=False``);
    tree: uniform-attachment rooted tree, edges pointing away from the root;
    cycle: directed ring, which keeps a cycle in the lag-collapsed summary.
    """
    if structure not in STRUCTURES:
        raise BenchError(f"unknown structure {structure!r}; pick one of {STRUCTURES}")
    if n < 1:
        raise BenchError(f"motif needs n >= 1, got {n}")
    graph = DscpGraph.empty()
    for i in range(n):
        graph = graph.add_variable(
            VariableSpec.continuous(f"X{i}", min=-10.0, max=10.0, offset=0.0)
        )
    prov = Provenance.template(structure)
    if structure == "star":
        for leaf in range(1, n):
            s, t = (leaf, 0) if star_inward else (0, leaf)
            graph = graph.add_edge(s, t, lag=1, provenance=prov)
    elif structure == "tree":
        for child in range(1, n):
            parent = int(rng.integers(0, child))
            graph = graph.add_edge(parent, child, lag=1, provenance=prov)
    else:
        if n == 1:
            graph = graph.add_edge(0, 0, lag=1, provenance=prov)
        else:
            for i in range(n):
                graph = graph.add_edge(i, (i + 1) % n, lag=1, provenance=prov)
    return graph


def _edge_count_range(n: int, skeleton_edges: int, enr_regime: str) -> tuple[int, int]:
    if enr_regime not in ENR_BOUNDS:
        raise BenchError(f"unknown ENR regime {enr_regime!r}; pick one of {tuple(ENR_BOUNDS)}")
    if enr_regime == "sparse":
        lo = skeleton_edges + 1
        hi = math.floor(2.0 * n)
    else:
        lo = math.floor(2.0 * n) + 1
        hi = math.ceil(4.0 * n) - 1
    if lo > hi:
        raise BenchError(
            f"{enr_regime} regime infeasible for n={n} with {skeleton_edges} skeleton edges"
        )
    return lo, hi


def densify(
    skeleton: DscpGraph, enr_regime: str, lag_regime: str, rng: np.random.Generator
) -> DscpGraph:
    """Add uniform random lagged edges until the ENR lands in the regime.

    Edges are (source, target, lag) triples drawn uniformly with lag in
    [1, bound]; duplicates are rejected, lagged self-loops are welcome.
    At least one edge always ends up with a lag in the upper half of the
    bound so the two lag regimes stay distinguishable.
    """
    if lag_regime not in LAG_BOUNDS:
        raise BenchError(f"unknown lag regime {lag_regime!r}; pick one of {tuple(LAG_BOUNDS)}")
    bound = LAG_BOUNDS[lag_regime]
    n = skeleton.n
    lo, hi = _edge_count_range(n, len(skeleton.edges), enr_regime)
    target_edges = int(rng.integers(lo, hi + 1))

    triples = {e.triple for e in skeleton.edges}
    added: list[tuple[int, int, int]] = []
    guard = 0
    while len(triples) < target_edges:
        guard += 1
        if guard > 100_000:
            raise BenchError(
                f"could not reach {target_edges} edges on {n} variables (lag bound {bound})"
            )
        s = int(rng.integers(0, n))
        t = int(rng.integers(0, n))
        lag = int(rng.integers(1, bound + 1))
        if (s, t, lag) in triples:
            continue
        triples.add((s, t, lag))
        added.append((s, t, lag))

    upper = _upper_half_floor(bound)
    if max(lag for _, _, lag in triples) < upper:
        # Re-lag one added edge into the upper half; motif edges stay lag 1.
        order = list(rng.permutation(len(added)))
        done = False
        for idx in order:
            s, t, lag = added[idx]
            lags = [int(l) for l in rng.permutation(np.arange(upper, bound + 1))]
            for new_lag in lags:
                if (s, t, new_lag) not in triples:
                    triples.discard((s, t, lag))
                    triples.add((s, t, new_lag))
                    added[idx] = (s, t, new_lag)
                    done = True
                    break
            if done:
                break
        if not done:
            raise BenchError("no room to place an upper-half lag; widen the regime")

    graph = skeleton
    prov = Provenance.template("densify")
    for s, t, lag in added:
        graph = graph.add_edge(s, t, lag=lag, provenance=prov)
    return graph


def mark_latent(graph: DscpGraph, fraction: float, rng: np.random.Generator) -> DscpGraph:
    """Flag round(fraction * n) uniformly chosen variables as latent."""
    if not 0.0 <= fraction < 1.0:
        raise BenchError(f"latent fraction must be in [0, 1), got {fraction}")
    k = int(math.floor(fraction * graph.n + 0.5))
    if k == 0:
        return graph
    chosen = rng.choice(graph.n, size=k, replace=False)
    for var_id in sorted(int(c) for c in chosen):
        graph = graph.update_variable(var_id, latent=True)
    return graph


def gen_benchmark_graph(
    structure: str,
    n: int,
    lag_regime: str,
    enr_regime: str,
    rng: np.random.Generator,
    latent_fraction: float = 0.0,
    hidden: int = 8,
    noise_std: float = 0.1,
) -> DscpGraph:
    """Motif -> densify -> latent marking -> random MLPs -> gaussian noise.

    Every target with parents gets one MLP over its full parent set, so
    the parent partition has a single group per node. ``noise_std=0``
    yields a noiseless deterministic system, handy for intervention tests.
    """
    graph = gen_motif(structure, n, rng)
    graph = densify(graph, enr_regime, lag_regime, rng)
    graph = mark_latent(graph, latent_fraction, rng)
    for target in range(graph.n):
        parents = graph.parents_of(target)
        if not parents:
            continue
        fid = f"mlp{target}"
        mlp = random_mlp(arity=len(parents), hidden=hidden, seed=int(rng.integers(0, 2**63)))
        graph = graph.set_functional(fid, mlp)
        graph = graph.set_partition(target, [PartitionGroup(parents=parents, functional=fid)])
    if noise_std > 0:
        for var_id in range(graph.n):
            graph = graph.set_noise(var_id, NoiseSpec.gaussian(0.0, noise_std))
    return graph


@dataclass(frozen=True)
class SuiteConfig:
    """One benchmark suite: a structure/regime cell with replicates."""

    name: str = "suite"
    structure: str = "star"
    n: int = 5
    lag_regime: str = "small"
    enr_regime: str = "sparse"
    latent_fraction: float = 0.0
    replicates: int = 3
    lengths: tuple[int, ...] = (200, 600, 1000)
    seed: int = 0
    hidden: int = 8
    noise_std: float = 0.1

    def __post_init__(self) -> None:
        object.__setattr__(self, "lengths", tuple(int(l) for l in self.lengths))
        if self.n < 2:
            raise BenchError(f"suite needs n >= 2, got {self.n}")
        if self.replicates < 1:
            raise BenchError(f"replicates must be >= 1, got {self.replicates}")
        if not self.lengths:
            raise BenchError("lengths must not be empty")
        if not 0.0 <= self.latent_fraction <= 0.8:
            raise BenchError(
                f"latent fraction must be in [0, 0.8], got {self.latent_fraction}"
            )
        if self.noise_std < 0:
            raise BenchError(f"noise std must be >= 0, got {self.noise_std}")
        if self.hidden < 1:
            raise BenchError(f"hidden width must be >= 1, got {self.hidden}")


def suite_config_to_obj(config: SuiteConfig) -> dict:
    return {
        "name": config.name,
        "structure": config.structure,
        "n": config.n,
        "lag_regime": config.lag_regime,
        "enr_regime": config.enr_regime,
        "latent_fraction": config.latent_fraction,
        "replicates": config.replicates,
        "lengths": list(config.lengths),
        "seed": config.seed,
        "hidden": config.hidden,
        "noise_std": config.noise_std,
    }


def suite_config_from_obj(obj: dict) -> SuiteConfig:
    known = {f for f in SuiteConfig.__dataclass_fields__}
    stray = set(obj) - known
    if stray:
        raise BenchError(f"suite config: unknown field(s) {sorted(stray)}")
    kwargs = dict(obj)
    if "lengths" in kwargs:
        kwargs["lengths"] = tuple(kwargs["lengths"])
    return SuiteConfig(**kwargs)


def regime_findings(graph: DscpGraph, lag_regime: str, enr_regime: str) -> list[str]:
    """Empty list when the graph sits inside its declared regimes."""
    problems = []
    bound = LAG_BOUNDS[lag_regime]
    lags = [e.lag for e in graph.edges]
    if not lags:
        return ["graph has no edges"]
    if min(lags) < 1:
        problems.append(f"contemporaneous edge present (lag {min(lags)})")
    if max(lags) > bound:
        problems.append(f"max lag {max(lags)} above {lag_regime} bound {bound}")
    if max(lags) < _upper_half_floor(bound):
        problems.append(
            f"no edge lag in upper half [{_upper_half_floor(bound)}, {bound}]"
        )
    enr = graph.enr()
    lo, hi = ENR_BOUNDS[enr_regime]
    if enr_regime == "sparse":
        if enr > hi:
            problems.append(f"ENR {enr:.3f} above sparse cap {hi}")
    else:
        if not (lo < enr < hi):
            problems.append(f"ENR {enr:.3f} outside dense range ({lo}, {hi})")
    return problems


def build_suite(config: SuiteConfig, out_dir: str | Path) -> dict:
    """Generate every replicate, simulate every length, write the manifest.

    Layout under ``out_dir``: rep<r>.truth.dscp.json for each replicate
    and rep<r>.len<T>.series.csv/.series.meta.json for each length, plus
    manifest.json carrying the config, engine defaults, and sha256 of
    every file. Identical configs rebuild byte-identical trees.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    replicates = []
    for r in range(config.replicates):
        rng = np.random.default_rng(np.random.SeedSequence([config.seed, r]))
        graph = gen_benchmark_graph(
            structure=config.structure,
            n=config.n,
            lag_regime=config.lag_regime,
            enr_regime=config.enr_regime,
            rng=rng,
            latent_fraction=config.latent_fraction,
            hidden=config.hidden,
            noise_std=config.noise_std,
        )
        problems = regime_findings(graph, config.lag_regime, config.enr_regime)
        if problems:
            raise BenchError(f"replicate {r} violates its regime: {problems}")
        graph_path = out / f"rep{r}.truth.dscp.json"
        graph_bytes = formats.save_graph(graph, graph_path)
        entry = {
            "index": r,
            "graph": {"path": graph_path.name, "sha256": formats.sha256_hex(graph_bytes)},
            "series": [],
        }
        sim_seeds = [int(s) for s in rng.integers(0, 2**63, size=len(config.lengths))]
        for length, sim_seed in zip(config.lengths, sim_seeds):
            frame = simulate(graph, SimulationConfig(length=length, seed=sim_seed))
            base = out / f"rep{r}.len{length}"
            csv_path, meta_path = formats.save_series(frame, base)
            entry["series"].append(
                {
                    "length": length,
                    "seed": sim_seed,
                    "csv": {
                        "path": csv_path.name,
                        "sha256": formats.sha256_hex(csv_path.read_bytes()),
                    },
                    "meta": {
                        "path": meta_path.name,
                        "sha256": formats.sha256_hex(meta_path.read_bytes()),
                    },
                }
            )
        replicates.append(entry)
    manifest = {
        "suite": suite_config_to_obj(config),
        "engine_defaults": {"hidden": config.hidden, "noise_std": config.noise_std},
        "lag_bound": LAG_BOUNDS[config.lag_regime],
        "replicates": replicates,
    }
    (out / "manifest.json").write_bytes(formats.canonical_json_bytes(manifest))
    return manifest
