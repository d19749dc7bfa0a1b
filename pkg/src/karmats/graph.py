"""Lag-indexed causal graph over mixed-type variables.

A graph holds typed variables, lag-annotated directed edges, a partition
of each target's parents into functional groups, a table of named
functionals, and per-variable noise. Graph values are immutable: every
mutation returns a new graph and refuses to produce an invalid one.

Edges carry a lag in time steps. Lag zero means a same-step influence and
the lag-zero subgraph must stay acyclic; lagged self-loops are fine.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .functionals import NAIVE_FUNCTIONALS, FunctionalSpec, NoiseSpec

__all__ = [
    "GraphError",
    "Provenance",
    "VariableSpec",
    "LagEdge",
    "PartitionGroup",
    "Finding",
    "ValidationReport",
    "SummaryGraph",
    "DscpGraph",
]

KINDS = ("continuous", "binary", "categorical")
AGGREGATIONS = ("sum", "average", "vote")
PROVENANCE_KINDS = ("expert", "algorithm", "template")


class GraphError(ValueError):
    """A structural rule was violated while building or editing a graph."""


@dataclass(frozen=True)
class Provenance:
    """Where an edge came from: a person, an algorithm, or a motif template."""

    kind: str = "expert"
    name: str = "user"

    def __post_init__(self) -> None:
        if self.kind not in PROVENANCE_KINDS:
            raise GraphError(f"unknown provenance kind {self.kind!r}")

    @classmethod
    def expert(cls, name: str) -> "Provenance":
        return cls("expert", name)

    @classmethod
    def algorithm(cls, name: str) -> "Provenance":
        return cls("algorithm", name)

    @classmethod
    def template(cls, name: str) -> "Provenance":
        return cls("template", name)


@dataclass(frozen=True)
class VariableSpec:
    """One typed variable.

    Continuous variables clamp to [min, max] and start at ``offset``.
    Binary variables live on {0, 1}. Categorical variables take integer
    codes 0..K-1 in the order of ``categories``. ``aggregation`` selects
    how partition-group outputs combine at this node, and ``latent`` marks
    columns that simulation hides from exported output by default.
    """

    name: str
    kind: str = "continuous"
    id: int | None = None
    categories: tuple[str, ...] = ()
    min: float = 0.0
    max: float = 1.0
    offset: float = 0.0
    memo: str = ""
    aggregation: str = "sum"
    latent: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "categories", tuple(self.categories))
        object.__setattr__(self, "min", float(self.min))
        object.__setattr__(self, "max", float(self.max))
        object.__setattr__(self, "offset", float(self.offset))

    @classmethod
    def continuous(
        cls,
        name: str,
        *,
        min: float = 0.0,
        max: float = 1.0,
        offset: float | None = None,
        **kw,
    ) -> "VariableSpec":
        if offset is None:
            offset = (float(min) + float(max)) / 2.0
        return cls(name=name, kind="continuous", min=min, max=max, offset=offset, **kw)

    @classmethod
    def binary(cls, name: str, **kw) -> "VariableSpec":
        return cls(name=name, kind="binary", min=0.0, max=1.0, **kw)

    @classmethod
    def categorical(cls, name: str, categories: Sequence[str], **kw) -> "VariableSpec":
        cats = tuple(categories)
        return cls(
            name=name,
            kind="categorical",
            categories=cats,
            min=0.0,
            max=float(len(cats) - 1) if cats else 0.0,
            **kw,
        )

    def code_of(self, label: str) -> int:
        try:
            return self.categories.index(label)
        except ValueError:
            raise GraphError(
                f"variable {self.name!r}: unknown category label {label!r}"
            ) from None


@dataclass(frozen=True)
class LagEdge:
    """Directed influence from ``source`` to ``target`` delayed by ``lag`` steps."""

    source: int
    target: int
    lag: int
    functional: str = "identity"
    provenance: Provenance = Provenance()

    def __post_init__(self) -> None:
        if self.lag < 0:
            raise GraphError(f"edge {self.source}->{self.target}: negative lag {self.lag}")

    @property
    def triple(self) -> tuple[int, int, int]:
        return (self.source, self.target, self.lag)


@dataclass(frozen=True)
class PartitionGroup:
    """One block of a target's parent partition, bound to a functional.

    ``parents`` are (source, lag) pairs; their order, (lag, source)
    ascending, is the input order the bound functional sees.
    """

    parents: tuple[tuple[int, int], ...]
    functional: str = "identity"

    def __post_init__(self) -> None:
        ordered = tuple(
            sorted(((int(s), int(l)) for s, l in self.parents), key=lambda p: (p[1], p[0]))
        )
        object.__setattr__(self, "parents", ordered)
        if not ordered:
            raise GraphError("partition group: empty parent set")
        if len(set(ordered)) != len(ordered):
            raise GraphError(f"partition group: duplicate parents {ordered}")


@dataclass(frozen=True)
class Finding:
    """A single validation violation, located well enough to act on."""

    code: str
    where: str
    message: str

    def __str__(self) -> str:
        return f"[{self.code}] {self.where}: {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    findings: tuple[Finding, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.findings

    def __str__(self) -> str:
        if self.ok:
            return "valid"
        return "; ".join(str(f) for f in self.findings)


@dataclass(frozen=True)
class SummaryGraph:
    """Lag-collapsed projection: one edge wherever any lagged edge exists."""

    names: tuple[str, ...]
    edges: tuple[tuple[int, int], ...]

    @property
    def n(self) -> int:
        return len(self.names)

    def parents_of(self, target: int) -> tuple[int, ...]:
        return tuple(sorted(s for s, t in self.edges if t == target))

    def is_cyclic(self) -> bool:
        adj: dict[int, list[int]] = {i: [] for i in range(self.n)}
        for s, t in self.edges:
            adj[s].append(t)
        state = [0] * self.n
        stack: list[tuple[int, int]] = []
        for start in range(self.n):
            if state[start]:
                continue
            stack.append((start, 0))
            state[start] = 1
            while stack:
                node, i = stack[-1]
                if i < len(adj[node]):
                    stack[-1] = (node, i + 1)
                    nxt = adj[node][i]
                    if state[nxt] == 1:
                        return True
                    if state[nxt] == 0:
                        state[nxt] = 1
                        stack.append((nxt, 0))
                else:
                    state[node] = 2
                    stack.pop()
        return False


def _singleton_groups(edges: Iterable[LagEdge], target: int) -> tuple[PartitionGroup, ...]:
    groups = []
    for e in sorted((e for e in edges if e.target == target), key=lambda e: (e.lag, e.source)):
        fn = e.functional if e.functional in NAIVE_FUNCTIONALS else "identity"
        groups.append(PartitionGroup(parents=((e.source, e.lag),), functional=fn))
    return tuple(groups)


@dataclass(frozen=True)
class DscpGraph:
    """Immutable snapshot of a structural causal process over discrete time."""

    variables: tuple[VariableSpec, ...] = ()
    edges: tuple[LagEdge, ...] = ()
    partitions: Mapping[int, tuple[PartitionGroup, ...]] = field(default_factory=dict)
    functionals: Mapping[str, FunctionalSpec] = field(default_factory=dict)
    noise: Mapping[int, NoiseSpec] = field(default_factory=dict)
    extra: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(
            self, "edges", tuple(sorted(self.edges, key=lambda e: e.triple))
        )
        parts = {
            int(t): tuple(sorted(groups, key=lambda g: g.parents))
            for t, groups in dict(self.partitions).items()
            if groups
        }
        object.__setattr__(self, "partitions", dict(sorted(parts.items())))
        object.__setattr__(self, "functionals", dict(sorted(dict(self.functionals).items())))
        noise = {
            int(v): s for v, s in dict(self.noise).items() if s.kind != "none"
        }
        object.__setattr__(self, "noise", dict(sorted(noise.items())))
        object.__setattr__(self, "extra", dict(self.extra))

    # -- queries ---------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.variables)

    @cached_property
    def _by_name(self) -> dict[str, VariableSpec]:
        return {v.name: v for v in self.variables}

    def variable(self, var_id: int) -> VariableSpec:
        if not 0 <= var_id < self.n:
            raise GraphError(f"no variable with id {var_id}")
        return self.variables[var_id]

    def variable_named(self, name: str) -> VariableSpec:
        try:
            return self._by_name[name]
        except KeyError:
            raise GraphError(f"no variable named {name!r}") from None

    def parents_of(self, var_id: int) -> tuple[tuple[int, int], ...]:
        """(source, lag) pairs feeding ``var_id``, ordered by (lag, source)."""
        self.variable(var_id)
        pairs = [(e.source, e.lag) for e in self.edges if e.target == var_id]
        return tuple(sorted(pairs, key=lambda p: (p[1], p[0])))

    def has_edge(self, source: int, target: int, lag: int) -> bool:
        return any(e.triple == (source, target, lag) for e in self.edges)

    def resolve_functional(self, ref: str) -> FunctionalSpec:
        if ref in NAIVE_FUNCTIONALS:
            return NAIVE_FUNCTIONALS[ref]
        try:
            return self.functionals[ref]
        except KeyError:
            raise GraphError(f"unknown functional ref {ref!r}") from None

    @cached_property
    def max_lag(self) -> int:
        return max((e.lag for e in self.edges), default=0)

    @cached_property
    def history_depth(self) -> int:
        """Longest lookback any functional needs: max over groups of lag + window - 1."""
        depth = self.max_lag
        for groups in self.partitions.values():
            for g in groups:
                w = self.resolve_functional(g.functional).window
                if g.parents:
                    depth = max(depth, max(l for _, l in g.parents) + w - 1)
        return depth

    def enr(self) -> float:
        """Edge-to-node ratio |E| / |V| counting every variable, latent included."""
        if self.n == 0:
            raise GraphError("edge-to-node ratio is undefined for an empty graph")
        return len(self.edges) / self.n

    def summary_graph(self) -> SummaryGraph:
        pairs = sorted({(e.source, e.target) for e in self.edges})
        return SummaryGraph(names=tuple(v.name for v in self.variables), edges=tuple(pairs))

    def descendants(self, var_id: int) -> frozenset[int]:
        """Variables reachable from ``var_id`` over any number of edges, any lag."""
        self.variable(var_id)
        adj: dict[int, set[int]] = {}
        for e in self.edges:
            adj.setdefault(e.source, set()).add(e.target)
        seen: set[int] = set()
        frontier = list(adj.get(var_id, ()))
        while frontier:
            node = frontier.pop()
            if node in seen:
                continue
            seen.add(node)
            frontier.extend(adj.get(node, ()))
        return frozenset(seen)

    def topo_order_contemporaneous(self) -> tuple[int, ...]:
        """Evaluation order for one time step.

        Kahn's algorithm over the lag-zero subgraph; ties resolve to the
        lowest variable id so the order is unique and stable.
        """
        indeg = [0] * self.n
        adj: dict[int, list[int]] = {i: [] for i in range(self.n)}
        for e in self.edges:
            if e.lag == 0:
                adj[e.source].append(e.target)
                indeg[e.target] += 1
        ready = [i for i in range(self.n) if indeg[i] == 0]
        heapq.heapify(ready)
        order: list[int] = []
        while ready:
            node = heapq.heappop(ready)
            order.append(node)
            for nxt in adj[node]:
                indeg[nxt] -= 1
                if indeg[nxt] == 0:
                    heapq.heappush(ready, nxt)
        if len(order) != self.n:
            raise GraphError(
                "contemporaneous cycle: " + self._describe_zero_lag_cycle()
            )
        return tuple(order)

    def _describe_zero_lag_cycle(self) -> str:
        adj: dict[int, list[int]] = {i: [] for i in range(self.n)}
        for e in self.edges:
            if e.lag == 0:
                adj[e.source].append(e.target)
        state = [0] * self.n
        parent: dict[int, int] = {}
        for start in range(self.n):
            if state[start]:
                continue
            stack = [(start, iter(adj[start]))]
            state[start] = 1
            while stack:
                node, it = stack[-1]
                nxt = next(it, None)
                if nxt is None:
                    state[node] = 2
                    stack.pop()
                    continue
                if state[nxt] == 1:
                    cycle = [nxt, node]
                    cur = node
                    while cur != nxt:
                        cur = parent[cur]
                        cycle.append(cur)
                    names = [self.variables[i].name for i in reversed(cycle)]
                    return " -> ".join(names)
                if state[nxt] == 0:
                    parent[nxt] = node
                    state[nxt] = 1
                    stack.append((nxt, iter(adj[nxt])))
        return "(cycle not located)"

    # -- validation ------------------------------------------------------

    def validate(self) -> ValidationReport:
        """Check every structural rule; an empty report means the graph is sound."""
        out: list[Finding] = []

        def bad(code: str, where: str, message: str) -> None:
            out.append(Finding(code, where, message))

        names_seen: dict[str, int] = {}
        for i, v in enumerate(self.variables):
            where = f"variables[{i}]"
            if v.id != i:
                bad("dense-ids", where, f"id {v.id} out of order, expected {i}")
            if not v.name:
                bad("empty-name", where, "variable name is empty")
            elif v.name in names_seen:
                bad("duplicate-name", where, f"name {v.name!r} already used by id {names_seen[v.name]}")
            else:
                names_seen[v.name] = i
            if v.kind not in KINDS:
                bad("bad-kind", where, f"unknown kind {v.kind!r}")
                continue
            if v.aggregation not in AGGREGATIONS:
                bad("bad-aggregation", where, f"unknown aggregation {v.aggregation!r}")
            if v.aggregation == "vote" and v.kind == "continuous":
                bad("vote-continuous", where, "vote aggregation needs a coded (binary/categorical) target")
            if v.kind == "continuous":
                if not (math.isfinite(v.min) and math.isfinite(v.max) and math.isfinite(v.offset)):
                    bad("bad-bounds", where, f"non-finite bounds min={v.min} max={v.max} offset={v.offset}")
                elif v.min >= v.max:
                    bad("bad-bounds", where, f"min {v.min} must be below max {v.max}")
                elif not (v.min <= v.offset <= v.max):
                    bad("bad-offset", where, f"offset {v.offset} outside [{v.min}, {v.max}]")
                if v.categories:
                    bad("stray-categories", where, "continuous variable carries categories")
            if v.kind == "binary" and v.categories:
                bad("stray-categories", where, "binary variable carries categories")
            if v.kind == "categorical":
                if len(v.categories) < 2:
                    bad("empty-categories", where, "categorical variable needs at least two categories")
                if len(set(v.categories)) != len(v.categories):
                    bad("duplicate-category", where, f"repeated labels in {v.categories}")
                if not (0 <= v.offset <= max(len(v.categories) - 1, 0)):
                    bad("bad-offset", where, f"offset code {v.offset} outside 0..{len(v.categories) - 1}")

        triples: dict[tuple[int, int, int], int] = {}
        for i, e in enumerate(self.edges):
            where = f"edges[{i}]"
            if not (0 <= e.source < self.n) or not (0 <= e.target < self.n):
                bad("unknown-endpoint", where, f"edge {e.source}->{e.target} references a missing variable")
                continue
            if e.lag == 0 and e.source == e.target:
                bad("self-loop", where, f"{self.variables[e.source].name}: same-step self-loop")
            if e.triple in triples:
                bad("duplicate-edge", where, f"edge {e.triple} repeats edges[{triples[e.triple]}]")
            else:
                triples[e.triple] = i
            try:
                self.resolve_functional(e.functional)
            except GraphError:
                bad("functional-unknown", where, f"functional ref {e.functional!r} not in table")

        try:
            self.topo_order_contemporaneous()
        except GraphError as exc:
            bad("contemporaneous-cycle", "edges", str(exc))

        for fid in self.functionals:
            if not fid or not isinstance(fid, str):
                bad("bad-functional-id", f"functionals[{fid!r}]", "id must be a non-empty string")
            if fid in NAIVE_FUNCTIONALS:
                bad("reserved-functional-id", f"functionals[{fid!r}]", "shadows a built-in")

        for target, groups in self.partitions.items():
            where = f"partitions[{target}]"
            if not (0 <= target < self.n):
                bad("unknown-endpoint", where, "partition for a missing variable")
                continue
            expected = set(self.parents_of(target))
            seen: set[tuple[int, int]] = set()
            for gi, g in enumerate(groups):
                gwhere = f"{where}.groups[{gi}]"
                overlap = seen & set(g.parents)
                if overlap:
                    bad("partition-overlap", gwhere, f"parents {sorted(overlap)} already grouped")
                seen |= set(g.parents)
                stray = set(g.parents) - expected
                if stray:
                    bad("partition-unknown-parent", gwhere, f"no edges for parents {sorted(stray)}")
                try:
                    fn = self.resolve_functional(g.functional)
                except GraphError:
                    bad("functional-unknown", gwhere, f"functional ref {g.functional!r} not in table")
                    continue
                if fn.arity is not None and fn.arity != len(g.parents):
                    bad(
                        "arity-mismatch",
                        gwhere,
                        f"group of {len(g.parents)} parent(s) bound to {g.functional!r} of arity {fn.arity}",
                    )
            missing = expected - seen
            if missing:
                bad("partition-incomplete", where, f"parents {sorted(missing)} not covered")
        for target in range(self.n):
            if self.parents_of(target) and target not in self.partitions:
                bad("partition-incomplete", f"partitions[{target}]", "target has parents but no partition")

        for var_id in self.noise:
            if not (0 <= var_id < self.n):
                bad("unknown-endpoint", f"noise[{var_id}]", "noise for a missing variable")

        return ValidationReport(findings=tuple(out))

    def _checked(self) -> "DscpGraph":
        report = self.validate()
        if not report.ok:
            raise GraphError(str(report))
        return self

    # -- edits (each returns a new, validated graph) ----------------------

    @classmethod
    def empty(cls) -> "DscpGraph":
        return cls()

    def add_variable(self, spec: VariableSpec) -> "DscpGraph":
        next_id = self.n
        if spec.id is not None and spec.id != next_id:
            raise GraphError(f"variable {spec.name!r}: explicit id {spec.id}, next dense id is {next_id}")
        if spec.name in self._by_name:
            raise GraphError(f"variable name {spec.name!r} already in use")
        placed = replace(spec, id=next_id)
        return replace(self, variables=self.variables + (placed,))._checked()

    def update_variable(self, var_id: int, **changes) -> "DscpGraph":
        old = self.variable(var_id)
        if "id" in changes and changes["id"] != var_id:
            raise GraphError(f"variable ids are stable; cannot move id {var_id}")
        changes.pop("id", None)
        try:
            new = replace(old, **changes)
        except TypeError as exc:
            raise GraphError(f"update_variable: {exc}") from exc
        variables = list(self.variables)
        variables[var_id] = new
        return replace(self, variables=tuple(variables))._checked()

    def remove_variable(self, var_id: int) -> "DscpGraph":
        """Drop a variable; incident edges go with it and later ids shift down.

        Targets that lose a parent get their partition rebuilt as singleton
        identity groups, which is always recoverable by a later set_partition.
        """
        self.variable(var_id)
        remap = {i: (i if i < var_id else i - 1) for i in range(self.n) if i != var_id}
        variables = tuple(
            replace(v, id=remap[v.id]) for v in self.variables if v.id != var_id
        )
        kept_edges = []
        touched: set[int] = set()
        for e in self.edges:
            if e.source == var_id or e.target == var_id:
                if e.target != var_id:
                    touched.add(remap[e.target])
                continue
            kept_edges.append(replace(e, source=remap[e.source], target=remap[e.target]))
        partitions: dict[int, tuple[PartitionGroup, ...]] = {}
        for t, groups in self.partitions.items():
            if t == var_id:
                continue
            nt = remap[t]
            if nt in touched:
                continue
            partitions[nt] = tuple(
                PartitionGroup(
                    parents=tuple((remap[s], l) for s, l in g.parents),
                    functional=g.functional,
                )
                for g in groups
            )
        for t in touched:
            groups = _singleton_groups(kept_edges, t)
            if groups:
                partitions[t] = groups
        noise = {remap[v]: s for v, s in self.noise.items() if v != var_id}
        return replace(
            self,
            variables=variables,
            edges=tuple(kept_edges),
            partitions=partitions,
            noise=noise,
        )._checked()

    def add_edge(
        self,
        source: int,
        target: int,
        lag: int,
        functional: str = "identity",
        provenance: Provenance = Provenance(),
    ) -> "DscpGraph":
        """Append one lagged edge and give it its own partition group.

        The referenced functional must take a single parent, since the new
        edge starts out as a singleton group; bind wider functionals with
        ``set_partition`` afterwards.
        """
        self.variable(source)
        self.variable(target)
        if lag < 0:
            raise GraphError(f"edge {source}->{target}: negative lag {lag}")
        if lag == 0 and source == target:
            raise GraphError(
                f"variable {self.variables[source].name!r}: a self-loop needs lag >= 1"
            )
        if self.has_edge(source, target, lag):
            raise GraphError(f"edge ({source}->{target}, lag {lag}) already present")
        fn = self.resolve_functional(functional)
        if fn.arity not in (None, 1):
            raise GraphError(
                f"functional {functional!r} has arity {fn.arity}; a new edge forms a singleton group"
            )
        edge = LagEdge(source=source, target=target, lag=lag, functional=functional, provenance=provenance)
        partitions = dict(self.partitions)
        partitions[target] = partitions.get(target, ()) + (
            PartitionGroup(parents=((source, lag),), functional=functional),
        )
        return replace(self, edges=self.edges + (edge,), partitions=partitions)._checked()

    def update_edge(
        self,
        source: int,
        target: int,
        lag: int,
        functional: str | None = None,
        provenance: Provenance | None = None,
    ) -> "DscpGraph":
        """Rebind an existing edge's functional or provenance in place.

        A functional change also retargets the edge's singleton group when
        it has one; grouped edges keep their group binding.
        """
        edges = list(self.edges)
        for i, e in enumerate(edges):
            if e.triple == (source, target, lag):
                new_fn = functional if functional is not None else e.functional
                fn = self.resolve_functional(new_fn)
                edges[i] = replace(
                    e,
                    functional=new_fn,
                    provenance=provenance if provenance is not None else e.provenance,
                )
                partitions = dict(self.partitions)
                if functional is not None and fn.arity in (None, 1):
                    groups = list(partitions.get(target, ()))
                    for gi, g in enumerate(groups):
                        if g.parents == ((source, lag),):
                            groups[gi] = PartitionGroup(parents=g.parents, functional=new_fn)
                    partitions[target] = tuple(groups)
                return replace(self, edges=tuple(edges), partitions=partitions)._checked()
        raise GraphError(f"no edge ({source}->{target}, lag {lag})")

    def remove_edge(self, source: int, target: int, lag: int) -> "DscpGraph":
        """Delete one edge; its partition group shrinks with it.

        If the edge sat in a multi-parent group, the survivors fall back to
        singleton identity groups because the bound functional's arity no
        longer fits.
        """
        if not self.has_edge(source, target, lag):
            raise GraphError(f"no edge ({source}->{target}, lag {lag})")
        edges = tuple(e for e in self.edges if e.triple != (source, target, lag))
        partitions = dict(self.partitions)
        groups = []
        for g in partitions.get(target, ()):
            if (source, lag) not in g.parents:
                groups.append(g)
                continue
            rest = tuple(p for p in g.parents if p != (source, lag))
            for p in rest:
                groups.append(PartitionGroup(parents=(p,), functional="identity"))
        if groups:
            partitions[target] = tuple(groups)
        else:
            partitions.pop(target, None)
        return replace(self, edges=edges, partitions=partitions)._checked()

    def set_partition(
        self, target: int, groups: Sequence[PartitionGroup | tuple]
    ) -> "DscpGraph":
        """Replace the parent partition of ``target``.

        Groups must be disjoint, cover the parent set exactly, and each
        bound functional's arity must equal its group size.
        """
        self.variable(target)
        normalized = tuple(
            g if isinstance(g, PartitionGroup) else PartitionGroup(parents=tuple(g[0]), functional=g[1])
            for g in groups
        )
        partitions = dict(self.partitions)
        if normalized:
            partitions[target] = normalized
        else:
            partitions.pop(target, None)
        return replace(self, partitions=partitions)._checked()

    def reset_partition(self, target: int) -> "DscpGraph":
        """Return ``target`` to one identity group per incoming edge."""
        self.variable(target)
        partitions = dict(self.partitions)
        groups = _singleton_groups(self.edges, target)
        if groups:
            partitions[target] = groups
        else:
            partitions.pop(target, None)
        return replace(self, partitions=partitions)._checked()

    def set_functional(self, fid: str, spec: FunctionalSpec) -> "DscpGraph":
        if not fid:
            raise GraphError("functional id must be a non-empty string")
        if fid in NAIVE_FUNCTIONALS:
            raise GraphError(f"functional id {fid!r} is reserved")
        functionals = dict(self.functionals)
        functionals[fid] = spec
        return replace(self, functionals=functionals)._checked()

    def remove_functional(self, fid: str) -> "DscpGraph":
        if fid not in self.functionals:
            raise GraphError(f"no functional {fid!r} in table")
        users = [e.triple for e in self.edges if e.functional == fid]
        users += [
            (t, gi)
            for t, groups in self.partitions.items()
            for gi, g in enumerate(groups)
            if g.functional == fid
        ]
        if users:
            raise GraphError(f"functional {fid!r} still referenced by {users}")
        functionals = dict(self.functionals)
        del functionals[fid]
        return replace(self, functionals=functionals)._checked()

    def set_noise(self, var_id: int, spec: NoiseSpec) -> "DscpGraph":
        self.variable(var_id)
        noise = dict(self.noise)
        if spec.kind == "none":
            noise.pop(var_id, None)
        else:
            noise[var_id] = spec
        return replace(self, noise=noise)._checked()

    def noise_of(self, var_id: int) -> NoiseSpec:
        return self.noise.get(var_id, NoiseSpec.none())
