"""Partition quality metrics.

All four scores work from integer tallies (edge counts, degree sums,
cluster sizes) and combine them with exactly-rounded summation, so cluster
relabeling and node renaming cannot shift the result even at the last bit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

from .facts import AppFacts, HeteroGraph


class MetricsError(ValueError):
    pass


@dataclass(frozen=True)
class Partition:
    """Total map node id -> cluster index in [0, K)."""

    assignment: dict[str, int]
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise MetricsError(f"cluster count must be positive, got {self.k}")
        for nid, label in self.assignment.items():
            if not (0 <= label < self.k):
                raise MetricsError(f"node {nid!r} has cluster {label}, outside [0, {self.k})")

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, int], k: int | None = None) -> "Partition":
        mapping = dict(mapping)
        if k is None:
            if not mapping:
                raise MetricsError("empty partition needs an explicit cluster count")
            k = max(mapping.values()) + 1
        return cls(mapping, k)

    def sizes(self) -> list[int]:
        out = [0] * self.k
        for label in self.assignment.values():
            out[label] += 1
        return out

    def members(self) -> list[set[str]]:
        out: list[set[str]] = [set() for _ in range(self.k)]
        for nid, label in self.assignment.items():
            out[label].add(nid)
        return out

    def restricted_to(self, ids) -> "Partition":
        keep = set(ids)
        return Partition({nid: c for nid, c in self.assignment.items() if nid in keep},
                         self.k)


def _require_cover(graph: HeteroGraph, p: Partition):
    missing = [nid for nid in graph.ids if nid not in p.assignment]
    if missing:
        raise MetricsError(f"partition does not cover node {missing[0]!r}")


def modularity(graph: HeteroGraph, p: Partition) -> float:
    """Intra-cluster edge fraction minus its degree-based expectation."""
    m = len(graph.edges)
    if m == 0:
        raise MetricsError("modularity is undefined on an edgeless graph")
    _require_cover(graph, p)
    intra = [0] * p.k
    for e in graph.edges:
        cu, cv = p.assignment[e.u], p.assignment[e.v]
        if cu == cv:
            intra[cu] += 1
    degree_sum = [0] * p.k
    for nid in graph.ids:
        degree_sum[p.assignment[nid]] += int(graph.degree[graph.index[nid]])
    return math.fsum(intra[c] / m - (degree_sum[c] / (2 * m)) ** 2 for c in range(p.k))


def structural_modularity(graph: HeteroGraph, p: Partition,
                          diagnostics: list[str] | None = None) -> float:
    """Mean scaled cohesion minus mean scaled coupling over cluster pairs."""
    if p.k < 2:
        raise MetricsError("structural modularity needs at least 2 clusters")
    _require_cover(graph, p)
    sizes = [0] * p.k
    for nid in graph.ids:
        sizes[p.assignment[nid]] += 1
    intra = [0] * p.k
    inter: dict[tuple[int, int], int] = {}
    for e in graph.edges:
        cu, cv = p.assignment[e.u], p.assignment[e.v]
        if cu == cv:
            intra[cu] += 1
        else:
            key = (min(cu, cv), max(cu, cv))
            inter[key] = inter.get(key, 0) + 1

    cohesion_terms = []
    for c in range(p.k):
        if sizes[c] == 0:
            if diagnostics is not None:
                diagnostics.append(f"cluster {c} is empty; cohesion term 0")
            cohesion_terms.append(0.0)
        else:
            cohesion_terms.append(intra[c] / sizes[c] ** 2)
    cohesion = math.fsum(cohesion_terms) / p.k

    pair_count = p.k * (p.k - 1) // 2
    coupling = math.fsum(
        count / (2 * sizes[i] * sizes[j]) for (i, j), count in inter.items()
    ) / pair_count
    return cohesion - coupling


def ifn(facts: AppFacts, p: Partition, directed: bool = True) -> float:
    """Average number of interface programs per cluster.

    A program is an interface when a call into it originates from another
    cluster; the undirected reading also counts the caller side and serves
    as a sanity upper bound.
    """
    interfaces: list[set[str]] = [set() for _ in range(p.k)]
    for caller, callee in facts.calls:
        if caller not in p.assignment or callee not in p.assignment:
            continue   # pruned programs carry no interfaces
        cu, cv = p.assignment[caller], p.assignment[callee]
        if cu == cv:
            continue
        interfaces[cv].add(callee)
        if not directed:
            interfaces[cu].add(caller)
    return math.fsum(len(s) for s in interfaces) / p.k


def ned(p: Partition, bounds: tuple[int, int] = (5, 20)) -> float:
    """Fraction of nodes living in clusters of non-extreme size."""
    lo, hi = bounds
    if lo > hi:
        raise MetricsError(f"invalid size bounds [{lo}, {hi}]")
    total = len(p.assignment)
    if total == 0:
        raise MetricsError("partition is empty")
    sizes = p.sizes()
    return math.fsum(n for n in sizes if lo <= n <= hi) / total


def ari(p: Partition, truth: Partition) -> float:
    """Adjusted Rand index between two partitions of the same node set."""
    if set(p.assignment) != set(truth.assignment):
        raise MetricsError("partitions cover different node sets")
    n = len(p.assignment)
    contingency: dict[tuple[int, int], int] = {}
    for nid, label in p.assignment.items():
        key = (label, truth.assignment[nid])
        contingency[key] = contingency.get(key, 0) + 1
    a: dict[int, int] = {}
    b: dict[int, int] = {}
    for (i, j), count in contingency.items():
        a[i] = a.get(i, 0) + count
        b[j] = b.get(j, 0) + count

    index = sum(math.comb(c, 2) for c in contingency.values())
    sum_a = sum(math.comb(c, 2) for c in a.values())
    sum_b = sum(math.comb(c, 2) for c in b.values())
    pairs = math.comb(n, 2)
    expected = sum_a * sum_b / pairs if pairs else 0.0
    max_index = (sum_a + sum_b) / 2
    if max_index == expected:
        return 1.0   # both partitions trivial and identical in structure
    return (index - expected) / (max_index - expected)


def summarize(graph: HeteroGraph, facts: AppFacts, p: Partition,
              ned_bounds: tuple[int, int] = (5, 20),
              ned_basis: str = "all-nodes",
              diagnostics: list[str] | None = None) -> dict[str, float]:
    """The four partition scores as reported by the service and CLI."""
    if ned_basis not in ("all-nodes", "programs-only"):
        raise MetricsError(f"unknown ned basis {ned_basis!r}")
    ned_p = p if ned_basis == "all-nodes" else p.restricted_to(graph.program_ids)
    return {
        "mod": modularity(graph, p),
        "smod": structural_modularity(graph, p, diagnostics),
        "ifn": ifn(facts, p),
        "ned": ned(ned_p, ned_bounds),
    }
