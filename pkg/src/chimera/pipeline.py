"""Facts-to-recommendation orchestration shared by the CLI and the service."""

from __future__ import annotations

import hashlib
import json
from typing import Callable

from .clustering import ClusteringResult, SeedList, TrainConfig, TrainEvent, train
from .facts import (AppFacts, AttributeSet, HeteroGraph, RESOURCE,
                    build_attributes, build_graph, facts_to_json)
from .metrics import Partition, summarize


def graph_fingerprint(facts: AppFacts) -> str:
    """Content hash of the canonical facts document, 12 hex chars.

    Re-uploading byte-different but semantically identical facts (key order,
    duplicate crud rows) lands on the same id.
    """
    blob = json.dumps(facts_to_json(facts), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


def graph_inventory(graph_id: str, facts: AppFacts, graph: HeteroGraph) -> dict:
    """Node/edge inventory served on upload and on GET /graphs/{id}."""
    return {
        "graph_id": graph_id,
        "nodes": [{"id": nid, "kind": kind} for nid, kind in graph.nodes],
        "edges": [{"source": e.u, "target": e.v, "kind": e.kind} for e in graph.edges],
        "counts": {
            "programs": len(graph.program_ids),
            "resources": len(graph.resource_ids),
            "edges": len(graph.edges),
        },
        "pruned_programs": sorted(set(facts.programs) - set(graph.program_ids)),
    }


def sunburst_tree(p: Partition, graph: HeteroGraph, root: str = "app") -> dict:
    """Partition as a {name, children, value} tree for the workbench charts.

    Root holds one child per cluster; member leaves carry value 1, with
    resource ids suffixed "-res".
    """
    children = []
    for c in range(p.k):
        leaves = []
        for nid in graph.ids:
            if p.assignment.get(nid) != c:
                continue
            suffix = "-res" if graph.kind_of(nid) == RESOURCE else ""
            leaves.append({"name": nid + suffix, "value": 1})
        children.append({"name": f"cluster-{c}", "children": leaves})
    return {"name": root, "children": children}


def run_pipeline(facts: AppFacts, config: TrainConfig, seeds: SeedList,
                 callback: Callable[[TrainEvent], None] | None = None) -> dict:
    """Full pipeline: graph, attributes, training, metrics, sunburst."""
    graph = build_graph(facts)
    attrs = build_attributes(facts, graph)
    result = train(graph, attrs, config, seeds, callback=callback)
    return finish_result(result, graph, facts)


def finish_result(result: ClusteringResult, graph: HeteroGraph,
                  facts: AppFacts) -> dict:
    p = Partition(result.partition, result.config.k)
    payload = result.to_dict()
    payload["metrics"] = summarize(graph, facts, p)
    payload["sunburst"] = sunburst_tree(p, graph)
    return payload
