"""Synthetic application generator with planted cluster structure.

Programs are grouped into K communities; call edges fall on each unordered
program pair with probability p_in inside a community and p_out across,
every community keeps its own resources and entrypoint traces, so the
planted labels are recoverable and usable as ground truth.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .clustering import SeedList
from .facts import AppFacts, parse_facts
from .metrics import Partition


class SynthError(ValueError):
    pass


@dataclass(frozen=True)
class SynthSpec:
    k: int = 4
    programs_per_cluster: int = 15
    resources_per_cluster: int = 2
    p_in: float = 0.3
    p_out: float = 0.02
    entrypoints_per_cluster: int = 6
    trace_len: tuple[int, int] = (3, 8)
    seeds_per_cluster: int = 1
    rng_seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise SynthError(f"cluster count must be positive, got {self.k}")
        if self.programs_per_cluster < 1:
            raise SynthError("each cluster needs at least one program")
        if self.resources_per_cluster < 0:
            raise SynthError("resource count cannot be negative")
        if not (0.0 <= self.p_out < self.p_in <= 1.0):
            raise SynthError(
                f"edge probabilities need 0 <= p_out < p_in <= 1, "
                f"got p_in={self.p_in}, p_out={self.p_out}")
        if self.entrypoints_per_cluster < 1:
            raise SynthError("each cluster needs at least one entrypoint")
        lo, hi = self.trace_len
        if not (1 <= lo <= hi):
            raise SynthError(f"invalid trace length range [{lo}, {hi}]")
        members = self.programs_per_cluster + self.resources_per_cluster
        if not (0 <= self.seeds_per_cluster <= members):
            raise SynthError(
                f"seeds per cluster must lie in [0, {members}], "
                f"got {self.seeds_per_cluster}")


def generate(spec: SynthSpec) -> tuple[AppFacts, Partition, SeedList]:
    """Draw one application; same spec, same output, bit for bit."""
    rng = np.random.default_rng(spec.rng_seed)
    programs = [[f"C{c}P{i}" for i in range(spec.programs_per_cluster)]
                for c in range(spec.k)]
    resources = [[f"C{c}R{j}" for j in range(spec.resources_per_cluster)]
                 for c in range(spec.k)]
    all_programs = [p for group in programs for p in group]

    calls = []
    for i in range(len(all_programs)):
        for j in range(i + 1, len(all_programs)):
            a, b = all_programs[i], all_programs[j]
            same = a[:a.index("P")] == b[:b.index("P")]
            prob = spec.p_in if same else spec.p_out
            if rng.random() < prob:
                if rng.random() < 0.5:
                    a, b = b, a
                calls.append([a, b])

    crud = []
    for c in range(spec.k):
        for prog in programs[c]:
            for res in resources[c]:
                ops = [op for op in "CRUD" if rng.random() < 0.5]
                if not ops:
                    ops = [str(rng.choice(list("CRUD")))]
                crud.append({"program": prog, "resource": res, "ops": ops})

    entrypoints = []
    lo, hi = spec.trace_len
    for c in range(spec.k):
        members = programs[c]
        traces: list[list[str]] = [[] for _ in range(spec.entrypoints_per_cluster)]
        order = [members[i] for i in rng.permutation(len(members))]
        for i, prog in enumerate(order):
            traces[i % spec.entrypoints_per_cluster].append(prog)
        for t, trace in enumerate(traces):
            target = int(rng.integers(lo, hi + 1))
            pool = [p for p in members if p not in trace]
            while len(trace) < target and pool:
                pick = int(rng.integers(len(pool)))
                trace.append(pool.pop(pick))
            entrypoints.append({"id": f"C{c}EP{t}", "trace": trace})

    doc = {
        "programs": all_programs,
        "resources": [r for group in resources for r in group],
        "calls": calls,
        "crud": crud,
        "inheritance": [],
        "entrypoints": entrypoints,
    }
    facts = parse_facts(json.dumps(doc))

    labels = {}
    for c in range(spec.k):
        for nid in programs[c] + resources[c]:
            labels[nid] = c
    truth = Partition(labels, spec.k)

    groups = []
    for c in range(spec.k):
        members = programs[c] + resources[c]
        picked = rng.choice(len(members), size=spec.seeds_per_cluster, replace=False)
        groups.append([members[int(i)] for i in sorted(picked)])
    seeds = SeedList.from_lists(groups)
    return facts, truth, seeds


def sidecar_json(truth: Partition, seeds: SeedList) -> dict:
    """Ground-truth labels and seed groups as written next to generated facts."""
    return {"labels": dict(sorted(truth.assignment.items())),
            "seeds": seeds.to_lists()}
