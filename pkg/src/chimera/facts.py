"""Application facts: parsing, validation, and the heterogeneous graph.

The facts document is a JSON object with exact field names::

    {"programs": [str], "resources": [str], "calls": [[str, str]],
     "crud": [{"program": str, "resource": str, "ops": ["C"|"R"|"U"|"D"]}],
     "inheritance": [[str, str]],
     "entrypoints": [{"id": str, "trace": [str]}]}

Programs never invoked by any entrypoint trace are unreachable and get
pruned from the graph together with their incident relationships. Calls
are directed in the facts (the interface metric needs direction) but the
graph is undirected with at most one edge per node pair per kind.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

PROGRAM = "Program"
RESOURCE = "Resource"
CALLS = "CALLS"
CRUD = "CRUD"

CRUD_OPS = ("C", "R", "U", "D")

D_CALLS = 2
D_CRUD = 4


class FactsError(ValueError):
    """Invalid facts document; `path` points at the offending element."""

    def __init__(self, message: str, path: str = "$", code: str = "invalid-facts"):
        self.path = path
        self.code = code
        super().__init__(f"{message} (at {path})")


class EmptyReachableSetError(FactsError):
    """No program is covered by any entrypoint trace."""

    def __init__(self):
        super().__init__("no program is reachable from any entrypoint trace",
                         path="$.entrypoints", code="empty-reachable-set")


@dataclass(frozen=True)
class CrudAccess:
    program: str
    resource: str
    ops: frozenset[str]


@dataclass(frozen=True)
class Entrypoint:
    id: str
    trace: tuple[str, ...]


@dataclass(frozen=True)
class AppFacts:
    programs: tuple[str, ...]
    resources: tuple[str, ...]
    calls: tuple[tuple[str, str], ...]
    crud: tuple[CrudAccess, ...]
    inheritance: tuple[tuple[str, str], ...]
    entrypoints: tuple[Entrypoint, ...]


@dataclass(frozen=True)
class Edge:
    u: str
    v: str
    kind: str

    def pair(self) -> frozenset[str]:
        return frozenset((self.u, self.v))


@dataclass(frozen=True)
class HeteroGraph:
    """Pruned typed graph with degrees and the id <-> ordinal map."""

    nodes: tuple[tuple[str, str], ...]   # (id, kind), programs first
    edges: tuple[Edge, ...]
    degree: np.ndarray                   # incident edge count per ordinal
    index: dict[str, int]                # id -> ordinal

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(nid for nid, _ in self.nodes)

    @property
    def program_ids(self) -> tuple[str, ...]:
        return tuple(nid for nid, kind in self.nodes if kind == PROGRAM)

    @property
    def resource_ids(self) -> tuple[str, ...]:
        return tuple(nid for nid, kind in self.nodes if kind == RESOURCE)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    def kind_of(self, node_id: str) -> str:
        return self.nodes[self.index[node_id]][1]


@dataclass(frozen=True)
class AttributeSet:
    """Node attribute matrices and per-edge attribute vectors.

    x_program rows follow program ordinals, columns are the concatenated
    [entrypoint incidence | trace co-occurrence | inheritance] blocks, each
    block L1 row-normalized (zero rows stay zero). x_resource rows follow
    resource ordinals with [entrypoint | co-occurrence] blocks summed over
    the programs holding a CRUD edge to the resource. edge_vectors aligns
    with graph.edges: [1, 0] for CALLS, a 0/1 [c, r, u, d] vector for CRUD.
    """

    x_program: np.ndarray
    x_resource: np.ndarray
    edge_vectors: tuple[np.ndarray, ...]
    d_program: int
    d_resource: int
    d_calls: int = D_CALLS
    d_crud: int = D_CRUD


def _expect(cond: bool, message: str, path: str, code: str = "schema-violation"):
    if not cond:
        raise FactsError(message, path, code)


def _string_list(doc: dict, key: str) -> list[str]:
    _expect(key in doc, f"missing field {key!r}", "$", "schema-violation")
    val = doc[key]
    _expect(isinstance(val, list), f"{key!r} must be a list", f"$.{key}")
    for i, item in enumerate(val):
        _expect(isinstance(item, str) and item, f"{key}[{i}] must be a non-empty string", f"$.{key}[{i}]")
    return val


def parse_facts(data: bytes | str) -> AppFacts:
    """Parse and validate a UTF-8 JSON facts document."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise FactsError(f"not valid JSON: {exc.msg}", "$", "invalid-json") from None
    _expect(isinstance(doc, dict), "document must be a JSON object", "$")

    programs = _string_list(doc, "programs")
    resources = _string_list(doc, "resources")
    _expect(len(programs) > 0, "program list is empty", "$.programs", "empty-programs")

    seen: dict[str, str] = {}
    for kind, ids in (("programs", programs), ("resources", resources)):
        for i, nid in enumerate(ids):
            if nid in seen:
                raise FactsError(f"duplicate identifier {nid!r} (already declared in {seen[nid]})",
                                 f"$.{kind}[{i}]", "duplicate-identifier")
            seen[nid] = kind
    prog_set = set(programs)
    res_set = set(resources)

    def check_program(pid, path):
        if pid not in prog_set:
            raise FactsError(f"reference to undeclared program {pid!r}", path, "dangling-reference")

    calls = []
    raw_calls = doc.get("calls", [])
    _expect(isinstance(raw_calls, list), "'calls' must be a list", "$.calls")
    for i, pair in enumerate(raw_calls):
        path = f"$.calls[{i}]"
        _expect(isinstance(pair, list) and len(pair) == 2, "call must be a [caller, callee] pair", path)
        caller, callee = pair
        _expect(isinstance(caller, str) and isinstance(callee, str), "call endpoints must be strings", path)
        check_program(caller, path)
        check_program(callee, path)
        _expect(caller != callee, f"self-call on {caller!r}", path, "self-call")
        calls.append((caller, callee))

    crud = []
    raw_crud = doc.get("crud", [])
    _expect(isinstance(raw_crud, list), "'crud' must be a list", "$.crud")
    for i, entry in enumerate(raw_crud):
        path = f"$.crud[{i}]"
        _expect(isinstance(entry, dict), "crud entry must be an object", path)
        for key in ("program", "resource", "ops"):
            _expect(key in entry, f"crud entry missing {key!r}", path)
        check_program(entry["program"], f"{path}.program")
        if entry["resource"] not in res_set:
            raise FactsError(f"reference to undeclared resource {entry['resource']!r}",
                             f"{path}.resource", "dangling-reference")
        ops = entry["ops"]
        _expect(isinstance(ops, list) and len(ops) > 0, "access set must be a non-empty list", f"{path}.ops")
        for op in ops:
            _expect(op in CRUD_OPS, f"unknown access type {op!r}", f"{path}.ops")
        crud.append(CrudAccess(entry["program"], entry["resource"], frozenset(ops)))

    inheritance = []
    raw_inh = doc.get("inheritance", [])
    _expect(isinstance(raw_inh, list), "'inheritance' must be a list", "$.inheritance")
    for i, pair in enumerate(raw_inh):
        path = f"$.inheritance[{i}]"
        _expect(isinstance(pair, list) and len(pair) == 2, "inheritance must be a [a, b] pair", path)
        a, b = pair
        _expect(isinstance(a, str) and isinstance(b, str), "inheritance endpoints must be strings", path)
        check_program(a, path)
        check_program(b, path)
        _expect(a != b, f"self-inheritance on {a!r}", path)
        inheritance.append((a, b))

    entrypoints = []
    raw_eps = doc.get("entrypoints", [])
    _expect(isinstance(raw_eps, list), "'entrypoints' must be a list", "$.entrypoints")
    for i, entry in enumerate(raw_eps):
        path = f"$.entrypoints[{i}]"
        _expect(isinstance(entry, dict) and "id" in entry and "trace" in entry,
                "entrypoint must be an object with 'id' and 'trace'", path)
        ep_id = entry["id"]
        _expect(isinstance(ep_id, str) and ep_id, "entrypoint id must be a non-empty string", f"{path}.id")
        if ep_id in seen:
            raise FactsError(f"duplicate identifier {ep_id!r} (already declared in {seen[ep_id]})",
                             f"{path}.id", "duplicate-identifier")
        seen[ep_id] = "entrypoints"
        trace = entry["trace"]
        _expect(isinstance(trace, list), "trace must be a list of program ids", f"{path}.trace")
        for j, pid in enumerate(trace):
            _expect(isinstance(pid, str), "trace entries must be strings", f"{path}.trace[{j}]")
            check_program(pid, f"{path}.trace[{j}]")
        entrypoints.append(Entrypoint(ep_id, tuple(trace)))

    return AppFacts(
        programs=tuple(programs),
        resources=tuple(resources),
        calls=tuple(calls),
        crud=tuple(crud),
        inheritance=tuple(inheritance),
        entrypoints=tuple(entrypoints),
    )


def facts_to_json(facts: AppFacts) -> dict:
    """Serialize back to the facts JSON schema (ops in canonical C,R,U,D order)."""
    return {
        "programs": list(facts.programs),
        "resources": list(facts.resources),
        "calls": [list(c) for c in facts.calls],
        "crud": [
            {"program": c.program, "resource": c.resource,
             "ops": [op for op in CRUD_OPS if op in c.ops]}
            for c in facts.crud
        ],
        "inheritance": [list(p) for p in facts.inheritance],
        "entrypoints": [{"id": ep.id, "trace": list(ep.trace)} for ep in facts.entrypoints],
    }


def reachable_programs(facts: AppFacts) -> tuple[str, ...]:
    """Programs covered by at least one entrypoint trace, declaration order."""
    covered = set()
    for ep in facts.entrypoints:
        covered.update(ep.trace)
    return tuple(p for p in facts.programs if p in covered)


def build_graph(facts: AppFacts) -> HeteroGraph:
    """Prune unreachable programs and assemble the undirected typed graph."""
    retained = reachable_programs(facts)
    if not retained:
        raise EmptyReachableSetError()
    retained_set = set(retained)

    nodes = [(p, PROGRAM) for p in retained] + [(r, RESOURCE) for r in facts.resources]
    index = {nid: i for i, (nid, _) in enumerate(nodes)}

    edges: list[Edge] = []
    seen_pairs: set[tuple[frozenset, str]] = set()
    for caller, callee in facts.calls:
        if caller not in retained_set or callee not in retained_set:
            continue
        key = (frozenset((caller, callee)), CALLS)
        if key in seen_pairs:
            continue
        seen_pairs.add(key)
        u, v = sorted((caller, callee), key=index.__getitem__)
        edges.append(Edge(u, v, CALLS))
    for access in facts.crud:
        if access.program not in retained_set:
            continue
        key = (frozenset((access.program, access.resource)), CRUD)
        if key in seen_pairs:
            continue
        seen_pairs.add(key)
        edges.append(Edge(access.program, access.resource, CRUD))

    degree = np.zeros(len(nodes), dtype=np.int64)
    for e in edges:
        degree[index[e.u]] += 1
        degree[index[e.v]] += 1

    return HeteroGraph(nodes=tuple(nodes), edges=tuple(edges), degree=degree, index=index)


def _l1_normalize_rows(block: np.ndarray) -> np.ndarray:
    sums = block.sum(axis=1, keepdims=True)
    safe = np.where(sums > 0, sums, 1.0)
    return block / safe


def build_attributes(facts: AppFacts, graph: HeteroGraph,
                     include_cooc_diagonal: bool = True) -> AttributeSet:
    """Compute node and edge attributes over the retained node set.

    The co-occurrence diagonal counts the traces containing each program
    (its popularity); set include_cooc_diagonal=False to zero it.
    """
    programs = graph.program_ids
    resources = graph.resource_ids
    p_index = {p: i for i, p in enumerate(programs)}
    r_index = {r: i for i, r in enumerate(resources)}
    n_p = len(programs)
    n_ep = len(facts.entrypoints)

    ep_incidence = np.zeros((n_p, n_ep))
    for j, ep in enumerate(facts.entrypoints):
        for pid in set(ep.trace):
            if pid in p_index:
                ep_incidence[p_index[pid], j] = 1.0

    cooc = np.zeros((n_p, n_p))
    for ep in facts.entrypoints:
        members = sorted({p_index[p] for p in ep.trace if p in p_index})
        for a in members:
            for b in members:
                cooc[a, b] += 1.0
    if not include_cooc_diagonal:
        np.fill_diagonal(cooc, 0.0)

    inherit = np.zeros((n_p, n_p))
    for a, b in facts.inheritance:
        if a in p_index and b in p_index:
            inherit[p_index[a], p_index[b]] = 1.0
            inherit[p_index[b], p_index[a]] = 1.0

    x_program = np.hstack([
        _l1_normalize_rows(ep_incidence),
        _l1_normalize_rows(cooc),
        _l1_normalize_rows(inherit),
    ])

    # Resource rows: sum the raw entrypoint and co-occurrence rows of every
    # program holding a CRUD edge to the resource, then normalize per block.
    res_ep = np.zeros((len(resources), n_ep))
    res_cooc = np.zeros((len(resources), n_p))
    crud_ops: dict[tuple[str, str], set[str]] = {}
    for e in graph.edges:
        if e.kind != CRUD:
            continue
        res_ep[r_index[e.v]] += ep_incidence[p_index[e.u]]
        res_cooc[r_index[e.v]] += cooc[p_index[e.u]]
    for access in facts.crud:
        key = (access.program, access.resource)
        crud_ops.setdefault(key, set()).update(access.ops)

    x_resource = np.hstack([
        _l1_normalize_rows(res_ep),
        _l1_normalize_rows(res_cooc),
    ])

    vectors = []
    for e in graph.edges:
        if e.kind == CALLS:
            vectors.append(np.array([1.0, 0.0]))
        else:
            ops = crud_ops[(e.u, e.v)]
            vectors.append(np.array([1.0 if op in ops else 0.0 for op in CRUD_OPS]))

    return AttributeSet(
        x_program=x_program,
        x_resource=x_resource,
        edge_vectors=tuple(vectors),
        d_program=n_ep + 2 * n_p,
        d_resource=n_ep + n_p,
    )
