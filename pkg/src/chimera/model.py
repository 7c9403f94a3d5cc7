"""Community-aware heterogeneous graph autoencoder.

Typed projections map node and edge attributes into a common F0-dim space,
four message-passing layers update node and edge embeddings jointly, and
typed decoders reconstruct the original attributes from the final layer.
The layer-2 node embedding is the clustering space. Loss components: node
and edge attribute reconstruction, full link reconstruction over ordered
node pairs, within-cluster dispersion against the current centers, and a
(negative) separation term between seed-set centers.

Two forward routes live here on purpose. The per-node operations
(project_inputs, aggregate_neighborhood, update_node, update_edge,
decode_attributes) apply the update rules one node or edge at a time and
are the readable reference. forward_arrays and build_loss_tape run the
same computation as a fixed sequence of matrix products against
precomputed wiring constants; training uses those. Tests pin the two
routes together to 1e-9.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import stable_sigmoid
from .facts import CALLS, CRUD, D_CALLS, D_CRUD, AttributeSet, HeteroGraph

N_LAYERS = 4

CHGNN = "chgnn"
CHGNN_EL = "chgnn-el"
HETGCNCONV = "hetgcnconv"
VARIANTS = (CHGNN, CHGNN_EL, HETGCNCONV)

# the single-projection variant folds CALLS attributes into the wider space
PADDED_EDGE_DIM = D_CRUD


def activation_fn(name: str):
    """Numpy activation by name; the taped twins live in autodiff.ACTIVATIONS."""
    if name == "relu":
        return lambda x: np.maximum(x, 0.0)
    if name == "sigmoid":
        return stable_sigmoid
    if name == "tanh":
        return np.tanh
    if name == "identity":
        return lambda x: x
    raise ValueError(f"unknown activation {name!r}")


@dataclass(frozen=True)
class DimLadder:
    """Embedding widths F0..F4 with F3 = F1 and F4 = F0."""

    f0: int = 128
    f1: int = 64
    f2: int = 32

    def __post_init__(self):
        if not (self.f0 > self.f1 > self.f2 >= 1):
            raise ValueError(f"dimension ladder must satisfy F0 > F1 > F2 >= 1, "
                             f"got ({self.f0}, {self.f1}, {self.f2})")

    @property
    def dims(self) -> tuple[int, int, int, int, int]:
        return (self.f0, self.f1, self.f2, self.f1, self.f0)


def _glorot(rng: np.random.Generator, fan_out: int, fan_in: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_out, fan_in))


def weight_shapes(d_program: int, d_resource: int, ladder: DimLadder,
                  variant: str) -> dict[str, tuple[int, int]]:
    """All trainable matrices, insertion-ordered (initialization order)."""
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    dims = ladder.dims
    shapes: dict[str, tuple[int, int]] = {
        "in_program": (dims[0], d_program),
        "in_resource": (dims[0], d_resource),
    }
    if variant == HETGCNCONV:
        shapes["in_edge"] = (dims[0], PADDED_EDGE_DIM)
    else:
        shapes["in_CALLS"] = (dims[0], D_CALLS)
        shapes["in_CRUD"] = (dims[0], D_CRUD)
    for layer in range(1, N_LAYERS + 1):
        f_out, f_in = dims[layer], dims[layer - 1]
        shapes[f"w1_{layer}"] = (f_out, f_in)
        shapes[f"w2_{layer}"] = (f_out, f_in)
        shapes[f"w3_{layer}"] = (f_out, f_out + f_in)
    shapes["dec_program"] = (d_program, dims[4])
    shapes["dec_resource"] = (d_resource, dims[4])
    if variant == HETGCNCONV:
        shapes["dec_edge"] = (PADDED_EDGE_DIM, dims[4])
    else:
        shapes["dec_CALLS"] = (D_CALLS, dims[4])
        shapes["dec_CRUD"] = (D_CRUD, dims[4])
    return shapes


def edge_projection_keys(variant: str) -> tuple[str, ...]:
    return ("in_edge",) if variant == HETGCNCONV else ("in_CALLS", "in_CRUD")


def edge_decoder_keys(variant: str) -> tuple[str, ...]:
    return ("dec_edge",) if variant == HETGCNCONV else ("dec_CALLS", "dec_CRUD")


@dataclass
class ModelParams:
    """Trainable weights, keyed as in weight_shapes."""

    weights: dict[str, np.ndarray]
    ladder: DimLadder
    variant: str
    d_program: int
    d_resource: int

    @classmethod
    def init(cls, d_program: int, d_resource: int, ladder: DimLadder,
             variant: str, rng_seed: int) -> "ModelParams":
        rng = np.random.default_rng(rng_seed)
        shapes = weight_shapes(d_program, d_resource, ladder, variant)
        weights = {name: _glorot(rng, *shape) for name, shape in shapes.items()}
        return cls(weights, ladder, variant, d_program, d_resource)

    def validate(self):
        expected = weight_shapes(self.d_program, self.d_resource, self.ladder, self.variant)
        if set(self.weights) != set(expected):
            raise ValueError(f"weight inventory mismatch: {sorted(self.weights)} "
                             f"vs expected {sorted(expected)}")
        for name, shape in expected.items():
            w = self.weights[name]
            if w.shape != shape:
                raise ValueError(f"{name}: shape {w.shape}, expected {shape}")
            if not np.all(np.isfinite(w)):
                raise ValueError(f"{name}: non-finite entries")


def edge_input_matrix(attrs: AttributeSet, graph: HeteroGraph,
                      variant: str) -> dict[str, np.ndarray]:
    """Per-kind edge attribute matrices in edge order.

    For the single-projection variant every edge gets a PADDED_EDGE_DIM
    vector, CALLS attributes zero-padded on the right.
    """
    calls_rows = [attrs.edge_vectors[i] for i, e in enumerate(graph.edges) if e.kind == CALLS]
    crud_rows = [attrs.edge_vectors[i] for i, e in enumerate(graph.edges) if e.kind == CRUD]
    out = {
        CALLS: np.array(calls_rows).reshape(len(calls_rows), D_CALLS),
        CRUD: np.array(crud_rows).reshape(len(crud_rows), D_CRUD),
    }
    if variant == HETGCNCONV:
        padded = np.zeros((len(graph.edges), PADDED_EDGE_DIM))
        for i, vec in enumerate(attrs.edge_vectors):
            padded[i, :vec.shape[0]] = vec
        out["padded"] = padded
    return out


@dataclass(frozen=True)
class GraphWiring:
    """Constant matrices that turn message passing into matrix products.

    Gather/scatter layout: every undirected edge e=(u,v) contributes two
    directed copies, copy 2i sends u's message to v and copy 2i+1 sends
    v's to u. gather_src selects the source node row per copy, gather_edge
    the edge row, and scatter sums copies into their target node row with
    the 1/sqrt(d_u d_v) coefficient folded in.
    """

    n_nodes: int
    n_programs: int
    n_edges: int
    place_prog: np.ndarray       # |V| x |V_P|
    place_res: np.ndarray        # |V| x |V_R|
    place_kind: dict[str, np.ndarray]   # |E| x |E_kind|
    gather_src: np.ndarray       # 2|E| x |V|
    gather_edge: np.ndarray      # 2|E| x |E|
    scatter: np.ndarray          # |V| x 2|E|
    end_avg: np.ndarray          # |E| x |V|
    dinv: np.ndarray             # |V| x |V| diagonal of 1/max(degree,1)
    adjacency: np.ndarray        # |V| x |V| 0/1, any kind
    offdiag: np.ndarray          # 1 - identity
    x_program: np.ndarray
    x_resource: np.ndarray
    x_edge: dict[str, np.ndarray]
    variant: str

    @classmethod
    def build(cls, graph: HeteroGraph, attrs: AttributeSet, variant: str) -> "GraphWiring":
        n = graph.n_nodes
        n_p = len(graph.program_ids)
        n_e = len(graph.edges)
        place_prog = np.zeros((n, n_p))
        place_prog[:n_p, :] = np.eye(n_p)      # programs occupy the first ordinals
        place_res = np.zeros((n, n - n_p))
        place_res[n_p:, :] = np.eye(n - n_p)

        place_kind = {}
        for kind in (CALLS, CRUD):
            members = [i for i, e in enumerate(graph.edges) if e.kind == kind]
            mat = np.zeros((n_e, len(members)))
            for col, row in enumerate(members):
                mat[row, col] = 1.0
            place_kind[kind] = mat

        clamped = np.maximum(graph.degree, 1).astype(np.float64)
        gather_src = np.zeros((2 * n_e, n))
        gather_edge = np.zeros((2 * n_e, n_e))
        scatter = np.zeros((n, 2 * n_e))
        end_avg = np.zeros((n_e, n))
        adjacency = np.zeros((n, n))
        for i, e in enumerate(graph.edges):
            u, v = graph.index[e.u], graph.index[e.v]
            coeff = 1.0 / np.sqrt(clamped[u] * clamped[v])
            gather_src[2 * i, u] = 1.0
            gather_edge[2 * i, i] = 1.0
            scatter[v, 2 * i] = coeff
            gather_src[2 * i + 1, v] = 1.0
            gather_edge[2 * i + 1, i] = 1.0
            scatter[u, 2 * i + 1] = coeff
            end_avg[i, u] += 0.5
            end_avg[i, v] += 0.5
            adjacency[u, v] = 1.0
            adjacency[v, u] = 1.0

        return cls(
            n_nodes=n, n_programs=n_p, n_edges=n_e,
            place_prog=place_prog, place_res=place_res, place_kind=place_kind,
            gather_src=gather_src, gather_edge=gather_edge, scatter=scatter,
            end_avg=end_avg, dinv=np.diag(1.0 / clamped),
            adjacency=adjacency, offdiag=1.0 - np.eye(n),
            x_program=attrs.x_program, x_resource=attrs.x_resource,
            x_edge=edge_input_matrix(attrs, graph, variant), variant=variant,
        )


@dataclass
class EmbeddingState:
    """Per-layer embeddings plus decoded attributes."""

    node: list[np.ndarray]               # l=0..4, each |V| x F_l
    edge: list[np.ndarray]               # l=0..4, each |E| x F_l
    x_hat_program: np.ndarray
    x_hat_resource: np.ndarray
    x_hat_edges: tuple[np.ndarray, ...]  # aligned with graph.edges

    @property
    def h2(self) -> np.ndarray:
        return self.node[2]


# ---------------------------------------------------------------------------
# Reference route: one node or edge at a time.

def _node_attr(graph: HeteroGraph, attrs: AttributeSet, v: int) -> np.ndarray:
    n_p = len(graph.program_ids)
    return attrs.x_program[v] if v < n_p else attrs.x_resource[v - n_p]


def _edge_attr(graph: HeteroGraph, attrs: AttributeSet, i: int, variant: str) -> np.ndarray:
    vec = attrs.edge_vectors[i]
    if variant == HETGCNCONV:
        padded = np.zeros(PADDED_EDGE_DIM)
        padded[:vec.shape[0]] = vec
        return padded
    return vec


def _edge_in_key(kind: str, variant: str) -> str:
    return "in_edge" if variant == HETGCNCONV else f"in_{kind}"


def _edge_dec_key(kind: str, variant: str) -> str:
    return "dec_edge" if variant == HETGCNCONV else f"dec_{kind}"


def project_inputs(graph: HeteroGraph, attrs: AttributeSet, params: ModelParams,
                   activation: str = "relu") -> tuple[np.ndarray, np.ndarray]:
    """Layer-0 embeddings: act(W x) per node and edge, all dimension F0."""
    act = activation_fn(activation)
    f0 = params.ladder.dims[0]
    n_p = len(graph.program_ids)
    node0 = np.zeros((graph.n_nodes, f0))
    for v in range(graph.n_nodes):
        key = "in_program" if v < n_p else "in_resource"
        node0[v] = act(params.weights[key] @ _node_attr(graph, attrs, v))
    edge0 = np.zeros((len(graph.edges), f0))
    for i, e in enumerate(graph.edges):
        w = params.weights[_edge_in_key(e.kind, params.variant)]
        edge0[i] = act(w @ _edge_attr(graph, attrs, i, params.variant))
    return node0, edge0


def _neighbors(graph: HeteroGraph, v: int) -> list[tuple[int, int]]:
    """(neighbor ordinal, edge index) pairs for node ordinal v."""
    out = []
    for i, e in enumerate(graph.edges):
        u, w = graph.index[e.u], graph.index[e.v]
        if u == v:
            out.append((w, i))
        elif w == v:
            out.append((u, i))
    return out


def aggregate_neighborhood(graph: HeteroGraph, v: int, layer: int,
                           node_prev: np.ndarray, edge_prev: np.ndarray,
                           params: ModelParams, activation: str = "relu") -> np.ndarray:
    """Degree-normalized sum of gated neighbor messages into node v."""
    act = activation_fn(activation)
    w1 = params.weights[f"w1_{layer}"]
    w2 = params.weights[f"w2_{layer}"]
    clamped = np.maximum(graph.degree, 1)
    z = np.zeros(w1.shape[0])
    for u, i in _neighbors(graph, v):
        coeff = 1.0 / np.sqrt(clamped[u] * clamped[v])
        z += coeff * (w1 @ node_prev[u]) * act(w2 @ edge_prev[i])
    return z


def update_node(graph: HeteroGraph, v: int, layer: int, z: np.ndarray,
                node_prev: np.ndarray, params: ModelParams,
                activation: str = "relu") -> np.ndarray:
    """act(z + self term / degree); the self term passes through w1."""
    act = activation_fn(activation)
    w1 = params.weights[f"w1_{layer}"]
    d = max(int(graph.degree[v]), 1)
    return act(z + (w1 @ node_prev[v]) / d)


def update_edge(graph: HeteroGraph, i: int, layer: int, node_cur: np.ndarray,
                edge_prev: np.ndarray, params: ModelParams,
                activation: str = "relu") -> np.ndarray:
    """act(W3 [endpoint mean, previous edge embedding])."""
    act = activation_fn(activation)
    w3 = params.weights[f"w3_{layer}"]
    e = graph.edges[i]
    u, v = graph.index[e.u], graph.index[e.v]
    mean = 0.5 * (node_cur[u] + node_cur[v])
    return act(w3 @ np.concatenate([mean, edge_prev[i]]))


def decode_attributes(graph: HeteroGraph, node4: np.ndarray, edge4: np.ndarray,
                      params: ModelParams, activation: str = "relu",
                      ) -> tuple[np.ndarray, np.ndarray, tuple[np.ndarray, ...]]:
    act = activation_fn(activation)
    n_p = len(graph.program_ids)
    x_hat_p = act(node4[:n_p] @ params.weights["dec_program"].T)
    x_hat_r = act(node4[n_p:] @ params.weights["dec_resource"].T)
    x_hat_e = tuple(
        act(params.weights[_edge_dec_key(e.kind, params.variant)] @ edge4[i])
        for i, e in enumerate(graph.edges)
    )
    return x_hat_p, x_hat_r, x_hat_e


def forward_reference(graph: HeteroGraph, attrs: AttributeSet, params: ModelParams,
                      activation: str = "relu") -> EmbeddingState:
    node0, edge0 = project_inputs(graph, attrs, params, activation)
    node_layers, edge_layers = [node0], [edge0]
    for layer in range(1, N_LAYERS + 1):
        node_prev, edge_prev = node_layers[-1], edge_layers[-1]
        f_out = params.ladder.dims[layer]
        node_cur = np.zeros((graph.n_nodes, f_out))
        for v in range(graph.n_nodes):
            z = aggregate_neighborhood(graph, v, layer, node_prev, edge_prev,
                                       params, activation)
            node_cur[v] = update_node(graph, v, layer, z, node_prev, params, activation)
        edge_cur = np.zeros((len(graph.edges), f_out))
        for i in range(len(graph.edges)):
            edge_cur[i] = update_edge(graph, i, layer, node_cur, edge_prev,
                                      params, activation)
        node_layers.append(node_cur)
        edge_layers.append(edge_cur)
    x_hat_p, x_hat_r, x_hat_e = decode_attributes(graph, node_layers[4], edge_layers[4],
                                                  params, activation)
    return EmbeddingState(node_layers, edge_layers, x_hat_p, x_hat_r, x_hat_e)


# ---------------------------------------------------------------------------
# Vectorized route. forward_arrays is the plain-numpy twin of the taped
# builder below; both walk the same wiring constants in the same order.

def forward_arrays(wiring: GraphWiring, params: ModelParams,
                   activation: str = "relu") -> EmbeddingState:
    act = activation_fn(activation)
    w = params.weights
    node0 = np.vstack([
        act(wiring.x_program @ w["in_program"].T),
        act(wiring.x_resource @ w["in_resource"].T),
    ])
    if wiring.variant == HETGCNCONV:
        edge0 = act(wiring.x_edge["padded"] @ w["in_edge"].T)
    else:
        pre = (wiring.place_kind[CALLS] @ (wiring.x_edge[CALLS] @ w["in_CALLS"].T)
               + wiring.place_kind[CRUD] @ (wiring.x_edge[CRUD] @ w["in_CRUD"].T))
        edge0 = act(pre)

    node_layers, edge_layers = [node0], [edge0]
    for layer in range(1, N_LAYERS + 1):
        node_prev, edge_prev = node_layers[-1], edge_layers[-1]
        hw = node_prev @ w[f"w1_{layer}"].T
        msg = act(edge_prev @ w[f"w2_{layer}"].T)
        z = wiring.scatter @ ((wiring.gather_src @ hw) * (wiring.gather_edge @ msg))
        node_cur = act(z + wiring.dinv @ hw)
        mean = wiring.end_avg @ node_cur
        edge_cur = act(np.hstack([mean, edge_prev]) @ w[f"w3_{layer}"].T)
        node_layers.append(node_cur)
        edge_layers.append(edge_cur)

    n_p = wiring.n_programs
    x_hat_p = act(node_layers[4][:n_p] @ w["dec_program"].T)
    x_hat_r = act(node_layers[4][n_p:] @ w["dec_resource"].T)
    if wiring.variant == HETGCNCONV:
        dec = act(edge_layers[4] @ w["dec_edge"].T)
        x_hat_e = tuple(dec[i] for i in range(wiring.n_edges))
    else:
        per_kind = {
            kind: act((wiring.place_kind[kind].T @ edge_layers[4]) @ w[f"dec_{kind}"].T)
            for kind in (CALLS, CRUD)
        }
        cursor = {CALLS: 0, CRUD: 0}
        rows = []
        for col in range(wiring.n_edges):
            kind = CALLS if wiring.place_kind[CALLS][col].any() else CRUD
            rows.append(per_kind[kind][cursor[kind]])
            cursor[kind] += 1
        x_hat_e = tuple(rows)
    return EmbeddingState(node_layers, edge_layers, x_hat_p, x_hat_r, x_hat_e)


# ---------------------------------------------------------------------------
# Losses.

@dataclass(frozen=True)
class LossBreakdown:
    node_recon: float
    edge_recon: float
    link_recon: float
    clustering: float
    seed_separation: float
    alphas: tuple[float, float, float, float]

    @property
    def total(self) -> float:
        a1, a2, a3, a4 = self.alphas
        return (a1 * self.node_recon + a2 * self.edge_recon + a3 * self.link_recon
                + a4 * (self.clustering + self.seed_separation))

    def to_dict(self) -> dict:
        return {
            "node_recon": self.node_recon,
            "edge_recon": self.edge_recon,
            "link_recon": self.link_recon,
            "clustering": self.clustering,
            "seed_separation": self.seed_separation,
            "total": self.total,
            "alphas": list(self.alphas),
        }


def _check_assignment(M: np.ndarray, C: np.ndarray, n_groups: int | None):
    if M.ndim != 2 or C.ndim != 2 or M.shape[1] != C.shape[0]:
        raise ValueError(f"cluster count mismatch: M {M.shape} vs centers {C.shape}")
    one_hot = np.all(np.isin(M, (0.0, 1.0))) and np.all(M.sum(axis=1) == 1.0)
    if not one_hot:
        raise ValueError("assignment matrix rows must be one-hot")
    if n_groups is not None and n_groups != M.shape[1]:
        raise ValueError(f"cluster count mismatch: M {M.shape} vs {n_groups} seed sets")


def seed_selector(graph: HeteroGraph, seed_groups) -> np.ndarray:
    """K x |V| averaging matrix: row k has 1/|S_k| at each seed of set k."""
    sel = np.zeros((len(seed_groups), graph.n_nodes))
    for k, group in enumerate(seed_groups):
        members = sorted(graph.index[nid] for nid in group)
        for v in members:
            sel[k, v] = 1.0 / len(group)
    return sel


def _pair_differences(k: int) -> np.ndarray:
    """(k choose 2) x k matrix of e_i - e_j rows, i < j."""
    rows = []
    for i in range(k):
        for j in range(i + 1, k):
            row = np.zeros(k)
            row[i], row[j] = 1.0, -1.0
            rows.append(row)
    return np.array(rows).reshape(len(rows), k)


def separation_term(h2: np.ndarray, graph: HeteroGraph, seed_groups) -> float:
    """Negated sum of squared seed-center distances over ordered pairs."""
    if not seed_groups or all(len(g) == 0 for g in seed_groups):
        return 0.0
    centers = seed_selector(graph, seed_groups) @ h2
    diffs = _pair_differences(len(seed_groups)) @ centers
    return -2.0 * float(np.sum(diffs * diffs))


def compute_losses(graph: HeteroGraph, attrs: AttributeSet, state: EmbeddingState,
                   M: np.ndarray | None, C: np.ndarray | None, seed_groups,
                   alphas: tuple[float, float, float, float],
                   variant: str = CHGNN) -> LossBreakdown:
    """Numeric loss evaluation from an already-computed forward state."""
    n_p = len(graph.program_ids)
    node_recon = float(np.sum((attrs.x_program - state.x_hat_program) ** 2)
                       + np.sum((attrs.x_resource - state.x_hat_resource) ** 2))

    edge_recon = 0.0
    for i, e in enumerate(graph.edges):
        target = _edge_attr(graph, attrs, i, variant)
        edge_recon += float(np.sum((target - state.x_hat_edges[i]) ** 2))

    adjacency = np.zeros((graph.n_nodes, graph.n_nodes))
    for e in graph.edges:
        u, v = graph.index[e.u], graph.index[e.v]
        adjacency[u, v] = adjacency[v, u] = 1.0
    scores = stable_sigmoid(state.h2 @ state.h2.T)
    mask = 1.0 - np.eye(graph.n_nodes)
    link_recon = float(np.sum(mask * (adjacency - scores) ** 2))

    if M is None or C is None:
        clustering = 0.0
    else:
        _check_assignment(M, C, len(seed_groups) if seed_groups else None)
        clustering = float(np.sum((state.h2 - M @ C) ** 2))

    seed_separation = separation_term(state.h2, graph, seed_groups)
    return LossBreakdown(node_recon, edge_recon, link_recon, clustering,
                         seed_separation, tuple(float(a) for a in alphas))


def build_loss_tape(wiring: GraphWiring, params: ModelParams,
                    alphas: tuple[float, float, float, float],
                    M: np.ndarray | None, C: np.ndarray | None,
                    seed_sel: np.ndarray | None,
                    activation: str = "relu") -> tuple[ad.Tape, dict[str, ad.Tensor]]:
    """Taped twin of forward_arrays + compute_losses.

    seed_sel is the seed_selector matrix (or None for no seeds). M and C
    enter as constants: the network trains against the current assignment.
    """
    act = ad.ACTIVATIONS[activation]
    a1, a2, a3, a4 = (float(a) for a in alphas)
    tape = ad.Tape()
    w = {name: tape.leaf(name, arr) for name, arr in params.weights.items()}

    def through(weight_key: str, tensor: ad.Tensor) -> ad.Tensor:
        return ad.matmul(tensor, ad.transpose(w[weight_key]))

    x_p = tape.constant(wiring.x_program)
    x_r = tape.constant(wiring.x_resource)
    prog0 = act(through("in_program", x_p))
    res0 = act(through("in_resource", x_r))
    node0 = ad.add(ad.matmul(tape.constant(wiring.place_prog), prog0),
                   ad.matmul(tape.constant(wiring.place_res), res0))

    have_edges = wiring.n_edges > 0
    if wiring.variant == HETGCNCONV:
        edge0 = act(through("in_edge", tape.constant(wiring.x_edge["padded"])))
    else:
        pre = None
        for kind in (CALLS, CRUD):
            if wiring.x_edge[kind].shape[0] == 0:
                continue
            placed = ad.matmul(tape.constant(wiring.place_kind[kind]),
                               through(f"in_{kind}", tape.constant(wiring.x_edge[kind])))
            pre = placed if pre is None else ad.add(pre, placed)
        edge0 = act(pre) if pre is not None else None

    node_layers, edge_layers = [node0], [edge0]
    for layer in range(1, N_LAYERS + 1):
        node_prev, edge_prev = node_layers[-1], edge_layers[-1]
        hw = through(f"w1_{layer}", node_prev)
        self_term = ad.matmul(tape.constant(wiring.dinv), hw)
        if have_edges:
            msg = act(through(f"w2_{layer}", edge_prev))
            per_copy = ad.hadamard(ad.matmul(tape.constant(wiring.gather_src), hw),
                                   ad.matmul(tape.constant(wiring.gather_edge), msg))
            z = ad.matmul(tape.constant(wiring.scatter), per_copy)
            node_cur = act(ad.add(z, self_term))
        else:
            node_cur = act(self_term)
        if have_edges:
            mean = ad.matmul(tape.constant(wiring.end_avg), node_cur)
            edge_cur = act(through(f"w3_{layer}", ad.concat_cols(mean, edge_prev)))
        else:
            edge_cur = None
        node_layers.append(node_cur)
        edge_layers.append(edge_cur)

    h2 = node_layers[2]
    node4, edge4 = node_layers[4], edge_layers[4]

    prog4 = ad.matmul(tape.constant(wiring.place_prog.T), node4)
    res4 = ad.matmul(tape.constant(wiring.place_res.T), node4)
    node_recon = ad.add(
        ad.sum_of_squares(ad.sub(tape.constant(wiring.x_program),
                                 act(through("dec_program", prog4)))),
        ad.sum_of_squares(ad.sub(tape.constant(wiring.x_resource),
                                 act(through("dec_resource", res4)))),
    )

    edge_recon = None
    if have_edges:
        if wiring.variant == HETGCNCONV:
            edge_recon = ad.sum_of_squares(ad.sub(
                tape.constant(wiring.x_edge["padded"]),
                act(through("dec_edge", edge4))))
        else:
            for kind in (CALLS, CRUD):
                if wiring.x_edge[kind].shape[0] == 0:
                    continue
                picked = ad.matmul(tape.constant(wiring.place_kind[kind].T), edge4)
                term = ad.sum_of_squares(ad.sub(tape.constant(wiring.x_edge[kind]),
                                                act(through(f"dec_{kind}", picked))))
                edge_recon = term if edge_recon is None else ad.add(edge_recon, term)
    if edge_recon is None:
        edge_recon = tape.constant(0.0)

    scores = ad.sigmoid(ad.matmul(h2, ad.transpose(h2)))
    link_recon = ad.sum_of_squares(
        ad.hadamard(ad.sub(tape.constant(wiring.adjacency), scores),
                    tape.constant(wiring.offdiag)))

    if M is not None and C is not None:
        clustering = ad.sum_of_squares(ad.sub(h2, tape.constant(M @ C)))
    else:
        clustering = tape.constant(0.0)

    if seed_sel is not None and seed_sel.shape[0] > 1:
        centers = ad.matmul(tape.constant(seed_sel), h2)
        diffs = ad.matmul(tape.constant(_pair_differences(seed_sel.shape[0])), centers)
        seed_separation = ad.scale(ad.sum_of_squares(diffs), -2.0)
    else:
        seed_separation = tape.constant(0.0)

    total = ad.add(
        ad.add(ad.scale(node_recon, a1), ad.scale(edge_recon, a2)),
        ad.add(ad.scale(link_recon, a3),
               ad.scale(ad.add(clustering, seed_separation), a4)),
    )
    tensors = {
        "total": total,
        "node_recon": node_recon,
        "edge_recon": edge_recon,
        "link_recon": link_recon,
        "clustering": clustering,
        "seed_separation": seed_separation,
        "h2": h2,
    }
    return tape, tensors


def edge_recon_grad_norm(grads: dict[str, np.ndarray], variant: str) -> float:
    """Frobenius norm of the gradient over the edge-decoder weights.

    Edge decoders feed only the edge reconstruction term, so this is the
    gradient footprint of that loss component.
    """
    total = 0.0
    for key in edge_decoder_keys(variant):
        g = grads.get(key)
        if g is not None:
            total += float(np.sum(g * g))
    return float(np.sqrt(total))
