"""Seed-constrained joint clustering over the autoencoder embedding.

Training runs in two phases. Pre-training minimizes the reconstruction
losses alone (the clustering weight is zero). Cluster centers are then
initialized from seed-set means, or by D-squared weighted sampling when no
seeds are given, and the joint phase alternates {assign clusters, update
centers, one optimizer epoch on the full loss} for a fixed number of
iterations. Seed nodes keep their mandated cluster at every assignment.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import model as mdl
from .facts import AttributeSet, HeteroGraph
from .model import CHGNN, VARIANTS, DimLadder, GraphWiring, LossBreakdown, ModelParams
from .optim import AdamState, adam_step


class ClusteringError(ValueError):
    """Invalid clustering input."""


class ClusterCountError(ClusteringError):
    """K outside [1, |V|]."""


class SeedError(ClusteringError):
    """Malformed seed list or seed ids missing from the graph."""


class DivergenceError(RuntimeError):
    """Training produced a non-finite value."""

    def __init__(self, phase: str, epoch: int):
        self.phase = phase
        self.epoch = epoch
        super().__init__(f"non-finite loss during {phase} at epoch {epoch}")


# Published loss-weight schedule: (node, edge, link, clustering) per phase.
# The two reduced variants drop the edge reconstruction weight.
PRETRAIN_ALPHAS = {
    CHGNN: (0.4, 0.2, 0.4, 0.0),
    mdl.CHGNN_EL: (0.5, 0.0, 0.5, 0.0),
    mdl.HETGCNCONV: (0.5, 0.0, 0.5, 0.0),
}
JOINT_ALPHAS = {
    CHGNN: (0.1, 0.1, 0.1, 0.7),
    mdl.CHGNN_EL: (0.1, 0.0, 0.1, 0.8),
    mdl.HETGCNCONV: (0.1, 0.0, 0.1, 0.8),
}


@dataclass(frozen=True)
class SeedList:
    """K node-id sets; nonempty sets pin their members to that cluster."""

    groups: tuple[frozenset[str], ...]

    def __post_init__(self):
        if len(self.groups) < 1:
            raise SeedError("seed list needs at least one cluster")
        seen: set[str] = set()
        for k, group in enumerate(self.groups):
            overlap = seen & group
            if overlap:
                raise SeedError(f"seed id {sorted(overlap)[0]!r} appears in more "
                                f"than one seed set")
            seen |= group
        nonempty = [g for g in self.groups if g]
        if nonempty and len(nonempty) != len(self.groups):
            raise SeedError("either every seed set is nonempty or all are empty")

    @classmethod
    def from_lists(cls, lists) -> "SeedList":
        return cls(tuple(frozenset(g) for g in lists))

    @classmethod
    def empty(cls, k: int) -> "SeedList":
        return cls(tuple(frozenset() for _ in range(k)))

    @property
    def k(self) -> int:
        return len(self.groups)

    @property
    def has_seeds(self) -> bool:
        return any(self.groups)

    def validate_against(self, graph: HeteroGraph):
        for group in self.groups:
            for nid in group:
                if nid not in graph.index:
                    raise SeedError(f"seed id {nid!r} is not a node of the graph")

    def to_lists(self) -> list[list[str]]:
        return [sorted(g) for g in self.groups]


@dataclass
class Assignment:
    """Cluster state: one-hot membership rows and the centers."""

    M: np.ndarray
    C: np.ndarray

    @property
    def sizes(self) -> np.ndarray:
        return self.M.sum(axis=0)


@dataclass
class TrainConfig:
    k: int
    f0: int = 128
    f1: int = 64
    f2: int = 32
    pretrain_epochs: int = 150
    pretrain_lr: float = 0.01
    joint_epochs: int = 150
    joint_lr: float = 0.005
    variant: str = CHGNN
    rng_seed: int = 0
    activation: str = "relu"
    auto_balance: bool = False
    pretrain_alphas: tuple[float, float, float, float] | None = None
    joint_alphas: tuple[float, float, float, float] | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ClusteringError(f"unknown variant {self.variant!r}")
        if self.k < 1:
            raise ClusterCountError(f"k must be positive, got {self.k}")
        if self.pretrain_epochs < 1 or self.joint_epochs < 1:
            raise ClusteringError("epoch counts must be positive")
        for alphas in (self.pretrain_alphas, self.joint_alphas):
            if alphas is not None and (len(alphas) != 4 or any(a < 0 for a in alphas)):
                raise ClusteringError("alpha overrides must be 4 non-negative weights")

    @property
    def ladder(self) -> DimLadder:
        return DimLadder(self.f0, self.f1, self.f2)

    def resolved_pretrain_alphas(self) -> tuple[float, float, float, float]:
        return self.pretrain_alphas or PRETRAIN_ALPHAS[self.variant]

    def resolved_joint_alphas(self) -> tuple[float, float, float, float]:
        return self.joint_alphas or JOINT_ALPHAS[self.variant]

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "f0": self.f0, "f1": self.f1, "f2": self.f2,
            "pretrain_epochs": self.pretrain_epochs, "pretrain_lr": self.pretrain_lr,
            "joint_epochs": self.joint_epochs, "joint_lr": self.joint_lr,
            "variant": self.variant, "rng_seed": self.rng_seed,
            "activation": self.activation, "auto_balance": self.auto_balance,
            "pretrain_alphas": list(self.resolved_pretrain_alphas()),
            "joint_alphas": list(self.resolved_joint_alphas()),
        }


def init_centers(h2: np.ndarray, seeds: SeedList, graph: HeteroGraph,
                 rng: np.random.Generator) -> np.ndarray:
    """Seed-set means when seeds exist, else D-squared weighted sampling."""
    if seeds.has_seeds:
        for k, group in enumerate(seeds.groups):
            if not group:
                raise SeedError(f"seed set {k} is empty while others are not")
        return mdl.seed_selector(graph, seeds.groups) @ h2

    n = h2.shape[0]
    chosen = [int(rng.integers(n))]
    while len(chosen) < seeds.k:
        d2 = np.min(((h2[:, None, :] - h2[chosen][None, :, :]) ** 2).sum(axis=2), axis=1)
        total = float(d2.sum())
        if total == 0.0:
            chosen.append(int(rng.integers(n)))
        else:
            chosen.append(int(rng.choice(n, p=d2 / total)))
    return h2[chosen].copy()


def assign_clusters(h2: np.ndarray, C: np.ndarray, seeds: SeedList,
                    graph: HeteroGraph) -> np.ndarray:
    """Nearest-center one-hot rows; ties to the lowest index; seeds pinned."""
    d2 = ((h2[:, None, :] - C[None, :, :]) ** 2).sum(axis=2)
    best = np.argmin(d2, axis=1)
    M = np.zeros((h2.shape[0], C.shape[0]))
    M[np.arange(h2.shape[0]), best] = 1.0
    for k, group in enumerate(seeds.groups):
        for nid in group:
            v = graph.index[nid]
            M[v, :] = 0.0
            M[v, k] = 1.0
    return M


def update_centers(h2: np.ndarray, M: np.ndarray) -> np.ndarray:
    """Member means; an emptied cluster's center jumps to the node farthest
    from its own cluster's new center, distinct nodes for distinct repairs."""
    counts = M.sum(axis=0)
    C = np.zeros((M.shape[1], h2.shape[1]))
    nonempty = counts > 0
    C[nonempty] = (M.T @ h2)[nonempty] / counts[nonempty, None]

    if not np.all(nonempty):
        assigned = np.argmax(M, axis=1)
        dist = ((h2 - C[assigned]) ** 2).sum(axis=1)
        order = np.argsort(-dist, kind="stable")
        used: set[int] = set()
        for k in np.flatnonzero(~nonempty):
            pick = next(int(v) for v in order if int(v) not in used)
            used.add(pick)
            C[k] = h2[pick]
    return C


def empty_cluster_count(M: np.ndarray) -> int:
    return int(np.sum(M.sum(axis=0) == 0))


def clustering_cost(h2: np.ndarray, M: np.ndarray, C: np.ndarray) -> float:
    return float(np.sum((h2 - M @ C) ** 2))


@dataclass(frozen=True)
class TrainEvent:
    """Per-epoch progress snapshot handed to the training callback."""

    phase: str                     # "pretrain" | "joint"
    epoch: int                     # 1-based within the phase
    losses: LossBreakdown
    M: np.ndarray | None           # copy of the assignment, joint phase only
    edge_grad_norm: float
    lloyd_costs: tuple[float | None, float, float] | None = None
    # (before assignment, after assignment, after center update), all
    # measured on the same embeddings; first entry None on the first epoch.


@dataclass
class ClusteringResult:
    partition: dict[str, int]
    assignment: Assignment
    history: list[LossBreakdown]
    diagnostics: dict
    config: TrainConfig
    seeds: SeedList

    def to_dict(self) -> dict:
        return {
            "partition": dict(self.partition),
            "loss_history": [lb.to_dict() for lb in self.history],
            "config": self.config.to_dict(),
            "seeds": self.seeds.to_lists(),
            "diagnostics": {
                k: v for k, v in self.diagnostics.items()
                if k in ("center_repairs", "pretrain_final_total", "joint_final_total")
            },
        }


def _balance(defaults: tuple[float, ...], losses: LossBreakdown) -> tuple[float, ...]:
    """Rescale the nonzero default weights so components contribute equally.

    Falls back to the defaults when a weighted component starts at zero,
    where equal contribution is unattainable.
    """
    values = (losses.node_recon, losses.edge_recon, losses.link_recon,
              losses.clustering + losses.seed_separation)
    active = [i for i, a in enumerate(defaults) if a > 0]
    if any(abs(values[i]) < 1e-12 for i in active):
        return defaults
    mass = sum(defaults[i] for i in active)
    inv = {i: 1.0 / abs(values[i]) for i in active}
    scale = mass / sum(inv.values())
    return tuple(scale * inv[i] if i in active else 0.0 for i in range(4))


def train(graph: HeteroGraph, attrs: AttributeSet, config: TrainConfig,
          seeds: SeedList, callback: Callable[[TrainEvent], None] | None = None,
          ) -> ClusteringResult:
    """Run both phases and return the final partition with its history."""
    if config.k > graph.n_nodes:
        raise ClusterCountError(f"k={config.k} exceeds the {graph.n_nodes}-node graph")
    if seeds.k != config.k:
        raise SeedError(f"seed list has {seeds.k} sets but k={config.k}")
    seeds.validate_against(graph)

    master = np.random.SeedSequence(config.rng_seed)
    params_seed, kmeans_seed = master.spawn(2)
    rng = np.random.default_rng(kmeans_seed)

    wiring = GraphWiring.build(graph, attrs, config.variant)
    params = ModelParams.init(attrs.d_program, attrs.d_resource, config.ladder,
                              config.variant, params_seed)
    sel = mdl.seed_selector(graph, seeds.groups) if seeds.has_seeds else None

    history: list[LossBreakdown] = []
    edge_norms: list[float] = []
    repairs_total = 0

    def one_epoch(phase, epoch, alphas, M, C, adam):
        try:
            tape, tensors = mdl.build_loss_tape(wiring, params, alphas, M, C, sel,
                                                config.activation)
            losses = LossBreakdown(
                node_recon=tensors["node_recon"].item(),
                edge_recon=tensors["edge_recon"].item(),
                link_recon=tensors["link_recon"].item(),
                clustering=tensors["clustering"].item(),
                seed_separation=tensors["seed_separation"].item(),
                alphas=tuple(float(a) for a in alphas),
            )
            grads = tape.backward(tensors["total"])
            params.weights, _ = adam_step(params.weights, grads, adam)
        except FloatingPointError:
            raise DivergenceError(phase, epoch) from None
        norm = mdl.edge_recon_grad_norm(grads, config.variant)
        edge_norms.append(norm)
        history.append(losses)
        return losses, norm

    # Phase 1: reconstruction-only pre-training.
    alphas_p = config.resolved_pretrain_alphas()
    adam = AdamState.init(params.weights, lr=config.pretrain_lr)
    for epoch in range(1, config.pretrain_epochs + 1):
        losses, norm = one_epoch("pretrain", epoch, alphas_p, None, None, adam)
        if config.auto_balance and epoch == 1:
            alphas_p = _balance(alphas_p, losses)
        if callback:
            callback(TrainEvent("pretrain", epoch, losses, None, norm))

    def embeddings(epoch: int) -> np.ndarray:
        try:
            return mdl.forward_arrays(wiring, params, config.activation).h2
        except FloatingPointError:
            raise DivergenceError("joint", epoch) from None

    C = init_centers(embeddings(0), seeds, graph, rng)
    M = None

    # Phase 2: alternate Lloyd steps with optimizer epochs on the full loss.
    alphas_j = config.resolved_joint_alphas()
    adam = AdamState.init(params.weights, lr=config.joint_lr)
    for epoch in range(1, config.joint_epochs + 1):
        h2 = embeddings(epoch)
        before = clustering_cost(h2, M, C) if M is not None else None
        M = assign_clusters(h2, C, seeds, graph)
        after_assign = clustering_cost(h2, M, C)
        repairs_total += empty_cluster_count(M)
        C = update_centers(h2, M)
        after_update = clustering_cost(h2, M, C)

        losses, norm = one_epoch("joint", epoch, alphas_j, M, C, adam)
        if config.auto_balance and epoch == 1:
            alphas_j = _balance(alphas_j, losses)
        if callback:
            callback(TrainEvent("joint", epoch, losses, M.copy(), norm,
                                (before, after_assign, after_update)))

    partition = {nid: int(np.argmax(M[graph.index[nid]])) for nid in graph.ids}
    diagnostics = {
        "edge_grad_norms": edge_norms,
        "center_repairs": repairs_total,
        "pretrain_final_total": history[config.pretrain_epochs - 1].total,
        "joint_final_total": history[-1].total,
    }
    return ClusteringResult(partition, Assignment(M, C), history, diagnostics,
                            config, seeds)
