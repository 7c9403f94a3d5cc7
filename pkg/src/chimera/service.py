"""HTTP service: graph upload, run launch, progress polling, results.

Training is long-running, so POST /runs only queues work; a bounded worker
pool (one worker by default, FIFO) executes runs in the background while
GET /runs/{id} serves the loss curve accumulated so far. Graphs and runs
persist as flat JSON files under the data directory.
"""

from __future__ import annotations

import json
import os
import threading
import time
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .clustering import ClusteringError, SeedError, SeedList, TrainConfig, train
from .facts import FactsError, build_attributes, build_graph, facts_to_json, parse_facts
from .pipeline import finish_result, graph_fingerprint, graph_inventory

DEFAULT_PORT = 8080
DEFAULT_DATA_DIR = "chimera_data"

# TrainConfig fields settable through the POST /runs "overrides" object
OVERRIDE_FIELDS = frozenset({
    "f0", "f1", "f2", "pretrain_epochs", "pretrain_lr", "joint_epochs",
    "joint_lr", "rng_seed", "activation", "auto_balance",
    "pretrain_alphas", "joint_alphas",
})

QUEUED, RUNNING, DONE, FAILED = "queued", "running", "done", "failed"


class ApiError(Exception):
    """Carried to the JSON error handler as {code, message, path}."""

    def __init__(self, status: int, code: str, message: str, path: str):
        self.status = status
        self.code = code
        self.message = message
        self.path = path
        super().__init__(message)


@dataclass
class RunRecord:
    run_id: str
    graph_id: str
    config: TrainConfig
    seeds: SeedList
    status: str = QUEUED
    created_at: float = field(default_factory=time.time)
    loss_history: list[dict] = field(default_factory=list)
    result: dict | None = None
    error: dict | None = None

    def brief(self) -> dict:
        return {
            "run_id": self.run_id,
            "graph_id": self.graph_id,
            "status": self.status,
            "k": self.config.k,
            "variant": self.config.variant,
            "created_at": self.created_at,
        }

    def snapshot(self) -> dict:
        out = self.brief()
        out["config"] = self.config.to_dict()
        out["seeds"] = self.seeds.to_lists()
        if self.status == DONE:
            # the completed payload owns the authoritative loss history
            out.update(self.result)
        else:
            out["loss_history"] = list(self.loss_history)
        if self.error is not None:
            out["error"] = self.error
        return out


class Store:
    """Lock-guarded registry of graphs and runs, mirrored to flat JSON files."""

    def __init__(self, data_dir: Path):
        self.graphs_dir = data_dir / "graphs"
        self.runs_dir = data_dir / "runs"
        self.graphs_dir.mkdir(parents=True, exist_ok=True)
        self.runs_dir.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._graphs: dict[str, dict] = {}
        self._runs: dict[str, RunRecord] = {}
        self._load()

    def _load(self):
        for path in self.graphs_dir.glob("*.json"):
            self._graphs[path.stem] = json.loads(path.read_text())
        for path in self.runs_dir.glob("*.json"):
            doc = json.loads(path.read_text())
            cfg = dict(doc["config"])
            for key in ("pretrain_alphas", "joint_alphas"):
                if cfg.get(key) is not None:
                    cfg[key] = tuple(cfg[key])
            record = RunRecord(
                run_id=doc["run_id"], graph_id=doc["graph_id"],
                config=TrainConfig(**cfg),
                seeds=SeedList.from_lists(doc["seeds"]),
                status=doc["status"], created_at=doc.get("created_at", 0.0),
                loss_history=doc.get("loss_history", []),
                result={k: v for k, v in doc.items()
                        if k in ("partition", "metrics", "sunburst",
                                 "loss_history", "diagnostics")}
                if doc["status"] == DONE else None,
                error=doc.get("error"),
            )
            if record.status in (QUEUED, RUNNING):
                # a previous process died mid-run; results are unrecoverable
                record.status = FAILED
                record.error = {"code": "interrupted",
                                "message": "service stopped before the run finished"}
                self._persist_run(record)
            self._runs[record.run_id] = record

    def _write(self, path: Path, doc: dict):
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(doc, indent=1, sort_keys=True))
        tmp.replace(path)

    def _persist_run(self, record: RunRecord):
        self._write(self.runs_dir / f"{record.run_id}.json", record.snapshot())

    # graphs

    def put_graph(self, graph_id: str, doc: dict):
        with self._lock:
            if graph_id not in self._graphs:
                self._graphs[graph_id] = doc
                self._write(self.graphs_dir / f"{graph_id}.json", doc)

    def graph_doc(self, graph_id: str) -> dict | None:
        with self._lock:
            return self._graphs.get(graph_id)

    # runs

    def add_run(self, record: RunRecord):
        with self._lock:
            self._runs[record.run_id] = record
            self._persist_run(record)

    def get_run(self, run_id: str) -> dict | None:
        with self._lock:
            record = self._runs.get(run_id)
            return None if record is None else record.snapshot()

    def list_runs(self) -> list[dict]:
        with self._lock:
            records = sorted(self._runs.values(), key=lambda r: r.created_at)
            return [r.brief() for r in records]

    def mark_running(self, record: RunRecord):
        with self._lock:
            record.status = RUNNING
            self._persist_run(record)

    def append_loss(self, record: RunRecord, losses: dict):
        with self._lock:
            record.loss_history.append(losses)

    def finish(self, record: RunRecord, payload: dict):
        with self._lock:
            record.result = payload
            record.status = DONE
            self._persist_run(record)

    def fail(self, record: RunRecord, code: str, message: str):
        with self._lock:
            record.error = {"code": code, "message": message}
            record.status = FAILED
            self._persist_run(record)


def execute_run(store: Store, record: RunRecord):
    """Worker-pool body: train, score, attach the sunburst."""
    store.mark_running(record)
    try:
        doc = store.graph_doc(record.graph_id)
        facts = parse_facts(json.dumps(doc))
        graph = build_graph(facts)
        attrs = build_attributes(facts, graph)
        result = train(
            graph, attrs, record.config, record.seeds,
            callback=lambda event: store.append_loss(record, event.losses.to_dict()))
        store.finish(record, finish_result(result, graph, facts))
    except Exception as exc:   # a failed run must never take the worker down
        store.fail(record, type(exc).__name__, str(exc))


def _parse_run_request(data: dict, store: Store) -> tuple[str, TrainConfig, SeedList]:
    path = "/runs"
    if not isinstance(data, dict):
        raise ApiError(400, "invalid-body", "request body must be a JSON object", path)
    graph_id = data.get("graph_id")
    if not isinstance(graph_id, str) or not graph_id:
        raise ApiError(400, "missing-graph-id", "graph_id is required", path)
    doc = store.graph_doc(graph_id)
    if doc is None:
        raise ApiError(404, "unknown-graph", f"no graph with id {graph_id!r}", path)

    k = data.get("k")
    if not isinstance(k, int) or isinstance(k, bool) or k < 1:
        raise ApiError(400, "invalid-k", "k must be a positive integer", path)

    overrides = data.get("overrides") or {}
    if not isinstance(overrides, dict):
        raise ApiError(400, "invalid-overrides", "overrides must be an object", path)
    unknown = set(overrides) - OVERRIDE_FIELDS
    if unknown:
        raise ApiError(400, "unknown-override",
                       f"unknown override field(s): {', '.join(sorted(unknown))}", path)
    for key in ("pretrain_alphas", "joint_alphas"):
        if overrides.get(key) is not None:
            overrides[key] = tuple(overrides[key])
    try:
        config = TrainConfig(k=k, variant=data.get("variant", "chgnn"), **overrides)
    except ClusteringError as exc:
        raise ApiError(400, "invalid-config", str(exc), path) from None

    graph = build_graph(parse_facts(json.dumps(doc)))
    if k > graph.n_nodes:
        raise ApiError(422, "k-exceeds-nodes",
                       f"k={k} exceeds the {graph.n_nodes}-node graph", path)

    raw_seeds = data.get("seeds")
    if raw_seeds in (None, []):
        seeds = SeedList.empty(k)
    else:
        well_formed = (isinstance(raw_seeds, list)
                       and all(isinstance(g, list) for g in raw_seeds)
                       and all(isinstance(s, str) for g in raw_seeds for s in g))
        if not well_formed:
            raise ApiError(400, "invalid-seeds",
                           "seeds must be a list of lists of node ids", path)
        try:
            seeds = SeedList.from_lists(raw_seeds)
        except SeedError as exc:
            raise ApiError(400, "invalid-seeds", str(exc), path) from None
    if seeds.k != k:
        raise ApiError(400, "seed-count-mismatch",
                       f"seed list has {seeds.k} sets but k={k}", path)
    known = set(graph.ids)
    missing = sorted({sid for group in seeds.groups for sid in group} - known)
    if missing:
        raise ApiError(409, "seed-not-in-graph",
                       f"seed id(s) not in graph: {', '.join(missing)}", path)
    return graph_id, config, seeds


def create_app(data_dir: str | os.PathLike | None = None) -> FastAPI:
    root = Path(data_dir or os.environ.get("CHIMERA_DATA_DIR", DEFAULT_DATA_DIR))
    store = Store(root)
    pool = ThreadPoolExecutor(max_workers=1)
    app = FastAPI(title="chimera")
    app.state.store = store
    app.state.pool = pool

    @app.exception_handler(ApiError)
    async def api_error(request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content={
            "code": exc.code, "message": exc.message, "path": exc.path})

    @app.post("/graphs", status_code=201)
    async def post_graph(request: Request):
        body = await request.body()
        try:
            facts = parse_facts(body)
            graph = build_graph(facts)
        except FactsError as exc:
            raise ApiError(400, exc.code, str(exc), "/graphs") from None
        graph_id = graph_fingerprint(facts)
        store.put_graph(graph_id, facts_to_json(facts))
        return graph_inventory(graph_id, facts, graph)

    @app.get("/graphs/{graph_id}")
    async def get_graph(graph_id: str):
        doc = store.graph_doc(graph_id)
        if doc is None:
            raise ApiError(404, "unknown-graph", f"no graph with id {graph_id!r}",
                           f"/graphs/{graph_id}")
        facts = parse_facts(json.dumps(doc))
        return graph_inventory(graph_id, facts, build_graph(facts))

    @app.post("/runs", status_code=202)
    async def post_run(request: Request):
        try:
            data = await request.json()
        except json.JSONDecodeError as exc:
            raise ApiError(400, "invalid-json", str(exc), "/runs") from None
        graph_id, config, seeds = _parse_run_request(data, store)
        record = RunRecord(uuid.uuid4().hex[:12], graph_id, config, seeds)
        store.add_run(record)
        pool.submit(execute_run, store, record)
        # the worker may already have flipped the record to running
        return {"run_id": record.run_id, "status": QUEUED}

    @app.get("/runs")
    async def list_runs():
        return {"runs": store.list_runs()}

    @app.get("/runs/{run_id}")
    async def get_run(run_id: str):
        snapshot = store.get_run(run_id)
        if snapshot is None:
            raise ApiError(404, "unknown-run", f"no run with id {run_id!r}",
                           f"/runs/{run_id}")
        return snapshot

    static = os.environ.get("CHIMERA_STATIC", "")
    if static and Path(static).is_dir():
        app.mount("/", StaticFiles(directory=static, html=True), name="workbench")

    return app


def serve(host: str = "127.0.0.1", port: int | None = None,
          data_dir: str | None = None):
    """Blocking entrypoint used by the CLI serve subcommand."""
    import uvicorn
    if port is None:
        port = int(os.environ.get("CHIMERA_PORT", DEFAULT_PORT))
    uvicorn.run(create_app(data_dir), host=host, port=port)
