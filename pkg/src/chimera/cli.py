"""Command-line entrypoints for the partitioning pipeline.

Subcommands: build-graph, train, evaluate, generate, export-sunburst, serve.
Failures print a machine-readable {"code", "message"} object to stderr and
exit nonzero.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .clustering import ClusteringError, DivergenceError, SeedList, TrainConfig
from .facts import FactsError, build_graph, facts_to_json, parse_facts
from .metrics import MetricsError, Partition, summarize
from .pipeline import graph_fingerprint, graph_inventory, run_pipeline, sunburst_tree
from .synth import SynthError, SynthSpec, generate, sidecar_json


def _emit(doc: dict, out: str | None):
    text = json.dumps(doc, indent=1, sort_keys=True)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _load_facts(path: str):
    return parse_facts(Path(path).read_bytes())


def _load_seeds(path: str | None, k: int) -> SeedList:
    if path is None:
        return SeedList.empty(k)
    doc = json.loads(Path(path).read_text())
    if isinstance(doc, dict):     # accept the generate sidecar as-is
        doc = doc["seeds"]
    return SeedList.from_lists(doc)


def _load_partition(path: str) -> Partition:
    doc = json.loads(Path(path).read_text())
    if isinstance(doc, dict) and isinstance(doc.get("partition"), dict):
        doc = doc["partition"]   # accept a train results file as-is
    return Partition.from_mapping({k: int(v) for k, v in doc.items()})


def cmd_build_graph(args) -> int:
    facts = _load_facts(args.facts)
    graph = build_graph(facts)
    _emit(graph_inventory(graph_fingerprint(facts), facts, graph), args.out)
    return 0


def cmd_train(args) -> int:
    facts = _load_facts(args.facts)
    config = TrainConfig(
        k=args.k, variant=args.variant, rng_seed=args.rng,
        f0=args.f0, f1=args.f1, f2=args.f2,
        pretrain_epochs=args.pretrain_epochs, joint_epochs=args.joint_epochs,
        pretrain_lr=args.pretrain_lr, joint_lr=args.joint_lr,
        activation=args.activation, auto_balance=args.auto_balance,
    )
    seeds = _load_seeds(args.seeds, args.k)
    payload = run_pipeline(facts, config, seeds)
    _emit(payload, args.out)
    return 0


def cmd_evaluate(args) -> int:
    facts = _load_facts(args.facts)
    graph = build_graph(facts)
    p = _load_partition(args.partition)
    notes: list[str] = []
    scores = summarize(graph, facts, p, ned_bounds=(args.ned_lo, args.ned_hi),
                       ned_basis=args.ned_basis, diagnostics=notes)
    doc = {"metrics": scores}
    if notes:
        doc["diagnostics"] = notes
    _emit(doc, args.out)
    return 0


def cmd_generate(args) -> int:
    spec = SynthSpec(
        k=args.k, programs_per_cluster=args.programs_per_cluster,
        resources_per_cluster=args.resources_per_cluster,
        p_in=args.p_in, p_out=args.p_out,
        entrypoints_per_cluster=args.entrypoints_per_cluster,
        trace_len=(args.trace_lo, args.trace_hi),
        seeds_per_cluster=args.seeds_per_cluster, rng_seed=args.rng,
    )
    facts, truth, seeds = generate(spec)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    facts_path = out_dir / "facts.json"
    truth_path = out_dir / "truth.json"
    facts_path.write_text(json.dumps(facts_to_json(facts), indent=1) + "\n")
    truth_path.write_text(json.dumps(sidecar_json(truth, seeds), indent=1) + "\n")
    print(json.dumps({"facts": str(facts_path), "truth": str(truth_path)}))
    return 0


def cmd_export_sunburst(args) -> int:
    facts = _load_facts(args.facts)
    graph = build_graph(facts)
    p = _load_partition(args.result)
    _emit(sunburst_tree(p, graph), args.out)
    return 0


def cmd_serve(args) -> int:
    from .service import serve
    serve(host=args.host, port=args.port, data_dir=args.data_dir)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chimera",
        description="Recommend microservice partitions for a monolith "
                    "from its static-analysis facts.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-graph", help="validate facts and print the graph inventory")
    p.add_argument("--facts", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_build_graph)

    p = sub.add_parser("train", help="run the full pipeline and write results JSON")
    p.add_argument("--facts", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--seeds", help="JSON list of K id lists, or a generate sidecar")
    p.add_argument("--variant", default="chgnn",
                   choices=["chgnn", "chgnn-el", "hetgcnconv"])
    p.add_argument("--rng", type=int, default=0)
    p.add_argument("--f0", type=int, default=128)
    p.add_argument("--f1", type=int, default=64)
    p.add_argument("--f2", type=int, default=32)
    p.add_argument("--pretrain-epochs", type=int, default=150)
    p.add_argument("--joint-epochs", type=int, default=150)
    p.add_argument("--pretrain-lr", type=float, default=0.01)
    p.add_argument("--joint-lr", type=float, default=0.005)
    p.add_argument("--activation", default="relu",
                   choices=["relu", "tanh", "sigmoid", "identity"])
    p.add_argument("--auto-balance", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="score an existing partition")
    p.add_argument("--facts", required=True)
    p.add_argument("--partition", required=True,
                   help="JSON {id: cluster} map, or a train results file")
    p.add_argument("--ned-lo", type=int, default=5)
    p.add_argument("--ned-hi", type=int, default=20)
    p.add_argument("--ned-basis", default="all-nodes",
                   choices=["all-nodes", "programs-only"])
    p.add_argument("--out")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("generate", help="write a planted-partition fixture")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--programs-per-cluster", type=int, default=15)
    p.add_argument("--resources-per-cluster", type=int, default=2)
    p.add_argument("--p-in", type=float, default=0.3)
    p.add_argument("--p-out", type=float, default=0.02)
    p.add_argument("--entrypoints-per-cluster", type=int, default=6)
    p.add_argument("--trace-lo", type=int, default=3)
    p.add_argument("--trace-hi", type=int, default=8)
    p.add_argument("--seeds-per-cluster", type=int, default=1)
    p.add_argument("--rng", type=int, default=0)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("export-sunburst", help="convert results JSON to a sunburst tree")
    p.add_argument("--facts", required=True)
    p.add_argument("--result", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_export_sunburst)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--data-dir", default=None)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (FactsError, ClusteringError, MetricsError, SynthError) as exc:
        code = getattr(exc, "code", type(exc).__name__)
        print(json.dumps({"code": code, "message": str(exc)}), file=sys.stderr)
        return 1
    except DivergenceError as exc:
        print(json.dumps({"code": "divergence", "message": str(exc)}), file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        print(json.dumps({"code": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
