"""Driving the HTTP service end to end from a client's point of view.

Boots the service in-process, uploads a facts document, launches a training
run, polls its progress, and reads back the partition with its sunburst
tree, exactly as the browser workbench does.
"""

import json
import tempfile
import time

from fastapi.testclient import TestClient

from chimera.facts import facts_to_json
from chimera.service import create_app
from chimera.synth import SynthSpec, generate

facts, truth, seeds = generate(
    SynthSpec(k=3, programs_per_cluster=5, resources_per_cluster=1,
              entrypoints_per_cluster=2, rng_seed=2))

with TestClient(create_app(tempfile.mkdtemp())) as client:
    inventory = client.post("/graphs",
                            content=json.dumps(facts_to_json(facts))).json()
    print("uploaded graph", inventory["graph_id"], inventory["counts"])

    body = {
        "graph_id": inventory["graph_id"],
        "k": 3,
        "seeds": seeds.to_lists(),
        "variant": "chgnn",
        "overrides": {"f0": 48, "f1": 24, "f2": 12, "pretrain_epochs": 80,
                      "joint_epochs": 80, "activation": "tanh", "rng_seed": 2},
    }
    run_id = client.post("/runs", json=body).json()["run_id"]
    print("launched run", run_id)

    while True:
        snap = client.get(f"/runs/{run_id}").json()
        print(f"  status {snap['status']:8s} "
              f"epochs logged {len(snap.get('loss_history', []))}")
        if snap["status"] in ("done", "failed"):
            break
        time.sleep(0.25)

    print("\nmetrics:", {k: round(v, 4) for k, v in snap["metrics"].items()})
    print("partition sizes:", sorted(
        list(snap["partition"].values()).count(c) for c in range(3)))

    tree = snap["sunburst"]
    print("\nsunburst (resources carry the -res suffix):")
    for arc in tree["children"]:
        names = [leaf["name"] for leaf in arc["children"]]
        print(f"  {arc['name']}: {', '.join(sorted(names))}")

    listing = client.get("/runs").json()["runs"]
    print("\nrun registry now holds", len(listing), "run(s)")
