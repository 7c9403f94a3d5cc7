"""Shared fixtures: hand-built facts documents and parameter surgeries."""
import json

import numpy as np

from chimera import facts as F
from chimera import model as M


def parse(document: dict) -> F.AppFacts:
    return F.parse_facts(json.dumps(document))


def two_program_doc() -> dict:
    """Two programs, one CALLS edge, one trace covering both."""
    return {
        "programs": ["P1", "P2"],
        "resources": [],
        "calls": [["P1", "P2"]],
        "crud": [],
        "inheritance": [],
        "entrypoints": [{"id": "EP1", "trace": ["P1", "P2"]}],
    }


def single_program_doc() -> dict:
    return {
        "programs": ["P1"],
        "resources": [],
        "calls": [],
        "crud": [],
        "inheritance": [],
        "entrypoints": [{"id": "EP1", "trace": ["P1"]}],
    }


def small_app_doc() -> dict:
    """Six programs, two resources, both edge kinds, three traces."""
    return {
        "programs": ["P0", "P1", "P2", "P3", "P4", "P5"],
        "resources": ["R0", "R1"],
        "calls": [["P0", "P1"], ["P1", "P2"], ["P0", "P2"],
                  ["P3", "P4"], ["P4", "P5"], ["P2", "P3"]],
        "crud": [
            {"program": "P1", "resource": "R0", "ops": ["C", "R"]},
            {"program": "P2", "resource": "R0", "ops": ["R"]},
            {"program": "P4", "resource": "R1", "ops": ["R", "U", "D"]},
        ],
        "inheritance": [["P0", "P5"]],
        "entrypoints": [
            {"id": "EP0", "trace": ["P0", "P1", "P2"]},
            {"id": "EP1", "trace": ["P2", "P3", "P4"]},
            {"id": "EP2", "trace": ["P4", "P5", "P0"]},
        ],
    }


def graph_attrs(document: dict, variant: str = M.CHGNN):
    facts = parse(document)
    graph = F.build_graph(facts)
    attrs = F.build_attributes(facts, graph)
    return facts, graph, attrs


def random_params(graph, attrs, ladder: M.DimLadder, variant: str = M.CHGNN,
                  seed: int = 0) -> M.ModelParams:
    return M.ModelParams.init(attrs.d_program, attrs.d_resource, ladder, variant, seed)


def permute_doc(document: dict, rng: np.random.Generator) -> tuple[dict, list[int], list[int]]:
    """Shuffle program and resource declaration order; ids stay the same.

    Returns the new document plus, for each kind, the list old_of_new where
    new position j holds the declaration formerly at old_of_new[j].
    """
    p_order = list(rng.permutation(len(document["programs"])))
    r_order = list(rng.permutation(len(document["resources"])))
    out = dict(document)
    out["programs"] = [document["programs"][i] for i in p_order]
    out["resources"] = [document["resources"][i] for i in r_order]
    return out, p_order, r_order


def permute_params(params: M.ModelParams, n_ep: int, p_order: list[int]) -> M.ModelParams:
    """Permute attribute-indexed weight columns/rows to match a program reorder.

    Program-indexed attribute columns are the co-occurrence and inheritance
    blocks of the program space and the co-occurrence block of the resource
    space; entrypoint columns are untouched.
    """
    n_p = len(p_order)
    weights = {k: v.copy() for k, v in params.weights.items()}

    def permute_axis(arr, axis, offset):
        idx = [offset + i for i in p_order]
        sl = [slice(None)] * arr.ndim
        sl[axis] = idx
        dst = [slice(None)] * arr.ndim
        dst[axis] = slice(offset, offset + n_p)
        arr[tuple(dst)] = arr[tuple(sl)]

    for key, axis in (("in_program", 1), ("dec_program", 0)):
        permute_axis(weights[key], axis, n_ep)          # co-occurrence block
        permute_axis(weights[key], axis, n_ep + n_p)    # inheritance block
    for key, axis in (("in_resource", 1), ("dec_resource", 0)):
        permute_axis(weights[key], axis, n_ep)
    return M.ModelParams(weights, params.ladder, params.variant,
                         params.d_program, params.d_resource)
