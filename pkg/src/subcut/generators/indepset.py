"""
Maximum independent set instances on Erdos-Renyi graphs
"""

from typing import Any, Dict

import networkx as nx
import numpy as np

from ..errors import GeneratorError
from ..milp import MilpInstance
from .base import InstanceGenerator


def generate_max_indep_set(nodes: int, edge_prob: float, seed: int) -> MilpInstance:
    """
    min -sum x_u  s.t.  -x_u - x_v >= -1 per edge, -x_u >= -1 per node.

    Edge rows come first, in sorted edge order, then the per-node bounds.
    edge_prob = 1 gives the complete graph.
    """
    if nodes < 2:
        raise GeneratorError(f"nodes must be at least 2, got {nodes}")
    if not 0.0 < edge_prob <= 1.0:
        raise GeneratorError(f"edge_prob must lie in (0, 1], got {edge_prob}")

    graph = nx.gnp_random_graph(nodes, edge_prob, seed=seed)
    edges = sorted(tuple(sorted(edge)) for edge in graph.edges())

    A = np.zeros((len(edges) + nodes, nodes))
    for row, (u, v) in enumerate(edges):
        A[row, u] = A[row, v] = -1.0
    A[len(edges) :] = -np.eye(nodes)

    return MilpInstance(
        name=f"indepset-{nodes}-p{edge_prob:g}-s{seed}",
        A=A,
        G=np.zeros((A.shape[0], 0)),
        b=-np.ones(A.shape[0]),
        c=-np.ones(nodes),
        h=np.zeros(0),
    )


class IndependentSetGenerator(InstanceGenerator):
    @property
    def name(self) -> str:
        return "indepset"

    @property
    def parameters(self) -> Dict[str, Any]:
        return {"nodes": 10, "edge_prob": 0.5}

    def build(self, seed: int, **params) -> MilpInstance:
        return generate_max_indep_set(int(params["nodes"]), float(params["edge_prob"]), seed)
