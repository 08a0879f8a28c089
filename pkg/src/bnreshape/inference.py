"""Exact posteriors under likelihood (virtual) evidence by full enumeration."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import EvidenceError
from .network import JointTable, Network, full_joint, marginal_over


@dataclass(frozen=True)
class Evidence:
    """Likelihood vector per observed node. Vectors need not be normalized."""

    entries: Mapping[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        entries = {}
        for node_id, values in dict(self.entries).items():
            vec = np.array(values, dtype=np.float64)
            if vec.ndim != 1:
                raise EvidenceError(f"likelihood for {node_id!r} must be a vector")
            if not np.all(np.isfinite(vec)) or np.any(vec < 0):
                raise EvidenceError(f"likelihood for {node_id!r} must be finite and nonnegative")
            if not np.any(vec > 0):
                raise EvidenceError(f"likelihood for {node_id!r} has no positive entry")
            vec.setflags(write=False)
            entries[node_id] = vec
        object.__setattr__(self, "entries", entries)

    def __bool__(self):
        return bool(self.entries)

    def check(self, net: Network) -> None:
        for node_id, vec in self.entries.items():
            if node_id not in net:
                raise EvidenceError(f"evidence on unknown node {node_id!r}")
            if len(vec) != net.card(node_id):
                raise EvidenceError(
                    f"likelihood for {node_id!r} has {len(vec)} entries, node has {net.card(node_id)} states")


PosteriorSet = dict[str, np.ndarray]


def weighted_joint(net: Network, ev: Evidence) -> JointTable:
    """Full joint times every likelihood vector, left unnormalized."""
    ev.check(net)
    joint = full_joint(net)
    table = np.array(joint.table)
    for node_id, vec in ev.entries.items():
        axis = joint.variables.index(node_id)
        shape = [1] * table.ndim
        shape[axis] = len(vec)
        table = table * vec.reshape(shape)
    return JointTable(joint.variables, joint.spaces, table, normalized=not ev)


def evidence_probability(net: Network, ev: Evidence) -> float:
    """Sum over full assignments of joint probability times the likelihoods."""
    return weighted_joint(net, ev).total()


def posterior_marginals(net: Network, ev: Evidence | None = None) -> PosteriorSet:
    ev = ev if ev is not None else Evidence()
    weighted = weighted_joint(net, ev)
    z = weighted.total()
    if z <= 0.0:
        raise EvidenceError("evidence has zero probability under the network")
    out: PosteriorSet = {}
    for node_id in net.ids:
        marginal = np.array(marginal_over(weighted, [node_id]).table) / z
        marginal.setflags(write=False)
        out[node_id] = marginal
    return out
