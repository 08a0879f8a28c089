"""Ground-truth checks by brute-force comparison of joint distributions."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import NetworkError, NotCoarsenable
from .network import CoarseningMap, Network, full_joint, marginal_over

EXACT_TOL = 1e-9


@dataclass(frozen=True)
class EquivalenceResult:
    """``max_diff`` is the largest cell difference; ``l1`` the summed one.

    Only ``l1`` shrinks under further marginalization, so compare subsets
    with it rather than with ``max_diff``.
    """

    max_diff: float
    assignment: dict | None
    variables: tuple[str, ...]
    l1: float = 0.0

    def within(self, tol: float) -> bool:
        return self.max_diff <= tol


def joint_equivalence(
    net_a: Network,
    net_b: Network,
    vars: Sequence[str],
    rename: Mapping[str, str] | None = None,
) -> EquivalenceResult:
    """Max absolute cell difference between the two marginals over ``vars``.

    ``vars`` are ids in ``net_a``; ``rename`` maps them to ids in ``net_b``.
    """
    rename = dict(rename or {})
    vars = tuple(vars)
    b_vars = tuple(rename.get(v, v) for v in vars)
    for va, vb in zip(vars, b_vars):
        if net_a.states(va) != net_b.states(vb):
            raise NetworkError(
                f"state spaces differ for {va}/{vb}: {net_a.states(va).labels} vs {net_b.states(vb).labels}")
    ma = marginal_over(full_joint(net_a), vars).table
    mb = marginal_over(full_joint(net_b), b_vars).table
    diff = np.abs(ma - mb)
    worst = float(diff.max()) if diff.size else 0.0
    assignment = None
    if worst > 0.0:
        idx = np.unravel_index(int(np.argmax(diff)), diff.shape)
        assignment = {v: net_a.states(v).labels[i] for v, i in zip(vars, idx)}
    return EquivalenceResult(worst, assignment, vars, float(diff.sum()))


def others(net: Network, node_id: str) -> tuple[str, ...]:
    """Every node id except ``node_id``."""
    net.node(node_id)
    return tuple(v for v in net.ids if v != node_id)


def pair_maps(net: Network, node_id: str) -> list[CoarseningMap]:
    """Every coarsening that merges exactly two states, in label order."""
    space = net.states(node_id)
    maps = []
    for a, b in itertools.combinations(space.labels, 2):
        merged = f"{a}+{b}"
        while merged in space:
            merged += "'"
        maps.append(CoarseningMap.build(space, {merged: (a, b)}))
    return maps


def is_irreducible(net: Network, node_id: str, tol: float = EXACT_TOL) -> tuple[bool, list[CoarseningMap]]:
    """Search all pairwise merges for ones that coarsen exactly.

    A merge qualifies when every candidate successor row agrees within
    ``tol`` and the coarsened network keeps the joint over all other nodes
    within ``tol``. Larger merges are not searched.
    """
    from .internal import internal_coarsen

    found = []
    for cmap in pair_maps(net, node_id):
        try:
            internal_coarsen(net, node_id, cmap, mode="exact", tol=tol)
        except NotCoarsenable:
            continue
        found.append(cmap)
    return (not found, found)
