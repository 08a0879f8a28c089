"""External refinement and coarsening.

A child carrying the new state space is hung below the target, then the
target is eliminated by arc reversal. The joint over every other original
node is untouched, at the price of extra arcs from the target's parents
into its former successors.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import MappingError, NetworkError
from .graph_ops import eliminate_node
from .network import (
    ROW_TOL,
    CoarseningMap,
    Cpt,
    Network,
    NodeDef,
    RefinementMap,
    require_valid,
)


@dataclass(frozen=True)
class SplitSpec:
    """Relative weights of the refined states inside each old state.

    ``weights`` maps old state -> weights over its image (in image order) and
    applies to every parent configuration. ``per_parent`` holds one such map
    per row of the target's CPT. Old states with a single image may be left
    out (weight 1).
    """

    weights: Mapping[str, Sequence[float]] | None = None
    per_parent: Sequence[Mapping[str, Sequence[float]]] | None = None

    def __post_init__(self):
        if (self.weights is None) == (self.per_parent is None):
            raise MappingError("a split is either global (weights) or per_parent, not both")

    @property
    def is_global(self) -> bool:
        return self.weights is not None

    @staticmethod
    def _matrix(weights: Mapping[str, Sequence[float]], rmap: RefinementMap) -> np.ndarray:
        unknown = set(weights) - set(rmap.old.labels)
        if unknown:
            raise MappingError(f"split names unknown old states {sorted(unknown)}")
        out = np.zeros((len(rmap.old), len(rmap.new)))
        for i, old_label in enumerate(rmap.old):
            image = rmap.assignment[old_label]
            if old_label in weights:
                w = np.asarray(weights[old_label], dtype=np.float64)
            elif len(image) == 1:
                w = np.ones(1)
            else:
                raise MappingError(f"no split weights for refined state {old_label!r}")
            if w.shape != (len(image),):
                raise MappingError(f"split for {old_label!r} needs {len(image)} weights, got {w.tolist()}")
            if np.any(w < 0) or abs(w.sum() - 1.0) > ROW_TOL:
                raise MappingError(f"split for {old_label!r} must be nonnegative and sum to 1: {w.tolist()}")
            for label, value in zip(image, w):
                out[i, rmap.new.index(label)] = value
        return out

    def matrix(self, rmap: RefinementMap, row: int | None = None) -> np.ndarray:
        """``(|old|, |new|)`` weight matrix, for one CPT row if per-parent."""
        if self.is_global:
            return self._matrix(self.weights, rmap)
        if row is None:
            raise MappingError("per-parent split needs a parent configuration row")
        return self._matrix(self.per_parent[row], rmap)

    def upper(self, old: Cpt, rmap: RefinementMap) -> Cpt:
        """Refined target CPT: each old probability shared out by the weights."""
        rows = old.rows
        if not self.is_global and len(self.per_parent) != rows.shape[0]:
            raise MappingError(f"per-parent split has {len(self.per_parent)} rows, CPT has {rows.shape[0]}")
        out = np.stack([rows[r] @ self.matrix(rmap, None if self.is_global else r)
                        for r in range(rows.shape[0])])
        return Cpt(out)


def _check_target(net: Network, target: str, old_space, new_id: str) -> None:
    require_valid(net)
    if net.states(target) != old_space:
        raise MappingError(
            f"map is defined over {old_space.labels}, {target} has {net.states(target).labels}")
    if new_id in net:
        raise NetworkError(f"node id {new_id!r} already exists")


def _replace_via_child(net: Network, target: str, child: NodeDef) -> Network:
    # the new child is reversed first so it only inherits the target's parents
    return eliminate_node(net.insert_after(target, child), target, order=[child.id])


def external_refine(
    net: Network, target: str, rmap: RefinementMap, split: SplitSpec, new_id: str
) -> Network:
    """Replace ``target`` by ``new_id`` carrying the refined state space."""
    _check_target(net, target, rmap.old, new_id)
    if not split.is_global:
        raise MappingError("the external operation applies one split to every parent configuration")
    child = NodeDef(new_id, rmap.new, (target,), Cpt(split.matrix(rmap)))
    return _replace_via_child(net, target, child)


def external_coarsen(net: Network, target: str, cmap: CoarseningMap, new_id: str) -> Network:
    """Replace ``target`` by ``new_id`` carrying the coarsened state space."""
    _check_target(net, target, cmap.old, new_id)
    child = NodeDef(new_id, cmap.new, (target,), Cpt(cmap.indicator()))
    return _replace_via_child(net, target, child)
