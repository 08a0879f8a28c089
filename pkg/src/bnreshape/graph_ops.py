"""Joint-preserving structural transformations.

Arc reversal and barren-node removal follow the usual influence-diagram
rules; :func:`eliminate_node` chains them to remove any node while keeping
the joint over the remaining nodes intact.
"""
from __future__ import annotations

import logging
from typing import Sequence

import numpy as np

from .errors import NetworkError
from .network import Network, NodeDef, cpt_from_factor, node_factor, require_valid

logger = logging.getLogger(__name__)

REDUNDANCY_TOL = 1e-9


def _require_arc(net: Network, frm: str, to: str) -> None:
    net.node(frm)
    if not net.has_arc(frm, to):
        raise NetworkError(f"no arc {frm} -> {to}")


def _has_indirect_path(net: Network, frm: str, to: str) -> bool:
    stack = [c for c in net.successors(frm) if c != to]
    seen = set(stack)
    while stack:
        current = stack.pop()
        if current == to:
            return True
        for c in net.successors(current):
            if c not in seen:
                seen.add(c)
                stack.append(c)
    return False


def reverse_arc(net: Network, frm: str, to: str) -> Network:
    """Reverse ``frm -> to``.

    ``to`` inherits the parents of ``frm`` and ``frm`` inherits ``to`` plus
    the other parents of ``to``. Where the new marginal of ``to`` is zero the
    conditional of ``frm`` is undefined and gets a uniform row.
    """
    _require_arc(net, frm, to)
    if _has_indirect_path(net, frm, to):
        raise NetworkError(f"reversing {frm} -> {to} would create a cycle")
    a = list(net.parents(frm))
    b = [p for p in net.parents(to) if p != frm]
    union = a + [p for p in b if p not in a]

    # new parent orders; frm's slot in to's parent list is taken by frm's parents
    to_parents: list[str] = []
    for p in net.parents(to):
        for q in (a if p == frm else [p]):
            if q not in to_parents:
                to_parents.append(q)
    frm_parents = a + [to] + [p for p in b if p not in a]

    axis = {v: i for i, v in enumerate(union + [frm, to])}
    local = np.einsum(
        node_factor(net, frm), [axis[p] for p in a] + [axis[frm]],
        node_factor(net, to), [axis[p] for p in net.parents(to)] + [axis[to]],
        list(range(len(axis))),
    )
    frm_axis = len(union)
    to_marginal = local.sum(axis=frm_axis)  # axes: union..., to
    with np.errstate(invalid="ignore", divide="ignore"):
        cond = local / np.expand_dims(to_marginal, frm_axis)
    dead = to_marginal == 0.0
    if np.any(dead):
        logger.info("reverse %s->%s: %d zero-probability rows set uniform", frm, to, int(dead.sum()))
        cond = np.where(np.expand_dims(dead, frm_axis), 1.0 / net.card(frm), cond)

    # to: axes (union..., to) -> (to_parents..., to)
    to_factor = np.transpose(to_marginal, [union.index(p) for p in to_parents] + [len(union)])
    # frm: axes (union..., frm, to) -> (frm_parents..., frm)
    order = [axis[p] for p in frm_parents] + [axis[frm]]
    frm_factor = np.transpose(cond, order)

    old_to, old_frm = net.node(to), net.node(frm)
    out = net.replace_node(NodeDef(to, old_to.states, tuple(to_parents), cpt_from_factor(to_factor)))
    return out.replace_node(NodeDef(frm, old_frm.states, tuple(frm_parents), cpt_from_factor(frm_factor)))


def remove_barren(net: Network, node_id: str) -> Network:
    children = net.successors(node_id)
    if children:
        raise NetworkError(f"{node_id} is not barren; successors {list(children)}")
    return net.without(node_id)


def _next_successor(net: Network, node_id: str, preferred: Sequence[str]) -> str:
    children = net.successors(node_id)
    for p in preferred:
        if p in children:
            return p
    # topological order, declaration order breaking ties
    rank = {v: i for i, v in enumerate(net.topological_order())}
    return min(children, key=rank.__getitem__)


def eliminate_node(net: Network, node_id: str, order: Sequence[str] = ()) -> Network:
    """Reverse every outgoing arc of ``node_id``, then drop it.

    Successors listed in ``order`` are reversed first, in that order; the
    rest follow topological order.
    """
    require_valid(net)
    net.node(node_id)
    current = net
    while current.successors(node_id):
        child = _next_successor(current, node_id, order)
        current = reverse_arc(current, node_id, child)
    return remove_barren(current, node_id)


def _arc_spread(net: Network, frm: str, to: str) -> float:
    _require_arc(net, frm, to)
    factor = node_factor(net, to)
    slices = np.moveaxis(factor, net.parents(to).index(frm), 0)
    return float(np.max(np.abs(slices - slices[0])))


def is_arc_redundant(net: Network, frm: str, to: str, tol: float = REDUNDANCY_TOL) -> bool:
    """True iff ``to``'s rows do not depend on the state of ``frm``."""
    return _arc_spread(net, frm, to) <= tol


def remove_redundant_arc(
    net: Network, frm: str, to: str, tol: float = REDUNDANCY_TOL, force: bool = False
) -> Network:
    """Delete ``frm -> to``, collapsing ``to``'s CPT by averaging over ``frm``.

    Raises unless the arc is redundant or ``force`` is set; a forced removal
    of a non-redundant arc changes the joint.
    """
    spread = _arc_spread(net, frm, to)
    if spread > tol and not force:
        raise NetworkError(f"arc {frm} -> {to} is not redundant (max row difference {spread:.3g})")
    old = net.node(to)
    factor = node_factor(net, to).mean(axis=old.parents.index(frm))
    parents = tuple(p for p in old.parents if p != frm)
    return net.replace_node(NodeDef(to, old.states, parents, cpt_from_factor(factor)))


def introduced_arcs(before: Network, after: Network) -> list[tuple[str, str]]:
    """Arcs of ``after`` between nodes that both exist in ``before`` but were not arcs there."""
    out = []
    for n in after.nodes:
        if n.id not in before:
            continue
        for p in n.parents:
            if p in before and not before.has_arc(p, n.id):
                out.append((p, n.id))
    return out
