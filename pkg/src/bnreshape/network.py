"""Data model for discrete Bayesian networks and exhaustive joint computation.

CPT rows are indexed by parent configuration in row-major order over the
declared parent order (first parent varies slowest); columns are states.
Every value here is immutable once built.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import MappingError, NetworkError

ROW_TOL = 1e-9

Config = tuple[tuple[str, str], ...]


def _frozen_array(values, ndim=None) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    if ndim is not None and arr.ndim != ndim:
        raise NetworkError(f"expected a {ndim}-d array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class StateSpace:
    """Ordered, duplicate-free tuple of state labels."""

    labels: tuple[str, ...]

    def __post_init__(self):
        labels = tuple(self.labels)
        object.__setattr__(self, "labels", labels)
        if not labels:
            raise NetworkError("a state space needs at least one label")
        for label in labels:
            if not isinstance(label, str) or not label:
                raise NetworkError(f"state labels must be non-empty strings, got {label!r}")
        if len(set(labels)) != len(labels):
            raise NetworkError(f"duplicate state labels in {labels}")

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self) -> Iterator[str]:
        return iter(self.labels)

    def __contains__(self, label) -> bool:
        return label in self.labels

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise NetworkError(f"unknown state {label!r}; expected one of {self.labels}") from None


def _as_space(states) -> StateSpace:
    return states if isinstance(states, StateSpace) else StateSpace(tuple(states))


@dataclass(frozen=True, eq=False)
class Cpt:
    """Row-per-parent-configuration stochastic matrix.

    Row sums are not enforced here so that :func:`validate_network` can
    report them; everything downstream of validation assumes they hold.
    """

    rows: np.ndarray

    def __post_init__(self):
        rows = _frozen_array(self.rows)
        if rows.ndim == 1:
            rows = _frozen_array(rows[None, :])
        if rows.ndim != 2:
            raise NetworkError(f"CPT must be a matrix, got shape {rows.shape}")
        if not np.all(np.isfinite(rows)):
            raise NetworkError("CPT entries must be finite")
        object.__setattr__(self, "rows", rows)

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows.shape

    def __eq__(self, other):
        if not isinstance(other, Cpt):
            return NotImplemented
        return self.rows.shape == other.rows.shape and np.array_equal(self.rows, other.rows)

    def __hash__(self):
        return hash((self.rows.shape, self.rows.tobytes()))

    def tolist(self) -> list[list[float]]:
        return self.rows.tolist()


@dataclass(frozen=True)
class NodeDef:
    id: str
    states: StateSpace
    parents: tuple[str, ...]
    cpt: Cpt

    def __post_init__(self):
        if not isinstance(self.id, str) or not self.id:
            raise NetworkError(f"node ids must be non-empty strings, got {self.id!r}")
        object.__setattr__(self, "states", _as_space(self.states))
        object.__setattr__(self, "parents", tuple(self.parents))
        if not isinstance(self.cpt, Cpt):
            object.__setattr__(self, "cpt", Cpt(self.cpt))
        if len(set(self.parents)) != len(self.parents):
            raise NetworkError(f"node {self.id}: duplicate parents {self.parents}")
        if self.id in self.parents:
            raise NetworkError(f"node {self.id} lists itself as a parent")

    @property
    def card(self) -> int:
        return len(self.states)


def node(id: str, states: Iterable[str], parents: Iterable[str] = (), cpt=None) -> NodeDef:
    """Shorthand constructor accepting plain lists."""
    return NodeDef(id, StateSpace(tuple(states)), tuple(parents), Cpt(cpt))


@dataclass(frozen=True)
class Network:
    """Ordered collection of nodes.

    Construction only enforces unique ids; the remaining invariants
    (dangling parents, cycles, CPT shapes and row sums) are reported by
    :func:`validate_network`.
    """

    nodes: tuple[NodeDef, ...]
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        nodes = tuple(self.nodes)
        object.__setattr__(self, "nodes", nodes)
        index = {}
        for i, n in enumerate(nodes):
            if n.id in index:
                raise NetworkError(f"duplicate node id {n.id!r}")
            index[n.id] = i
        object.__setattr__(self, "_index", index)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(n.id for n in self.nodes)

    def __contains__(self, node_id) -> bool:
        return node_id in self._index

    def __len__(self) -> int:
        return len(self.nodes)

    def node(self, node_id: str) -> NodeDef:
        try:
            return self.nodes[self._index[node_id]]
        except KeyError:
            raise NetworkError(f"unknown node {node_id!r}") from None

    def position(self, node_id: str) -> int:
        self.node(node_id)
        return self._index[node_id]

    def states(self, node_id: str) -> StateSpace:
        return self.node(node_id).states

    def card(self, node_id: str) -> int:
        return len(self.node(node_id).states)

    def parents(self, node_id: str) -> tuple[str, ...]:
        return self.node(node_id).parents

    def successors(self, node_id: str) -> tuple[str, ...]:
        """Children of ``node_id`` in declaration order."""
        self.node(node_id)
        return tuple(n.id for n in self.nodes if node_id in n.parents)

    def successor_parents(self, node_id: str) -> tuple[str, ...]:
        """Other parents of the node's children, first-seen order."""
        out: list[str] = []
        for child in self.successors(node_id):
            for p in self.parents(child):
                if p != node_id and p not in out:
                    out.append(p)
        return tuple(out)

    def markov_boundary(self, node_id: str) -> tuple[str, ...]:
        out: list[str] = []
        for v in self.parents(node_id) + self.successors(node_id) + self.successor_parents(node_id):
            if v not in out:
                out.append(v)
        return tuple(out)

    def has_arc(self, frm: str, to: str) -> bool:
        return frm in self.parents(to)

    def topological_order(self) -> tuple[str, ...]:
        """Kahn's algorithm, always choosing the earliest-declared ready node."""
        indegree = {n.id: sum(p in self._index for p in n.parents) for n in self.nodes}
        order: list[str] = []
        ready = [n.id for n in self.nodes if indegree[n.id] == 0]
        while ready:
            ready.sort(key=self._index.__getitem__)
            current = ready.pop(0)
            order.append(current)
            for child in self.successors(current):
                indegree[child] -= 1
                if indegree[child] == 0:
                    ready.append(child)
        if len(order) != len(self.nodes):
            raise NetworkError("network contains a directed cycle")
        return tuple(order)

    def replace_node(self, new: NodeDef, at: str | None = None) -> Network:
        """Swap the node with id ``at`` (default ``new.id``) for ``new``."""
        pos = self.position(at if at is not None else new.id)
        nodes = list(self.nodes)
        nodes[pos] = new
        return Network(tuple(nodes))

    def insert_after(self, anchor: str, new: NodeDef) -> Network:
        pos = self.position(anchor)
        nodes = list(self.nodes)
        nodes.insert(pos + 1, new)
        return Network(tuple(nodes))

    def without(self, node_id: str) -> Network:
        self.node(node_id)
        return Network(tuple(n for n in self.nodes if n.id != node_id))


def network(nodes: Iterable[NodeDef]) -> Network:
    return Network(tuple(nodes))


def rename_node(net: Network, old: str, new: str) -> Network:
    """Rename a node everywhere it is referenced."""
    net.node(old)
    if new != old and new in net:
        raise NetworkError(f"node id {new!r} already exists")
    nodes = []
    for n in net.nodes:
        parents = tuple(new if p == old else p for p in n.parents)
        nodes.append(NodeDef(new if n.id == old else n.id, n.states, parents, n.cpt))
    return Network(tuple(nodes))


@dataclass(frozen=True)
class Violation:
    kind: str
    node: str
    message: str
    row: int | None = None

    def __str__(self):
        where = self.node if self.row is None else f"{self.node}[row {self.row}]"
        return f"{self.kind}: {where}: {self.message}"


def validate_network(net: Network, tol: float = ROW_TOL) -> list[Violation]:
    """Return every violated network invariant; an empty list means valid."""
    report: list[Violation] = []
    known = set(net.ids)
    for n in net.nodes:
        for p in n.parents:
            if p not in known:
                report.append(Violation("dangling-parent", n.id, f"parent {p!r} does not exist"))
        if any(p not in known for p in n.parents):
            continue
        expected_rows = int(np.prod([net.card(p) for p in n.parents], dtype=np.int64))
        if n.cpt.shape != (expected_rows, n.card):
            report.append(Violation(
                "shape", n.id, f"CPT shape {n.cpt.shape}, expected {(expected_rows, n.card)}"))
            continue
        for r, row in enumerate(n.cpt.rows):
            if np.any(row < -tol) or np.any(row > 1.0 + tol):
                report.append(Violation("range", n.id, f"entries outside [0, 1]: {row.tolist()}", r))
            total = float(row.sum())
            if abs(total - 1.0) > tol:
                report.append(Violation("row-sum", n.id, f"row sums to {total!r}", r))
    try:
        net.topological_order()
    except NetworkError:
        for node_id in _cycle_members(net):
            report.append(Violation("cycle", node_id, "node lies on a directed cycle"))
    return report


def _cycle_members(net: Network) -> list[str]:
    # Repeatedly strip sources and sinks; what survives sits on (or between) cycles.
    alive = set(net.ids)
    changed = True
    while changed:
        changed = False
        for n in net.nodes:
            if n.id not in alive:
                continue
            has_parent = any(p in alive for p in n.parents)
            has_child = any(n.id in net.parents(c) for c in alive)
            if not has_parent or not has_child:
                alive.discard(n.id)
                changed = True
    return [i for i in net.ids if i in alive]


def require_valid(net: Network) -> None:
    report = validate_network(net)
    if report:
        raise NetworkError("invalid network: " + "; ".join(map(str, report)))


def parent_configurations(net: Network, node_id: str) -> list[Config]:
    """Parent assignments in CPT row order; a root yields one empty configuration."""
    parents = net.parents(node_id)
    spaces = [net.states(p).labels for p in parents]
    return [tuple(zip(parents, combo)) for combo in itertools.product(*spaces)]


def row_index(net: Network, node_id: str, assignment: Mapping[str, str]) -> int:
    """Row of ``node_id``'s CPT selected by ``assignment`` (extra keys ignored)."""
    idx = 0
    for p in net.parents(node_id):
        space = net.states(p)
        idx = idx * len(space) + space.index(assignment[p])
    return idx


def node_factor(net: Network, node_id: str) -> np.ndarray:
    """CPT as an array with axes ``(*parents, node)``."""
    n = net.node(node_id)
    return n.cpt.rows.reshape([net.card(p) for p in n.parents] + [n.card])


def cpt_from_factor(factor: np.ndarray) -> Cpt:
    return Cpt(np.ascontiguousarray(factor).reshape(-1, factor.shape[-1]))


@dataclass(frozen=True, eq=False)
class JointTable:
    """Dense probability table over ``variables`` (row-major)."""

    variables: tuple[str, ...]
    spaces: tuple[StateSpace, ...]
    table: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "spaces", tuple(self.spaces))
        table = _frozen_array(self.table)
        if table.shape != tuple(len(s) for s in self.spaces):
            raise NetworkError(f"table shape {table.shape} does not match the state spaces")
        if len(self.variables) != len(self.spaces):
            raise NetworkError("one state space per variable is required")
        object.__setattr__(self, "table", table)

    def total(self) -> float:
        return float(self.table.sum())

    def prob(self, assignment: Mapping[str, str]) -> float:
        key = tuple(s.index(assignment[v]) for v, s in zip(self.variables, self.spaces))
        return float(self.table[key])

    def space(self, var: str) -> StateSpace:
        try:
            return self.spaces[self.variables.index(var)]
        except ValueError:
            raise NetworkError(f"variable {var!r} not in joint table") from None


def full_joint(net: Network) -> JointTable:
    """Probability of every full assignment over ``net.ids`` (declaration order)."""
    require_valid(net)
    axis = {v: i for i, v in enumerate(net.ids)}
    operands: list = []
    for n in net.nodes:
        operands.append(node_factor(net, n.id))
        operands.append([axis[p] for p in n.parents] + [axis[n.id]])
    table = np.einsum(*operands, list(range(len(axis))))
    return JointTable(net.ids, tuple(n.states for n in net.nodes), table)


def marginal_over(joint: JointTable, subset: Sequence[str]) -> JointTable:
    """Sum out every variable not in ``subset``; axes follow ``subset`` order."""
    subset = tuple(subset)
    for v in subset:
        if v not in joint.variables:
            raise NetworkError(f"variable {v!r} not in joint table")
    if len(set(subset)) != len(subset):
        raise NetworkError(f"duplicate variables in {subset}")
    drop = tuple(i for i, v in enumerate(joint.variables) if v not in subset)
    table = joint.table.sum(axis=drop) if drop else joint.table
    kept = [v for v in joint.variables if v in subset]
    table = np.transpose(table, [kept.index(v) for v in subset])
    spaces = tuple(joint.space(v) for v in subset)
    return JointTable(subset, spaces, table, joint.normalized)


@dataclass(frozen=True)
class RefinementMap:
    """Partition of the new space by old state: ``assignment[old] -> new labels``."""

    old: StateSpace
    new: StateSpace
    assignment: Mapping[str, tuple[str, ...]]

    def __post_init__(self):
        object.__setattr__(self, "old", _as_space(self.old))
        object.__setattr__(self, "new", _as_space(self.new))
        assignment = {k: tuple(v) for k, v in self.assignment.items()}
        object.__setattr__(self, "assignment", assignment)
        if set(assignment) != set(self.old.labels):
            raise MappingError(f"refinement must cover old states {self.old.labels}, got {sorted(assignment)}")
        seen: list[str] = []
        for old_label in self.old:
            image = assignment[old_label]
            if not image:
                raise MappingError(f"old state {old_label!r} refines into nothing")
            seen.extend(image)
        if len(seen) != len(set(seen)):
            raise MappingError("refinement images overlap")
        if set(seen) != set(self.new.labels):
            raise MappingError(f"refinement images {seen} do not partition {self.new.labels}")

    @classmethod
    def build(cls, old, assignment: Mapping[str, Sequence[str]], new=None) -> RefinementMap:
        """Old states missing from ``assignment`` map to themselves; the new
        space defaults to the images concatenated in old-state order."""
        old = _as_space(old)
        full = {o: tuple(assignment.get(o, (o,))) for o in old}
        extra = set(assignment) - set(old.labels)
        if extra:
            raise MappingError(f"unknown old states {sorted(extra)}")
        if new is None:
            new = tuple(label for o in old for label in full[o])
        return cls(old, _as_space(new), full)

    def parent_of(self, new_label: str) -> str:
        for old_label, image in self.assignment.items():
            if new_label in image:
                return old_label
        raise MappingError(f"{new_label!r} is not a refined state")

    def indicator(self) -> np.ndarray:
        """``(|old|, |new|)`` 0/1 matrix."""
        out = np.zeros((len(self.old), len(self.new)))
        for i, o in enumerate(self.old):
            for label in self.assignment[o]:
                out[i, self.new.index(label)] = 1.0
        return out

    def inverse(self) -> CoarseningMap:
        return CoarseningMap(self.new, self.old, {o: frozenset(img) for o, img in self.assignment.items()})


@dataclass(frozen=True)
class CoarseningMap:
    """Partition of the old space by new state: ``assignment[new] -> old labels``."""

    old: StateSpace
    new: StateSpace
    assignment: Mapping[str, frozenset]

    def __post_init__(self):
        object.__setattr__(self, "old", _as_space(self.old))
        object.__setattr__(self, "new", _as_space(self.new))
        assignment = {k: frozenset(v) for k, v in self.assignment.items()}
        object.__setattr__(self, "assignment", assignment)
        if set(assignment) != set(self.new.labels):
            raise MappingError(f"coarsening must cover new states {self.new.labels}, got {sorted(assignment)}")
        seen: list[str] = []
        for new_label in self.new:
            members = assignment[new_label]
            if not members:
                raise MappingError(f"coarse state {new_label!r} is empty")
            seen.extend(members)
        if len(seen) != len(set(seen)):
            raise MappingError("coarsening classes overlap")
        if set(seen) != set(self.old.labels):
            raise MappingError(f"coarsening classes {sorted(seen)} do not partition {self.old.labels}")

    @classmethod
    def build(cls, old, assignment: Mapping[str, Iterable[str]], new=None) -> CoarseningMap:
        """Old states not named in any class keep their own singleton class.

        The new space defaults to first-member order over the old space.
        """
        old = _as_space(old)
        full = {k: frozenset(v) for k, v in assignment.items()}
        covered = set().union(*full.values()) if full else set()
        unknown = covered - set(old.labels)
        if unknown:
            raise MappingError(f"unknown old states {sorted(unknown)}")
        for o in old:
            if o not in covered:
                if o in full:
                    raise MappingError(f"label {o!r} is both a class name and an uncovered old state")
                full[o] = frozenset([o])
        if new is None:
            new = sorted(full, key=lambda k: min(old.index(m) for m in full[k]))
        return cls(old, _as_space(new), full)

    def class_of(self, old_label: str) -> str:
        for new_label, members in self.assignment.items():
            if old_label in members:
                return new_label
        raise MappingError(f"{old_label!r} is not an old state")

    def members(self, new_label: str) -> list[str]:
        """Class members in old-space order."""
        return [o for o in self.old if o in self.assignment[new_label]]

    def indicator(self) -> np.ndarray:
        """``(|old|, |new|)`` 0/1 matrix."""
        out = np.zeros((len(self.old), len(self.new)))
        for j, label in enumerate(self.new):
            for o in self.assignment[label]:
                out[self.old.index(o), j] = 1.0
        return out

    def inverse(self) -> RefinementMap:
        return RefinementMap(self.new, self.old, {k: tuple(self.members(k)) for k in self.new})
