"""Internal refinement and coarsening: rewrite CPTs, keep the arc set.

Refinement rewrites the target's own CPT (the upper arc) and the CPTs of
its successors (the lower arcs). Any proposed lower arcs are accepted only
if the joint over every other node survives, checked by enumeration.

Coarsening sums the merged columns of the upper arc and rebuilds each lower
row as the mixture of the merged states' rows weighted by their upper-arc
probabilities. That mixture can depend on the target's parents; when it
does, exact coarsening is impossible and the approximate mode averages the
candidates.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, replace
from typing import Mapping

import numpy as np

from .errors import MappingError, NetworkError, NotCoarsenable, RefinementRejected
from .external import SplitSpec
from .network import (
    ROW_TOL,
    CoarseningMap,
    Config,
    Cpt,
    Network,
    NodeDef,
    RefinementMap,
    cpt_from_factor,
    node_factor,
    require_valid,
)
from .verify import EXACT_TOL, joint_equivalence, others

logger = logging.getLogger(__name__)


def _check_map_space(net: Network, target: str, space) -> None:
    if net.states(target) != space:
        raise MappingError(f"map is defined over {space.labels}, {target} has {net.states(target).labels}")


def _check_cpt(cpt: Cpt, shape: tuple[int, int], what: str) -> None:
    if cpt.shape != shape:
        raise NetworkError(f"{what}: CPT shape {cpt.shape}, expected {shape}")
    rows = cpt.rows
    if np.any(rows < 0) or np.any(rows > 1):
        raise NetworkError(f"{what}: entries outside [0, 1]")
    bad = np.flatnonzero(np.abs(rows.sum(axis=1) - 1.0) > ROW_TOL)
    if bad.size:
        raise NetworkError(f"{what}: row {int(bad[0])} sums to {rows[bad[0]].sum()!r}")


def _old_index_of_new(rmap: RefinementMap) -> list[int]:
    return [rmap.old.index(rmap.parent_of(label)) for label in rmap.new]


def trivial_lower(net: Network, target: str, rmap: RefinementMap) -> dict[str, Cpt]:
    """Lower arcs where each refined state repeats its old state's row."""
    _check_map_space(net, target, rmap.old)
    take = _old_index_of_new(rmap)
    out = {}
    for s in net.successors(target):
        factor = node_factor(net, s)
        out[s] = cpt_from_factor(np.take(factor, take, axis=net.parents(s).index(target)))
    return out


def proportional_split_check(upper, old_upper, rmap: RefinementMap, tol: float = ROW_TOL):
    """Return the per-refined-state split ratio if it is the same for every
    parent configuration, else ``None``.

    An old state with zero probability in every row has no observable ratio;
    its refined states get equal shares.
    """
    new_rows = upper.rows if isinstance(upper, Cpt) else np.asarray(upper, dtype=np.float64)
    old_rows = old_upper.rows if isinstance(old_upper, Cpt) else np.asarray(old_upper, dtype=np.float64)
    k = np.empty(len(rmap.new))
    for old_label, image in rmap.assignment.items():
        i = rmap.old.index(old_label)
        cols = [rmap.new.index(label) for label in image]
        live = old_rows[:, i] > 0
        if not live.any():
            logger.warning("state %s has zero probability everywhere; split ratio taken as uniform", old_label)
            k[cols] = 1.0 / len(cols)
            continue
        ratios = new_rows[np.ix_(live, cols)] / old_rows[live, i][:, None]
        if np.any(ratios.max(axis=0) - ratios.min(axis=0) > tol):
            return None
        k[cols] = ratios.mean(axis=0)
    return k


def internal_refine(
    net: Network,
    target: str,
    rmap: RefinementMap,
    upper,
    lower: Mapping[str, Cpt] | None = None,
    tol: float = EXACT_TOL,
) -> Network:
    """Refine ``target`` in place.

    ``upper`` is the target's new CPT (or a :class:`SplitSpec` to derive it);
    its refined columns must add back up to the old ones. ``lower`` may give
    new CPTs for some or all successors; any left out get the trivial rows.
    """
    require_valid(net)
    _check_map_space(net, target, rmap.old)
    old = net.node(target)
    if isinstance(upper, SplitSpec):
        upper = upper.upper(old.cpt, rmap)
    elif not isinstance(upper, Cpt):
        upper = Cpt(upper)
    _check_cpt(upper, (old.cpt.shape[0], len(rmap.new)), f"upper CPT for {target}")
    aggregated = upper.rows @ rmap.indicator().T
    gap = np.abs(aggregated - old.cpt.rows)
    if gap.max() > tol:
        r, c = np.unravel_index(int(np.argmax(gap)), gap.shape)
        raise MappingError(
            f"upper CPT for {target} does not add up to the old one: row {r}, state {rmap.old.labels[c]} "
            f"gives {aggregated[r, c]!r} instead of {old.cpt.rows[r, c]!r}")

    lower = dict(lower or {})
    successors = net.successors(target)
    stray = set(lower) - set(successors)
    if stray:
        raise NetworkError(f"lower CPTs given for non-successors {sorted(stray)}")
    defaults = trivial_lower(net, target, rmap)

    out = net.replace_node(NodeDef(target, rmap.new, old.parents, upper))
    for s in successors:
        cpt = lower.get(s, defaults[s])
        if not isinstance(cpt, Cpt):
            cpt = Cpt(cpt)
        n = net.node(s)
        expected = (defaults[s].shape[0], n.card)
        _check_cpt(cpt, expected, f"lower CPT for {s}")
        out = out.replace_node(NodeDef(s, n.states, n.parents, cpt))

    if lower:
        result = joint_equivalence(net, out, others(net, target))
        if not result.within(tol):
            raise RefinementRejected(
                f"refinement of {target} changes the joint over the other nodes by {result.max_diff:.3g} "
                f"at {result.assignment}", max_deviation=result.max_diff)
    return out


@dataclass(frozen=True)
class CandidateRow:
    """One candidate lower row: the mixture computed for one target-parent configuration."""

    successor: str
    config: Config
    coarse_state: str
    target_config: Config
    row: np.ndarray


@dataclass(frozen=True)
class SpreadEntry:
    """Max-min spread of one successor probability across target-parent configurations."""

    successor: str
    config: Config
    coarse_state: str
    child_state: str
    values: tuple[tuple[Config, float], ...]
    spread: float


def _fmt_config(config: Config) -> str:
    return ", ".join(f"{k}={v}" for k, v in config)


def _where(e: SpreadEntry) -> str:
    return "(" + ", ".join([f"{e.successor}={e.child_state}"] + [f"{k}={v}" for k, v in e.config]) + ")"


@dataclass(frozen=True)
class DeviationReport:
    target: str
    candidates: tuple[CandidateRow, ...] = ()
    entries: tuple[SpreadEntry, ...] = ()
    residual: float | None = None

    @property
    def max_spread(self) -> float:
        return max((e.spread for e in self.entries), default=0.0)

    @property
    def worst(self) -> SpreadEntry | None:
        if not self.entries:
            return None
        return max(self.entries, key=lambda e: e.spread)

    def is_exact(self, tol: float = EXACT_TOL) -> bool:
        return self.max_spread <= tol and (self.residual is None or self.residual <= tol)

    def lines(self, digits: int = 6) -> list[str]:
        out = [f"max spread {self.max_spread:.{digits}g}"]
        worst = self.worst
        if worst is not None and worst.spread > 0:
            out[0] += f" at {_where(worst)}"
        if self.residual is not None:
            out.append(f"residual joint difference {self.residual:.{digits}g}")
        for e in self.entries:
            values = ", ".join(f"{_fmt_config(c) or '-'}: {v:.{digits}g}" for c, v in e.values)
            out.append(f"{self.target}={e.coarse_state} {_where(e)} spread {e.spread:.{digits}g} [{values}]")
        return out

    def __str__(self):
        return "\n".join(self.lines())


def _coarsen_plan(net: Network, target: str, cmap: CoarseningMap):
    """New upper CPT, new successor factors (mean rows) and the report."""
    require_valid(net)
    _check_map_space(net, target, cmap.old)
    x_parents = net.parents(target)
    x_factor = node_factor(net, target)
    upper = Cpt(net.node(target).cpt.rows @ cmap.indicator())

    classes = [[cmap.old.index(m) for m in cmap.members(c)] for c in cmap.new]
    candidates: list[CandidateRow] = []
    entries: list[SpreadEntry] = []
    lower: dict[str, np.ndarray] = {}
    for s in net.successors(target):
        s_parents = net.parents(s)
        xpos = s_parents.index(target)
        rest = [p for p in s_parents if p != target]
        free = [p for p in x_parents if p not in rest]
        s_factor = node_factor(net, s)
        s_space = net.states(s)
        shape = list(s_factor.shape)
        shape[xpos] = len(cmap.new)
        new_factor = np.empty(shape)

        for combo in itertools.product(*(net.states(p).labels for p in rest)):
            fixed = dict(zip(rest, combo))
            config = tuple(zip(rest, combo))

            def at(x_index):
                return tuple(x_index if p == target else net.states(p).index(fixed[p]) for p in s_parents)

            for j, coarse in enumerate(cmap.new):
                members = classes[j]
                if len(members) == 1:
                    new_factor[at(j)] = s_factor[at(members[0])]
                    continue
                found: list[tuple[Config, np.ndarray]] = []
                for free_combo in itertools.product(*(net.states(p).labels for p in free)):
                    assign = {**fixed, **dict(zip(free, free_combo))}
                    prior = x_factor[tuple(net.states(p).index(assign[p]) for p in x_parents)]
                    mass = prior[members].sum()
                    if mass <= 0.0:
                        continue
                    row = sum(prior[m] * s_factor[at(m)] for m in members) / mass
                    found.append((tuple((p, assign[p]) for p in x_parents), row))
                if found:
                    new_factor[at(j)] = np.mean([r for _, r in found], axis=0)
                else:
                    new_factor[at(j)] = 1.0 / len(s_space)
                for tc, row in found:
                    candidates.append(CandidateRow(s, config, coarse, tc, row))
                stack = np.array([r for _, r in found]).reshape(len(found), len(s_space))
                for k, child_state in enumerate(s_space):
                    col = stack[:, k]
                    spread = float(col.max() - col.min()) if col.size else 0.0
                    values = tuple((tc, float(v)) for (tc, _), v in zip(found, col))
                    entries.append(SpreadEntry(s, config, coarse, child_state, values, spread))
        lower[s] = new_factor
    report = DeviationReport(target, tuple(candidates), tuple(entries))
    return upper, lower, report


def coarsen_deviation(net: Network, target: str, cmap: CoarseningMap) -> DeviationReport:
    """How far the candidate lower rows disagree; 0 means exact coarsening."""
    return _coarsen_plan(net, target, cmap)[2]


def internal_coarsen(
    net: Network,
    target: str,
    cmap: CoarseningMap,
    mode: str = "approximate",
    tol: float = EXACT_TOL,
) -> tuple[Network, DeviationReport]:
    """Coarsen ``target`` in place.

    In ``"exact"`` mode raises :class:`NotCoarsenable` unless the candidate
    rows agree within ``tol`` and the result keeps the joint over all other
    nodes within ``tol``. ``"approximate"`` always returns, using the plain
    mean of the candidates across target-parent configurations.
    """
    if mode not in ("exact", "approximate"):
        raise ValueError(f"mode must be 'exact' or 'approximate', not {mode!r}")
    upper, lower, report = _coarsen_plan(net, target, cmap)
    old = net.node(target)
    out = net.replace_node(NodeDef(target, cmap.new, old.parents, upper))
    for s, factor in lower.items():
        n = net.node(s)
        out = out.replace_node(NodeDef(s, n.states, n.parents, cpt_from_factor(factor)))
    residual = joint_equivalence(net, out, others(net, target)).max_diff
    report = replace(report, residual=residual)
    if mode == "exact" and not report.is_exact(tol):
        raise NotCoarsenable(
            f"{target} cannot be coarsened exactly: max spread {report.max_spread:.6g}, "
            f"residual {residual:.6g} (tol {tol:g})", report)
    return out, report
