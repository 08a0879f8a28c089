"""JSON file formats: networks, evidence and operation descriptions.

Floats are written with ``repr`` (shortest string that parses back to the
same double), so files round-trip bit-exactly.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

from .errors import MappingError, NetworkError
from .external import SplitSpec
from .inference import Evidence
from .network import CoarseningMap, Cpt, Network, NodeDef, RefinementMap, StateSpace


def network_to_dict(net: Network) -> dict:
    return {
        "nodes": [
            {"id": n.id, "states": list(n.states.labels), "parents": list(n.parents), "cpt": n.cpt.tolist()}
            for n in net.nodes
        ]
    }


def network_from_dict(data: Mapping[str, Any]) -> Network:
    try:
        entries = data["nodes"]
        nodes = [
            NodeDef(str(e["id"]), StateSpace(tuple(e["states"])), tuple(e.get("parents", ())), Cpt(e["cpt"]))
            for e in entries
        ]
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, NetworkError):
            raise
        raise NetworkError(f"malformed network description: {exc!r}") from exc
    return Network(tuple(nodes))


def dumps_network(net: Network) -> str:
    return json.dumps(network_to_dict(net), indent=2) + "\n"


def _read_json(path) -> Any:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise NetworkError(f"{path}: not valid JSON ({exc})") from exc


def load_network(path) -> Network:
    return network_from_dict(_read_json(path))


def save_network(net: Network, path) -> None:
    Path(path).write_text(dumps_network(net), encoding="utf-8")


def evidence_from_dict(data: Mapping[str, Any]) -> Evidence:
    if not isinstance(data, Mapping):
        raise NetworkError("evidence must be a JSON object mapping node id to likelihoods")
    return Evidence({str(k): v for k, v in data.items()})


def load_evidence(path) -> Evidence:
    return evidence_from_dict(_read_json(path))


def evidence_to_dict(ev: Evidence) -> dict:
    return {k: v.tolist() for k, v in ev.entries.items()}


@dataclass(frozen=True)
class Operation:
    """Parsed operation description file."""

    op: str
    mode: str
    target: str
    map: Mapping[str, list]
    new_id: str | None = None
    new_states: tuple[str, ...] | None = None
    split: Mapping[str, list] | None = None
    per_parent_split: list | None = None
    upper: list | None = None
    lower: Mapping[str, list] | None = None
    coarsen_mode: str = "exact"
    tol: float | None = None

    def refinement_map(self, old: StateSpace) -> RefinementMap:
        return RefinementMap.build(old, self.map, self.new_states)

    def coarsening_map(self, old: StateSpace) -> CoarseningMap:
        return CoarseningMap.build(old, self.map, self.new_states)

    def split_spec(self) -> SplitSpec | None:
        if self.split is not None:
            return SplitSpec(weights=self.split)
        if self.per_parent_split is not None:
            return SplitSpec(per_parent=self.per_parent_split)
        return None


def operation_from_dict(data: Mapping[str, Any]) -> Operation:
    if not isinstance(data, Mapping):
        raise MappingError("operation description must be a JSON object")
    try:
        op = data["op"]
        target = data["target"]
        mapping = data["map"]
    except KeyError as exc:
        raise MappingError(f"operation description lacks {exc.args[0]!r}") from None
    if op not in ("refine", "coarsen"):
        raise MappingError(f"op must be 'refine' or 'coarsen', not {op!r}")
    mode = data.get("mode", "external")
    if mode not in ("external", "internal"):
        raise MappingError(f"mode must be 'external' or 'internal', not {mode!r}")
    coarsen_mode = data.get("coarsen_mode", "exact")
    if coarsen_mode not in ("exact", "approximate"):
        raise MappingError(f"coarsen_mode must be 'exact' or 'approximate', not {coarsen_mode!r}")
    split = data.get("split")
    per_parent = None
    if isinstance(split, list):
        split, per_parent = None, split
    new_states = data.get("new_states")
    return Operation(
        op=op,
        mode=mode,
        target=target,
        map={k: list(v) for k, v in mapping.items()},
        new_id=data.get("new_id"),
        new_states=tuple(new_states) if new_states is not None else None,
        split=split,
        per_parent_split=per_parent,
        upper=data.get("upper"),
        lower=data.get("lower"),
        coarsen_mode=coarsen_mode,
        tol=data.get("tol"),
    )


def load_operation(path) -> Operation:
    return operation_from_dict(_read_json(path))
