"""Command-line front end.

Exit codes: 0 success, 1 usage, 2 invalid input, 3 not coarsenable,
4 joint-equivalence failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

from .errors import MappingError, NetworkError, NotCoarsenable, RefinementRejected
from .external import external_coarsen, external_refine
from .graph_ops import eliminate_node
from .inference import Evidence, evidence_probability, posterior_marginals
from .internal import internal_coarsen, internal_refine
from .io import load_evidence, load_network, load_operation, save_network
from .network import Cpt, Network, rename_node
from .tables import cpt_table, fmt_sci, posterior_lines
from .verify import EXACT_TOL, is_irreducible, joint_equivalence

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVALID = 2
EXIT_NOT_COARSENABLE = 3
EXIT_NOT_EQUIVALENT = 4

# differences below this are summation-order rounding; text output shows them as 0
NOISE_FLOOR = 1e-15


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _dump(obj) -> None:
    print(json.dumps(obj, indent=2))


def cmd_infer(args) -> int:
    net = load_network(args.net)
    ev = load_evidence(args.evidence) if args.evidence else Evidence()
    post = posterior_marginals(net, ev)
    if args.json:
        _dump({
            "evidence_probability": evidence_probability(net, ev),
            "posteriors": {k: dict(zip(net.states(k), v.tolist())) for k, v in post.items()},
        })
    else:
        print("\n".join(posterior_lines(net, post)))
    return EXIT_OK


def _changed_nodes(before: Network, after: Network) -> list[str]:
    return [n.id for n in after.nodes if n.id not in before or before.node(n.id) != n]


def _finish(args, before: Network, after: Network, report=None) -> int:
    save_network(after, args.out)
    if args.json:
        payload = {"out": str(args.out), "changed": _changed_nodes(before, after)}
        if report is not None:
            payload["max_spread"] = report.max_spread
            payload["residual"] = report.residual
        _dump(payload)
        return EXIT_OK
    for node_id in _changed_nodes(before, after):
        print(cpt_table(after, node_id))
        print()
    if report is not None:
        print(report)
    return EXIT_OK


def _tol(args, op) -> float:
    if args.tol is not None:
        return args.tol
    return op.tol if op.tol is not None else EXACT_TOL


def _rename_back(args, net: Network, new_id: str, target: str) -> Network:
    return rename_node(net, new_id, target) if args.keep_id else net


def cmd_refine(args) -> int:
    net = load_network(args.net)
    op = load_operation(args.op)
    if op.op != "refine":
        raise MappingError(f"operation file describes {op.op!r}, not 'refine'")
    mode = args.mode or op.mode
    rmap = op.refinement_map(net.states(op.target))
    split = op.split_spec()
    if mode == "external":
        if not op.new_id:
            raise MappingError("external refinement needs new_id")
        if split is None:
            raise MappingError("external refinement needs split weights")
        out = external_refine(net, op.target, rmap, split, op.new_id)
        out = _rename_back(args, out, op.new_id, op.target)
    else:
        upper = Cpt(op.upper) if op.upper is not None else split
        if upper is None:
            raise MappingError("internal refinement needs 'upper' or 'split'")
        lower = {k: Cpt(v) for k, v in (op.lower or {}).items()}
        out = internal_refine(net, op.target, rmap, upper, lower or None, tol=_tol(args, op))
    return _finish(args, net, out)


def cmd_coarsen(args) -> int:
    net = load_network(args.net)
    op = load_operation(args.op)
    if op.op != "coarsen":
        raise MappingError(f"operation file describes {op.op!r}, not 'coarsen'")
    mode = args.mode or op.mode
    cmap = op.coarsening_map(net.states(op.target))
    if mode == "external":
        if not op.new_id:
            raise MappingError("external coarsening needs new_id")
        out = external_coarsen(net, op.target, cmap, op.new_id)
        return _finish(args, net, _rename_back(args, out, op.new_id, op.target))
    out, report = internal_coarsen(
        net, op.target, cmap, mode=args.coarsen_mode or op.coarsen_mode, tol=_tol(args, op))
    return _finish(args, net, out, report)


def _parse_rename(items) -> dict[str, str]:
    out = {}
    for item in items or []:
        for pair in item.split(","):
            old, sep, new = pair.partition("=")
            if not sep or not old or not new:
                raise UsageError(f"--rename expects OLD=NEW, got {pair!r}")
            out[old.strip()] = new.strip()
    return out


def cmd_check(args) -> int:
    a = load_network(args.net)
    b = load_network(args.against)
    rename = _parse_rename(args.rename)
    if args.vars:
        variables = [v.strip() for v in args.vars.split(",") if v.strip()]
    else:
        variables = [v for v in a.ids if rename.get(v, v) in b and a.states(v) == b.states(rename.get(v, v))]
    result = joint_equivalence(a, b, variables, rename)
    ok = result.within(args.tol)
    if args.json:
        _dump({"max_diff": result.max_diff, "assignment": result.assignment,
               "variables": list(result.variables), "tol": args.tol, "equivalent": ok})
    else:
        shown = result.max_diff if result.max_diff >= NOISE_FLOOR else 0.0
        line = f"max diff {fmt_sci(shown)} over {{{','.join(result.variables)}}}"
        if shown:
            line += " at " + ", ".join(f"{k}={v}" for k, v in result.assignment.items())
        print(line)
    return EXIT_OK if ok else EXIT_NOT_EQUIVALENT


def cmd_irreducible(args) -> int:
    net = load_network(args.net)
    irreducible, merges = is_irreducible(net, args.node, args.tol)
    classes = [m.members(k) for m in merges for k in m.new if len(m.assignment[k]) > 1]
    if args.json:
        _dump({"node": args.node, "irreducible": irreducible, "partitions": classes})
    elif irreducible:
        print(f"{args.node}: irreducible (no exact pairwise merge at tol {args.tol:g})")
    else:
        print(f"{args.node}: reducible")
        for c in classes:
            print("  {" + ",".join(c) + "}")
    return EXIT_OK


def cmd_eliminate(args) -> int:
    net = load_network(args.net)
    out = eliminate_node(net, args.node)
    save_network(out, args.out)
    if not args.json:
        for node_id in _changed_nodes(net, out):
            print(cpt_table(out, node_id))
            print()
    else:
        _dump({"out": str(args.out), "changed": _changed_nodes(net, out)})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bnreshape", description="Refine and coarsen state spaces of discrete Bayesian networks.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log transformation details to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("infer", help="posterior marginals under likelihood evidence")
    p.add_argument("--net", required=True)
    p.add_argument("--evidence")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_infer)

    for name, func in (("refine", cmd_refine), ("coarsen", cmd_coarsen)):
        p = sub.add_parser(name, help=f"{name} a node's state space")
        p.add_argument("--net", required=True)
        p.add_argument("--op", required=True, help="operation description (JSON)")
        p.add_argument("--out", required=True)
        p.add_argument("--mode", choices=["external", "internal"], help="overrides the operation file")
        p.add_argument("--tol", type=float)
        p.add_argument("--keep-id", action="store_true",
                       help="external mode: give the replacement node the target's id")
        p.add_argument("--json", action="store_true")
        if name == "coarsen":
            p.add_argument("--coarsen-mode", choices=["exact", "approximate"])
        p.set_defaults(func=func)

    p = sub.add_parser("check", help="max joint difference between two networks")
    p.add_argument("--net", required=True)
    p.add_argument("--against", required=True)
    p.add_argument("--vars", help="comma-separated node ids of --net (default: all shared)")
    p.add_argument("--rename", action="append", metavar="OLD=NEW")
    p.add_argument("--tol", type=float, default=EXACT_TOL)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("irreducible", help="list exactly coarsenable state pairs")
    p.add_argument("--net", required=True)
    p.add_argument("--node", required=True)
    p.add_argument("--tol", type=float, default=EXACT_TOL)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_irreducible)

    p = sub.add_parser("eliminate", help="remove a node by arc reversal")
    p.add_argument("--net", required=True)
    p.add_argument("--node", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_eliminate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"bnreshape: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"bnreshape: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NotCoarsenable as exc:
        print(exc.report)
        print(f"bnreshape: {exc}", file=sys.stderr)
        return EXIT_NOT_COARSENABLE
    except RefinementRejected as exc:
        print(f"bnreshape: {exc}", file=sys.stderr)
        return EXIT_NOT_EQUIVALENT
    except (NetworkError, OSError) as exc:
        print(f"bnreshape: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
