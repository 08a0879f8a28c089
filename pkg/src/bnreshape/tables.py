"""Plain-text rendering in the layout of the printed example tables."""
from __future__ import annotations

import itertools

from .network import Network


def fmt_prob(x: float, decimals: int = 3) -> str:
    """Round to ``decimals`` and drop trailing zeros, keeping one digit: 0.080 -> 0.08."""
    text = f"{x:.{decimals}f}"
    if text.startswith("-") and float(text) == 0.0:
        text = text[1:]
    head, _, tail = text.partition(".")
    tail = tail.rstrip("0") or "0"
    return f"{head}.{tail}"


def fmt_sci(x: float) -> str:
    """One-decimal scientific notation without exponent padding: 0.0e0, 2.5e-2."""
    mantissa, exponent = f"{x:.1e}".split("e")
    return f"{mantissa}e{int(exponent)}"


def posterior_lines(net: Network, posteriors) -> list[str]:
    lines = []
    for node_id in net.ids:
        cells = " ".join(f"{label} {fmt_prob(p)}" for label, p in zip(net.states(node_id), posteriors[node_id]))
        lines.append(f"{node_id}: {cells}")
    return lines


def cpt_table(net: Network, node_id: str, decimals: int = 6) -> str:
    n = net.node(node_id)
    header = list(n.parents) + list(n.states)
    lines = [f"Conditional Prob for Node {node_id}", "\t".join(header)]
    combos = itertools.product(*(net.states(p).labels for p in n.parents))
    for combo, row in zip(combos, n.cpt.rows):
        lines.append("\t".join(list(combo) + [fmt_prob(v, decimals) for v in row]))
    return "\n".join(lines)
