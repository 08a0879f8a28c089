"""Worked example networks: military unit M, terrain T, vehicle V, feature F.

The priors on M and T are not given in the source tables; (0.4, 0.6) and
(0.7, 0.3) are the values that reproduce the published posteriors under the
feature likelihood (0.12, 0.76, 0.05).
"""
from __future__ import annotations

from .inference import Evidence
from .network import Network, network, node

PRIOR_M = [[0.4, 0.6]]
PRIOR_T = [[0.7, 0.3]]
FEATURE_LIKELIHOOD = (0.12, 0.76, 0.05)


def fig3() -> Network:
    """Vehicle present or not: V in (Y, N); F has parents (V, T)."""
    return network([
        node("M", ["A", "B"], [], PRIOR_M),
        node("T", ["G", "B"], [], PRIOR_T),
        node("V", ["Y", "N"], ["M"], [[0.8, 0.2], [0.4, 0.6]]),
        node("F", ["A", "B", "O"], ["V", "T"], [
            [0.45, 0.45, 0.1],  # V=Y, T=G
            [0.3, 0.3, 0.4],    # V=Y, T=B
            [0.1, 0.1, 0.8],    # V=N, T=G
            [0.2, 0.2, 0.6],    # V=N, T=B
        ]),
    ])


def fig7() -> Network:
    """Vehicle type: V in (A, U, N) for tank, truck, none; F has parents (T, V)."""
    return network([
        node("M", ["A", "B"], [], PRIOR_M),
        node("T", ["G", "B"], [], PRIOR_T),
        node("V", ["A", "U", "N"], ["M"], [[0.3, 0.5, 0.2], [0.1, 0.3, 0.6]]),
        node("F", ["A", "B", "O"], ["T", "V"], [
            [0.4, 0.5, 0.1],  # T=G, V=A
            [0.6, 0.3, 0.1],  # T=G, V=U
            [0.1, 0.1, 0.8],  # T=G, V=N
            [0.1, 0.5, 0.4],  # T=B, V=A
            [0.4, 0.2, 0.4],  # T=B, V=U
            [0.2, 0.2, 0.6],  # T=B, V=N
        ]),
    ])


def feature_evidence() -> Evidence:
    return Evidence({"F": FEATURE_LIKELIHOOD})
