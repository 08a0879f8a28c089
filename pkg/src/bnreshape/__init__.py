"""Exact discrete Bayesian networks with state-space refinement and coarsening."""
from .errors import (
    BNError,
    EvidenceError,
    MappingError,
    NetworkError,
    NotCoarsenable,
    RefinementRejected,
)
from .external import SplitSpec, external_coarsen, external_refine
from .graph_ops import (
    eliminate_node,
    introduced_arcs,
    is_arc_redundant,
    remove_barren,
    remove_redundant_arc,
    reverse_arc,
)
from .inference import Evidence, evidence_probability, posterior_marginals
from .internal import (
    DeviationReport,
    coarsen_deviation,
    internal_coarsen,
    internal_refine,
    proportional_split_check,
    trivial_lower,
)
from .network import (
    CoarseningMap,
    Cpt,
    JointTable,
    Network,
    NodeDef,
    RefinementMap,
    StateSpace,
    full_joint,
    marginal_over,
    network,
    node,
    parent_configurations,
    rename_node,
    validate_network,
)
from .verify import EquivalenceResult, is_irreducible, joint_equivalence

__version__ = "0.1.0"
