"""Entanglement monogamy toolkit.

Computes entropy-based correlation measures of small quantum states
(von Neumann entropy, entanglement of formation, one-way classical
correlation and its convex roof), evaluates how many parties a bipartite
state can be shared with, and constructs and validates symmetric
n-extensions.
"""

from .measures import (
    Ensemble,
    OptBudget,
    OptResult,
    Povm,
    classical_correlation,
    concurrence_2q,
    entropy,
    eof_2q,
    eof_convex_roof,
    g_arrow,
    ppt_entangled,
    pure_entanglement,
    wootters_decomposition,
)
from .qmat import (
    DensityMatrix,
    PureState,
    Spectrum,
    StateInvariantError,
    eigh,
    partial_trace,
    permute_subsystems,
    purify,
    random_pure_state,
    random_state,
    tensor,
)

__version__ = "0.1.0"

__all__ = [
    "DensityMatrix",
    "PureState",
    "Spectrum",
    "StateInvariantError",
    "Ensemble",
    "OptBudget",
    "OptResult",
    "Povm",
    "classical_correlation",
    "concurrence_2q",
    "eigh",
    "entropy",
    "eof_2q",
    "eof_convex_roof",
    "g_arrow",
    "partial_trace",
    "permute_subsystems",
    "ppt_entangled",
    "pure_entanglement",
    "purify",
    "random_pure_state",
    "random_state",
    "tensor",
    "wootters_decomposition",
    "__version__",
]
