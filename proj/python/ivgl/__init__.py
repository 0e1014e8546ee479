"""Graph-constrained instrumental-variable regression.

Estimators (``fit`` with method gl/ivl/ivgl/ivgls), graph and Laplacian
utilities, instrument screening, recovery metrics, and the benchmark data
generator, all backed by the C++ core.
"""

from ._core import (
    Graph,
    Laplacian,
    __version__,
    contiguous_cluster,
    distance_graph,
    fit,
    generate,
    laplacian,
    mcc,
    mse,
    ring_graph,
    sign_recovery,
    sis_scores,
    sis_screen,
)

__all__ = [
    "Graph",
    "Laplacian",
    "__version__",
    "contiguous_cluster",
    "distance_graph",
    "fit",
    "generate",
    "laplacian",
    "mcc",
    "mse",
    "ring_graph",
    "sign_recovery",
    "sis_scores",
    "sis_screen",
]
