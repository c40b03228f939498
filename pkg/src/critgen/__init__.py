"""Clique-encoded hard instances for critical-point computation.

Generators, exact certifiers and a small gradient-descent harness for
polynomial (and exponential-times-polynomial) functions whose critical
points encode k-cliques of a graph.
"""

from critgen.graphkit import (
    CliqueInstance,
    Graph,
    has_k_clique,
    indicator_to_sign,
    parse_graph,
    planted_clique,
    random_graph,
    sign_decode,
    sign_to_support,
)
from critgen.polycore import (
    ExpOfPoly,
    ExpTimesPoly,
    FloatingOverflowError,
    Polynomial,
    eval_exp_gradient,
    fd_check_gradient,
    parse_polynomial,
)
from critgen.gadgets import (
    GadgetParams,
    Instance,
    build_cubic,
    build_exp_g,
    build_exp_of_poly,
    build_g,
    build_instance,
    build_q,
    build_quartic,
    build_sos_exp,
    clique_to_critical_point,
)

__version__ = "0.1.0"

__all__ = [
    "CliqueInstance",
    "ExpOfPoly",
    "ExpTimesPoly",
    "FloatingOverflowError",
    "GadgetParams",
    "Graph",
    "Instance",
    "Polynomial",
    "build_cubic",
    "build_exp_g",
    "build_exp_of_poly",
    "build_g",
    "build_instance",
    "build_q",
    "build_quartic",
    "build_sos_exp",
    "clique_to_critical_point",
    "eval_exp_gradient",
    "fd_check_gradient",
    "has_k_clique",
    "indicator_to_sign",
    "parse_graph",
    "parse_polynomial",
    "planted_clique",
    "random_graph",
    "sign_decode",
    "sign_to_support",
]
