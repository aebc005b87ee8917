"""Classical and quantum corner-to-corner hitting times on embedded hypercubes."""

from .classical import classical_hitting, markov_first_passage, tau_general, tau_uniform
from .errors import HCWalkError
from .fullwalk import build_full_walk, run_full_measured_walk
from .reduced import (
    HittingSummary,
    conditional_hitting,
    expected_hitting_exact,
    hitting_profile,
    reduced_walk,
    run_measured_walk,
)
from .topology import (
    ExplicitGraph,
    Kind,
    WalkMode,
    WalkTopology,
    build_explicit_graph,
    degree,
    reduced_dimension,
    total_outgoing_edges,
)

__version__ = "0.1.0"
