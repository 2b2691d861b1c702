"""Optical network hypervisor: intent-driven virtual topologies over a ROADM network."""

from .intent import EndpointAssignment, IntentSpec, TopologyRequest, decode_request, encode_state
from .pathcomp import DisjointMode, Path, WeightedGraph, disjoint_paths, k_shortest, shortest_path
from .phys import PhysicalTopology, adjacency_view, parse_physical_topology
from .spectrum import DEFAULT_PROFILES, SlotRange, SpectrumPool, TransceiverProfile, first_fit, slots_for_demand
from .vtc import ProviderConstraints, RealizedTopology, realize, replace, teardown

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_PROFILES",
    "DisjointMode",
    "EndpointAssignment",
    "IntentSpec",
    "Path",
    "PhysicalTopology",
    "ProviderConstraints",
    "RealizedTopology",
    "SlotRange",
    "SpectrumPool",
    "TopologyRequest",
    "TransceiverProfile",
    "WeightedGraph",
    "adjacency_view",
    "decode_request",
    "disjoint_paths",
    "encode_state",
    "first_fit",
    "k_shortest",
    "parse_physical_topology",
    "realize",
    "replace",
    "shortest_path",
    "slots_for_demand",
    "teardown",
]
