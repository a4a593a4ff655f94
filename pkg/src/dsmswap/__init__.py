"""Qubit routing by smooth optimization over doubly stochastic matrices.

Swap layers are relaxed to convex mixtures of permutations, a penalized
cost counting off-edge gates is driven to zero by gradient descent, and the
result is rounded back to concrete swaps inside a rolling horizon.
"""
from .bench import (MetricsRecord, compute_metrics, ecdf, emit_braid_svg, emit_csv,
                    gen_matching_circuit, gen_sparse_circuit, run_protocol)
from .circuit import (Gate, LayeredCircuit, QubitMap, Topology, apply_permutation,
                      circuit_to_json, emit_circuit, layerize, parse_circuit, parse_coupling,
                      topology_from_edges, topology_heavy_hex, topology_line, topology_ring)
from .coloring import GeneratorSchedule, partition_generators
from .cost import CostContext, gradient, hardware_cost, layer_cost
from .errors import (ContractError, DSMSwapError, MetricsError, NumericError, ParseError,
                     RoutingError, ShapeError, SizeError, TopologyError)
from .kernels import BACKEND
from .optimizer import KnitterConfig, KnitterResult, knitter, project_to_omega
from .router import RoutedCircuit, RouterConfig, VerifyReport, route, verify_routing
from .swaps import thetas_to_swaps
from .tensor import PermutationMatrix, psswap, sswap, swap_matrix

__version__ = "0.1.0"
