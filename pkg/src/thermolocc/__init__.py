"""Thermomajorization, Gibbs-preserving maps, thermal tensors and LTOCC protocol simulation."""
from .core import (INF, EnergySpectrum, MajorizationCurve, beta_order, curve_eval, gibbs_weights,
                   lorenz_curve, majorizes, prob_vector, thermo_curve, thermo_majorizes, ut_majorizes)
from .gibbs_maps import (extremal_cooling_matrices, is_cooling, is_gibbs_preserving, thermal_swap,
                         transition_feasible, witness_matrix)
from .tensors import (apply_tensor, bicooling_extremals, enumerate_bithermal_vertices,
                      enumerate_thermal_vertices, extremal_bithermal_d2, extremal_family, is_bithermal,
                      is_thermal, tangent_directions)
from .protocol import (BipartiteSetup, Protocol, Round, compose_matrix, conditional_entropy,
                       correlate_sharp, mutual_information, parallel_ltocc, run_protocol)
from .gates import thermal_cnot, thermal_swap_gate, tv_distance
from .reachability import (bithermal_reachable_exact, boundary_distribution, enhanced_necessary,
                           max_curve_bound, thermal_reachable)
from .chsh import (build_observables, chsh_value, degeneracy_profile, ltocc_chsh_bound,
                   mode_decompose, mode_preservation_check)

__version__ = "0.1.0"
