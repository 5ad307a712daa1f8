"""Constrained dynamics of a charge in a strong magnetic field.

The Lagrangian ``L = A_i(x) xdot^i`` has primary constraints
``p_i - A_i = 0``. This package computes the rank structure and null
foliation of ``F = dA``, the resulting Dirac brackets, and the weighted
Fock-space quantization of the radially symmetric cases.
"""

from .constraints import (DiracBracketTable, PhasePoint, classify_constraints,
                          darboux_bracket_table, dirac_bracket_table, jacobi_residual)
from .errors import (ChartError, CrossCheckError, DivergentIntegralError, RankBoundaryError,
                     RankRefusalError, StrongFieldError)
from .fockq import (KahlerWeight, WeightedFockSpace, build_space, cn_closed_form,
                    cn_quadrature, commutator_diagonal, lowering_matrix, raising_matrix,
                    semiclassical_check, su2_report, toeplitz_matrix)
from .foliation import (GridSpec, LeafPath, RegionMap, eom_residual, leaf_space_summary,
                        rank_map, trace_leaf)
from .geometry import (ChartPoint, DarbouxPotential, DiscPotential, MonopolePotential,
                       PolynomialPotential, PotentialSpec, StackPotential, field_strength,
                       make_potential, null_space, pseudo_inverse_theta, rank_f)

__version__ = "0.1.0"
