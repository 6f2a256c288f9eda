"""Exact computation of symmetry operators of the Schrodinger equation.

The operator convention throughout is ``L = i*dt - 1/2*((p - e*A)^2 + V)``
with ``p_a = -i d_a``; the scalar potential enters with a factor 1/2.
"""

from .determining import (
    CONVENTION,
    SchrodingerSpec,
    build_H,
    build_L,
    generate_determining_system,
    restrict_time_independent,
    solve_polynomial_ansatz,
)
from .diffop import (
    DiffOp,
    ExpPolyOp,
    SymTensorSet,
    anticommutator,
    commutator,
    compose,
    expand_symmetrized,
    exp_commutator,
    exp_time_derivative,
    symmetry_defect,
    to_symmetrized,
)
from .enumeration import count_K, count_Nhat, count_Ntilde, count_S, count_table, killing_basis
from .exactnum import GQ, I, Matrix, Poly, UPoly, char_poly, gaussian_roots, nullspace, rank
from .expr_io import ParseError, format_operator, format_poly, parse_poly
from .spectral import (
    build_operator_space,
    find_mastersymmetries,
    invariant_subspace,
    jordan_chains,
    spectral_analysis,
    spectral_symmetry_basis,
    theorem3_decide,
)

__version__ = "0.1.0"
