"""
Exact differential operator algebra
===================================

Operators are stored in normal form, coefficients to the left of
derivatives, with Gaussian-rational coefficients.  Momentum is p = -i d.
"""

from schrosym import DiffOp, Poly, commutator, compose, format_operator
from schrosym.diffop import SymTensorSet, anticommutator, expand_symmetrized, to_symmetrized
from schrosym.exactnum import GQ

x = DiffOp.multiplication(Poly.var(1, 0))
p = DiffOp.momentum(1, 0)

# canonical commutation relation
print("[p, x]       =", format_operator(commutator(p, x)))

# the Leibniz rule moves derivatives to the right
d2 = DiffOp.partial(1, 0, 2)
x2 = DiffOp.multiplication(Poly.var(1, 0) ** 2)
print("d^2 o x^2    =", format_operator(compose(d2, x2)))

# free Hamiltonian p^2/2 acting on x
H = compose(p, p) * (GQ(1) / 2)
print("[H, x]       =", format_operator(commutator(H, x)))

# symmetrized presentation: [x, p]_+ corresponds to the tensor F^1 = x
xp = anticommutator(x, p)
print("[x, p]_+     =", format_operator(xp))
F = to_symmetrized(xp)
print("F components =", {k: str(v) for k, v in F.components.items()})
assert expand_symmetrized(F) == xp

# a rank-2 tensor in two dimensions, and back
F2 = SymTensorSet(2, 2, {(0, 1): Poly.var(2, 0), (): Poly.var(2, 1) ** 2})
Q = expand_symmetrized(F2)
print("expanded     =", format_operator(Q))
print("roundtrip ok =", to_symmetrized(Q, 2) == F2)
