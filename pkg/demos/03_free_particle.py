"""
Symmetries of the free Schrodinger equation
===========================================

L = i*dt - 1/2*p^2.  The determining system is the coefficient list of
[L, Q]; a bounded polynomial ansatz turns it into an exact linear system.
"""

from schrosym import SchrodingerSpec, format_operator, generate_determining_system, solve_polynomial_ansatz
from schrosym.determining import restrict_time_independent

free = SchrodingerSpec.from_strings(1, "0")

print(generate_determining_system(free, 1).to_text())

basis = solve_polynomial_ansatz(free, 1, D=2, M=2)
print(f"\nfirst order symmetries: {basis.dimension} (saturated: {basis.saturated})")
for R in basis.operators:
    print("  ", format_operator(R))

# the second order space includes the boost squared and the dilation
basis = solve_polynomial_ansatz(free, 2, D=3, M=3)
print(f"\nsecond order symmetries: {basis.dimension}")

# time-independent symmetries in the plane: translations, rotation, 1
plane = restrict_time_independent(SchrodingerSpec.from_strings(2, "0"), 1, D=2)
print(f"\ncommuting with H in the plane: {plane.dimension}")
for R in plane.operators:
    print("  ", format_operator(R))
