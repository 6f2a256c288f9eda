"""
Time dependence through the adjoint action
==========================================

For a time-independent H every symmetry evolves by M = -i ad_H.  Jordan
chains of M at eigenvalue lam assemble into exp(lam*t) sum t^k/k! C_k.
The oscillator has a rotating spectrum, the free particle a nilpotent one,
and a quartic anharmonic potential admits no time-dependent symmetry.
"""

from schrosym import SchrodingerSpec, format_operator, spectral_analysis, theorem3_decide
from schrosym.spectral import spectral_symmetry_basis


def show(label, potential, q, D=None):
    spec = SchrodingerSpec.from_strings(1, potential)
    analysis = spectral_analysis(spec, q, D)
    verdict = theorem3_decide(analysis)
    print(f"{label}: dim U = {analysis.dimension}, charpoly {analysis.charpoly}")
    print("  eigenvalues:", ", ".join(f"{lam} (x{m})" for lam, m in analysis.eigenvalues))
    print("  time-dependent symmetries:", verdict.has_time_dependent)
    for lam, K0 in verdict.case1:
        print(f"    exp({lam}*t) * [{format_operator(K0)}]")
    for K0, K1 in verdict.case2:
        print(f"    {format_operator(K0)}  +  t * [{format_operator(K1)}]")
    return analysis


show("free particle", "0", 1)
show("oscillator", "x1^2", 1, D=1)
show("quartic", "x1^4", 2, D=4)

# all six second order oscillator symmetries, exp(+-2it) included
osc = spectral_analysis(SchrodingerSpec.from_strings(1, "x1^2"), 2, 3)
basis = spectral_symmetry_basis(osc)
print(f"\noscillator, order 2: {basis.dimension} symmetries")
for R in basis.operators:
    print("  ", format_operator(R))
