"""
Constant magnetic field
=======================

A = (-x2/2, x1/2) in the symmetric gauge.  The cross terms of (p - A)^2
are expanded exactly; the spectral path then finds the rotating
symmetries at frequency 1 next to the conserved angular momentum.
"""

from schrosym import SchrodingerSpec, build_H, format_operator, spectral_analysis, theorem3_decide
from schrosym.determining import restrict_time_independent

spec = SchrodingerSpec.from_strings(2, "0", ["-1/2*x2", "1/2*x1"])
print("H =", format_operator(build_H(spec)))

conserved = restrict_time_independent(spec, 1, D=2)
print(f"\ncommuting with H (order 1): {conserved.dimension}")
for R in conserved.operators:
    print("  ", format_operator(R))

analysis = spectral_analysis(spec, 1)
print("\neigenvalues of -i ad_H:", ", ".join(f"{lam} (x{m})" for lam, m in analysis.eigenvalues))
verdict = theorem3_decide(analysis)
for lam, K0 in verdict.case1:
    print(f"  exp({lam}*t) * [{format_operator(K0)}]")
