"""Determining equations for symmetries of the Schrodinger operator.

Convention (kept exactly, including the factor 1/2 on V)::

    L = i*d_t - 1/2*((p - e*A)^2 + V),     H = 1/2*((p - e*A)^2 + V),

with ``p_a = -i d_a``.  An operator ``Q = sum_alpha b_alpha(x, t) d^alpha`` is
a symmetry when ``[L, Q] = 0``, i.e. ``i dQ/dt = [H, Q]``.

The brute-force solver instantiates every ``b_alpha`` as a generic
polynomial of bounded degree in ``x`` and ``t`` and extracts the exact
nullspace of the resulting linear system.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .diffop import DiffOp, ExpPolyOp, _leibniz, commutator, compose, multi_indices
from .enumeration import PROVEN_MAX_N, count_Nhat
from .exactnum import GQ, I, ONE, GaussianRational, Poly, as_rational, nullspace_sparse
from .expr_io import format_poly, parse_poly, poly_to_json

__all__ = [
    "CONVENTION",
    "SchrodingerSpec",
    "build_H",
    "build_L",
    "LinearDiffExpr",
    "DeterminingSystem",
    "generate_determining_system",
    "SymmetryBasis",
    "solve_polynomial_ansatz",
    "restrict_time_independent",
]

CONVENTION = "L = i*dt - 1/2*((p-e*A)^2 + V)"

MultiIndex = Tuple[int, ...]


@dataclass(frozen=True)
class SchrodingerSpec:
    """Scalar potential ``V(x, t)``, vector potential ``A(x[, t])`` and charge ``e``."""

    n: int
    V: Poly
    A: Tuple[Poly, ...] = ()
    e: object = 1

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("dimension must be >= 1")
        A = tuple(self.A) or tuple(Poly.zero(self.n) for _ in range(self.n))
        if len(A) != self.n:
            raise ValueError(f"vector potential needs {self.n} components, got {len(A)}")
        for f in (self.V,) + A:
            if f.n != self.n:
                raise ValueError("potential polynomials must use the same n")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "e", as_rational(self.e))

    @classmethod
    def from_strings(cls, n: int, potential: str = "0", vector_potential: Optional[Sequence[str]] = None, e=1):
        V = parse_poly(potential, n)
        A = tuple(parse_poly(s, n) for s in vector_potential) if vector_potential else ()
        return cls(n, V, A, e)

    def is_time_independent(self) -> bool:
        return self.V.is_time_independent() and all(a.is_time_independent() for a in self.A)

    def has_vector_potential(self) -> bool:
        return any(self.A)

    @property
    def outside_proven_range(self) -> bool:
        return self.n > PROVEN_MAX_N


def _hamiltonian(spec: SchrodingerSpec) -> DiffOp:
    n = spec.n
    e = GQ(spec.e)
    kinetic = DiffOp.zero(n)
    for a in range(n):
        pa = DiffOp.momentum(n, a) - DiffOp.multiplication(spec.A[a]) * e
        kinetic = kinetic + compose(pa, pa)
    return (kinetic + DiffOp.multiplication(spec.V)) * (GQ(1) / 2)


def build_H(spec: SchrodingerSpec) -> DiffOp:
    """``H = 1/2*((p - e*A)^2 + V)``; the vector potential must be time-independent."""
    if not all(a.is_time_independent() for a in spec.A):
        raise ValueError("H needs a time-independent vector potential")
    return _hamiltonian(spec)


def build_L(spec: SchrodingerSpec) -> DiffOp:
    """``L = i*d_t - H`` with the ``i*d_t`` part carried as the operator's ``dt`` term."""
    return DiffOp.time_derivative(spec.n, I) - _hamiltonian(spec)


# ---------------------------------------------------------------------------
# Determining system
# ---------------------------------------------------------------------------

Atom = Tuple[MultiIndex, MultiIndex]  # (unknown alpha, derivative beta over x..., t)


def _unknown_name(alpha: MultiIndex) -> str:
    return "b[" + ",".join(map(str, alpha)) + "]"


def _deriv_suffix(beta: MultiIndex) -> str:
    names = [f"x{a + 1}" for a in range(len(beta) - 1)] + ["t"]
    s = "".join(name * k for name, k in zip(names, beta))
    return f"_{s}" if s else ""


class LinearDiffExpr:
    """``sum c * d^beta b_alpha`` keyed by ``(alpha, beta)``; zero coefficients are dropped."""

    def __init__(self, n: int):
        self.n = n
        self.atoms: Dict[Atom, Poly] = {}

    def add(self, alpha: MultiIndex, beta: MultiIndex, c: Poly):
        key = (alpha, beta)
        s = self.atoms[key] + c if key in self.atoms else c
        if s:
            self.atoms[key] = s
        else:
            self.atoms.pop(key, None)

    def is_zero(self) -> bool:
        return not self.atoms

    def sorted_atoms(self) -> List[Tuple[Atom, Poly]]:
        from .exactnum import monomial_key

        return sorted(self.atoms.items(), key=lambda kv: (monomial_key(kv[0][0]), monomial_key(kv[0][1])))

    def evaluate(self, coeffs: Dict[MultiIndex, Poly]) -> Poly:
        """Substitute concrete coefficient polynomials ``b_alpha``."""
        acc = Poly.zero(self.n)
        for (alpha, beta), c in self.atoms.items():
            b = coeffs.get(alpha)
            if b:
                acc = acc + c * b.diff_multi(beta)
        return acc

    def __str__(self):
        parts = [f"({format_poly(c)})*{_unknown_name(a)}{_deriv_suffix(b)}" for (a, b), c in self.sorted_atoms()]
        return " + ".join(parts) if parts else "0"

    def to_json(self) -> list:
        return [
            {"unknown": list(a), "deriv": list(b), "coeff": poly_to_json(c)}
            for (a, b), c in self.sorted_atoms()
        ]


@dataclass
class DeterminingSystem:
    n: int
    q: int
    unknowns: List[MultiIndex]
    equations: Dict[MultiIndex, LinearDiffExpr]

    def sorted_equations(self) -> List[Tuple[MultiIndex, LinearDiffExpr]]:
        from .exactnum import monomial_key

        return sorted(self.equations.items(), key=lambda kv: monomial_key(kv[0]))

    def evaluate(self, Q: DiffOp) -> Dict[MultiIndex, Poly]:
        """Residual of each equation at the concrete operator ``Q`` (nonzero entries only)."""
        out = {}
        for omega, eq in self.equations.items():
            r = eq.evaluate(Q.terms)
            if r:
                out[omega] = r
        return out

    def to_text(self) -> str:
        lines = []
        for omega, eq in self.sorted_equations():
            d = "*".join(f"d{a + 1}^{k}" if k > 1 else f"d{a + 1}" for a, k in enumerate(omega) if k) or "1"
            lines.append(f"[{d}] {eq} = 0")
        return "\n".join(lines)

    def to_json(self) -> list:
        return [{"deriv": list(omega), "atoms": eq.to_json()} for omega, eq in self.sorted_equations()]


def generate_determining_system(spec: SchrodingerSpec, q: int) -> DeterminingSystem:
    """Coefficients of ``[L, Q]`` for ``Q = sum_{|alpha| <= q} b_alpha d^alpha`` with unknown ``b``.

    ``[L, Q] = i dQ/dt - H o Q + Q o H``; each output derivative ``d^omega``
    collects one linear expression in the unknowns and their derivatives.
    Nothing here assumes ``A = 0``.
    """
    if q < 0:
        raise ValueError("order must be >= 0")
    n = spec.n
    H = _hamiltonian(spec)
    unknowns = multi_indices(n, q)
    eqs: Dict[MultiIndex, LinearDiffExpr] = {}

    def eq(omega):
        if omega not in eqs:
            eqs[omega] = LinearDiffExpr(n)
        return eqs[omega]

    dt_beta = (0,) * n + (1,)
    iconst = Poly.const(n, I)
    for alpha in unknowns:
        eq(alpha).add(alpha, dt_beta, iconst)
        for gamma, h in H.terms.items():
            # -H o (b d^alpha)
            for delta, rest, c in _leibniz(gamma):
                omega = tuple(r + a for r, a in zip(rest, alpha))
                eq(omega).add(alpha, delta + (0,), h.scale(-c))
            # (b d^alpha) o H
            for delta, rest, c in _leibniz(alpha):
                dh = h.diff_multi(delta + (0,))
                if dh:
                    omega = tuple(r + g for r, g in zip(rest, gamma))
                    eq(omega).add(alpha, (0,) * (n + 1), dh.scale(c))
    eqs = {k: v for k, v in eqs.items() if not v.is_zero()}
    return DeterminingSystem(n, q, unknowns, eqs)


# ---------------------------------------------------------------------------
# Bounded-degree polynomial ansatz
# ---------------------------------------------------------------------------


@dataclass
class SymmetryBasis:
    """Basis of symmetry operators found at given degree bounds."""

    n: int
    q: int
    operators: List[ExpPolyOp]
    D: int
    M: Optional[int]
    saturated: Optional[bool] = None
    chains: list = field(default_factory=list)
    outside_proven_range: bool = False

    @property
    def dimension(self) -> int:
        return len(self.operators)


def _ansatz_monomials(n: int, D: int, M: int) -> List[Tuple[int, ...]]:
    return [m + (k,) for m in multi_indices(n, D) for k in range(M + 1)]


def _solve(system: DeterminingSystem, D: int, M: int) -> List[DiffOp]:
    n = system.n
    monos = _ansatz_monomials(n, D, M)
    by_unknown: Dict[MultiIndex, List[Tuple[MultiIndex, MultiIndex, Poly]]] = {a: [] for a in system.unknowns}
    for omega, eq in system.equations.items():
        for (alpha, beta), c in eq.atoms.items():
            by_unknown[alpha].append((omega, beta, c))
    columns = []
    row_index: Dict[tuple, int] = {}
    rows: List[dict] = []
    for alpha in system.unknowns:
        for m in monos:
            col = len(columns)
            columns.append((alpha, m))
            for omega, beta, c in by_unknown[alpha]:
                if any(b > e for b, e in zip(beta, m)):
                    continue
                factor = 1
                for e, b in zip(m, beta):
                    for k in range(b):
                        factor *= e - k
                base = tuple(e - b for e, b in zip(m, beta))
                for cm, cc in c.terms.items():
                    key = (omega, tuple(x + y for x, y in zip(cm, base)))
                    r = row_index.get(key)
                    if r is None:
                        r = row_index[key] = len(rows)
                        rows.append({})
                    v = cc * factor
                    row = rows[r]
                    s = row.get(col)
                    row[col] = v if s is None else s + v
    ops = []
    for vec in nullspace_sparse(rows, len(columns)):
        terms: Dict[MultiIndex, Dict[tuple, GaussianRational]] = {}
        for col, v in vec.items():
            alpha, m = columns[col]
            terms.setdefault(alpha, {})[m] = v
        ops.append(DiffOp(n, {a: Poly(n, t) for a, t in terms.items()}))
    return ops


def solve_polynomial_ansatz(
    spec: SchrodingerSpec,
    q: int,
    D: Optional[int] = None,
    M: Optional[int] = None,
    check_saturation: bool = True,
    verify: bool = True,
) -> SymmetryBasis:
    """All symmetries of order <= q whose coefficients have x-degree <= D and t-degree <= M.

    Defaults: ``D = q + 1`` and ``M = count_Nhat(n, q) - 1``.  Every returned
    operator is re-checked with a direct commutator before return.  With
    ``check_saturation`` the solve is repeated at ``(D + 1, M + 1)``.
    """
    if D is None:
        D = q + 1
    if M is None:
        M = count_Nhat(spec.n, q) - 1
    if D < 0 or M < 0:
        raise ValueError("degree bounds must be >= 0")
    system = generate_determining_system(spec, q)
    ops = _solve(system, D, M)
    if verify:
        L = build_L(spec)
        for Q in ops:
            if not commutator(L, Q).is_zero():
                raise AssertionError(f"returned operator is not a symmetry: {Q}")
    saturated = None
    if check_saturation:
        saturated = len(_solve(system, D + 1, M + 1)) == len(ops)
    return SymmetryBasis(
        spec.n, q, [ExpPolyOp.from_op(Q) for Q in ops], D, M, saturated,
        outside_proven_range=spec.outside_proven_range,
    )


def restrict_time_independent(
    spec: SchrodingerSpec, q: int, D: Optional[int] = None, check_saturation: bool = True
) -> SymmetryBasis:
    """Time-independent symmetries, i.e. operators commuting with ``H`` (``M = 0``)."""
    if not spec.is_time_independent():
        raise ValueError("time-independent restriction needs time-independent potentials")
    if D is None:
        D = q + 1
    if D < 0:
        raise ValueError("degree bound must be >= 0")
    system = generate_determining_system(spec, q)
    ops = _solve(system, D, 0)
    H = build_H(spec)
    for Q in ops:
        if not commutator(H, Q).is_zero():
            raise AssertionError(f"returned operator does not commute with H: {Q}")
    saturated = None
    if check_saturation:
        saturated = len(_solve(system, D + 1, 0)) == len(ops)
    return SymmetryBasis(
        spec.n, q, [ExpPolyOp.from_op(Q) for Q in ops], D, 0, saturated,
        outside_proven_range=spec.outside_proven_range,
    )
