"""Linear differential operators with polynomial coefficients.

A :class:`DiffOp` is stored in normal form ``sum_alpha b_alpha(x, t) d^alpha``
with every coefficient to the left of its derivative block.  Momenta are
``p_a = -i d_a``; there is no separate momentum symbol.

An operator may also carry a constant multiple of ``d/dt`` (``dt``).  This
is how ``L = i d_t - H`` is represented; such operators take part in
commutators but not in general compositions.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import product
from math import comb, factorial
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Tuple

from .exactnum import GQ, I, ONE, ZERO, GaussianRational, Poly, as_gq, monomial_key

__all__ = [
    "DiffOp",
    "SymTensorSet",
    "ExpPolyOp",
    "compose",
    "commutator",
    "anticommutator",
    "expand_symmetrized",
    "to_symmetrized",
    "exp_commutator",
    "exp_time_derivative",
    "symmetry_defect",
    "multi_indices",
    "sorted_index",
    "multiplicity",
]

MultiIndex = Tuple[int, ...]


def multi_indices(n: int, max_order: int, min_order: int = 0) -> List[MultiIndex]:
    """All ``alpha`` in N^n with ``min_order <= |alpha| <= max_order``, graded-lex descending."""
    out = [a for a in product(range(max_order + 1), repeat=n) if min_order <= sum(a) <= max_order]
    out.sort(key=monomial_key)
    return out


def sorted_index(alpha: MultiIndex) -> Tuple[int, ...]:
    """Exponent vector -> sorted tensor index tuple, e.g. (2, 1) -> (0, 0, 1)."""
    return tuple(a for a, k in enumerate(alpha) for _ in range(k))


def exponent_vector(idx: Iterable[int], n: int) -> MultiIndex:
    alpha = [0] * n
    for a in idx:
        alpha[a] += 1
    return tuple(alpha)


def multiplicity(alpha: MultiIndex) -> int:
    """Number of distinct orderings of the index multiset described by ``alpha``."""
    out = factorial(sum(alpha))
    for k in alpha:
        out //= factorial(k)
    return out


@lru_cache(maxsize=None)
def _leibniz(alpha: MultiIndex) -> Tuple[Tuple[MultiIndex, MultiIndex, int], ...]:
    """Pairs (gamma, alpha - gamma, prod C(alpha_k, gamma_k)) for gamma <= alpha."""
    out = []
    for gamma in product(*(range(a + 1) for a in alpha)):
        c = 1
        for a, g in zip(alpha, gamma):
            c *= comb(a, g)
        out.append((gamma, tuple(a - g for a, g in zip(alpha, gamma)), c))
    return tuple(out)


def _coerce_coeff(n: int, c) -> Poly:
    if isinstance(c, Poly):
        if c.n != n:
            raise ValueError(f"coefficient has n={c.n}, operator has n={n}")
        return c
    return Poly.const(n, as_gq(c))


class DiffOp:
    """``sum_alpha terms[alpha] * d^alpha + dt * d/dt`` in normal form."""

    __slots__ = ("n", "terms", "dt")

    def __init__(self, n: int, terms: Optional[Mapping[MultiIndex, object]] = None, dt=0):
        self.n = n
        clean: Dict[MultiIndex, Poly] = {}
        for alpha, c in (terms or {}).items():
            alpha = tuple(alpha)
            if len(alpha) != n or any(a < 0 for a in alpha):
                raise ValueError(f"bad derivative multi-index {alpha} for n={n}")
            c = _coerce_coeff(n, c)
            if c:
                clean[alpha] = clean[alpha] + c if alpha in clean else c
                if not clean[alpha]:
                    del clean[alpha]
        self.terms = clean
        self.dt = as_gq(dt)

    @classmethod
    def _make(cls, n: int, terms: Dict[MultiIndex, Poly], dt: GaussianRational = ZERO) -> "DiffOp":
        op = object.__new__(cls)
        op.n, op.terms, op.dt = n, terms, dt
        return op

    # -- constructors ------------------------------------------------------
    @classmethod
    def zero(cls, n: int) -> "DiffOp":
        return cls._make(n, {})

    @classmethod
    def identity(cls, n: int) -> "DiffOp":
        return cls.multiplication(Poly.const(n, 1))

    @classmethod
    def scalar(cls, n: int, c) -> "DiffOp":
        return cls.multiplication(Poly.const(n, as_gq(c)))

    @classmethod
    def multiplication(cls, f: Poly) -> "DiffOp":
        return cls._make(f.n, {(0,) * f.n: f} if f else {})

    @classmethod
    def partial(cls, n: int, a: int, k: int = 1) -> "DiffOp":
        alpha = [0] * n
        alpha[a] = k
        return cls._make(n, {tuple(alpha): Poly.const(n, 1)})

    @classmethod
    def momentum(cls, n: int, a: int) -> "DiffOp":
        """``p_a = -i d_a``."""
        return cls.partial(n, a) * (-I)

    @classmethod
    def time_derivative(cls, n: int, c=1) -> "DiffOp":
        return cls._make(n, {}, as_gq(c))

    # -- queries -------------------------------------------------------------
    def order(self) -> int:
        """Highest spatial derivative order (``-1`` for the zero operator)."""
        return max((sum(a) for a in self.terms), default=-1)

    def is_zero(self) -> bool:
        return not self.terms and not self.dt

    def __bool__(self):
        return not self.is_zero()

    def coefficient(self, alpha: MultiIndex) -> Poly:
        return self.terms.get(tuple(alpha), Poly.zero(self.n))

    def is_time_independent(self) -> bool:
        return all(c.is_time_independent() for c in self.terms.values())

    def max_coeff_degree(self) -> int:
        return max((c.x_degree() for c in self.terms.values()), default=-1)

    def sorted_terms(self) -> List[Tuple[MultiIndex, Poly]]:
        return sorted(self.terms.items(), key=lambda ac: monomial_key(ac[0]))

    # -- linear structure ------------------------------------------------
    def _check(self, other: "DiffOp"):
        if not isinstance(other, DiffOp):
            raise TypeError(f"expected DiffOp, got {type(other).__name__}")
        if other.n != self.n:
            raise ValueError(f"dimension mismatch: {self.n} vs {other.n}")

    def __add__(self, other: "DiffOp") -> "DiffOp":
        self._check(other)
        out = dict(self.terms)
        for alpha, c in other.terms.items():
            if alpha in out:
                s = out[alpha] + c
                if s:
                    out[alpha] = s
                else:
                    del out[alpha]
            else:
                out[alpha] = c
        return DiffOp._make(self.n, out, self.dt + other.dt)

    def __neg__(self) -> "DiffOp":
        return DiffOp._make(self.n, {a: -c for a, c in self.terms.items()}, -self.dt)

    def __sub__(self, other: "DiffOp") -> "DiffOp":
        return self + (-other)

    def __mul__(self, c) -> "DiffOp":
        """Scalar multiple; a :class:`Poly` factor multiplies from the left."""
        if isinstance(c, Poly):
            return self.left_mul(c)
        c = as_gq(c)
        if not c:
            return DiffOp.zero(self.n)
        return DiffOp._make(self.n, {a: v.scale(c) for a, v in self.terms.items()}, self.dt * c)

    __rmul__ = __mul__

    def left_mul(self, f: Poly) -> "DiffOp":
        """``f * self`` (multiplication operator composed on the left)."""
        if self.dt:
            raise ValueError("cannot multiply a d/dt term by a function")
        out = {}
        for a, c in self.terms.items():
            v = f * c
            if v:
                out[a] = v
        return DiffOp._make(self.n, out)

    def __matmul__(self, other: "DiffOp") -> "DiffOp":
        return compose(self, other)

    def diff_t(self) -> "DiffOp":
        """Coefficient-wise time derivative."""
        out = {}
        for a, c in self.terms.items():
            v = c.diff("t")
            if v:
                out[a] = v
        return DiffOp._make(self.n, out)

    def spatial(self) -> "DiffOp":
        return DiffOp._make(self.n, self.terms)

    def apply(self, f: Poly) -> Poly:
        """Act on the polynomial function ``f(x, t)``."""
        acc = Poly.zero(self.n)
        for a, c in self.terms.items():
            acc = acc + c * f.diff_multi(a + (0,))
        if self.dt:
            acc = acc + f.diff("t").scale(self.dt)
        return acc

    # -- equality --------------------------------------------------------
    def __eq__(self, other):
        if not isinstance(other, DiffOp):
            return NotImplemented
        return self.n == other.n and self.terms == other.terms and self.dt == other.dt

    def __hash__(self):
        return hash((self.n, frozenset(self.terms.items()), self.dt))

    def __repr__(self):
        from .expr_io import format_operator

        return f"DiffOp({format_operator(self)!r})"

    def __str__(self):
        from .expr_io import format_operator

        return format_operator(self)


def compose(a: DiffOp, b: DiffOp) -> DiffOp:
    """Normal form of ``a o b`` by the Leibniz rule."""
    a._check(b)
    if a.dt or b.dt:
        raise ValueError("d/dt terms are only supported inside commutators")
    n = a.n
    out: Dict[MultiIndex, Poly] = {}
    zero_t = (0,)
    for alpha, f in a.terms.items():
        rules = _leibniz(alpha)
        for beta, g in b.terms.items():
            for gamma, rest, c in rules:
                dg = g.diff_multi(gamma + zero_t) if any(gamma) else g
                if not dg:
                    continue
                term = f * dg
                if c != 1:
                    term = term.scale(c)
                key = tuple(r + s for r, s in zip(rest, beta))
                if key in out:
                    out[key] = out[key] + term
                else:
                    out[key] = term
    return DiffOp._make(n, {k: v for k, v in out.items() if v})


def commutator(a: DiffOp, b: DiffOp) -> DiffOp:
    """``[a, b] = a o b - b o a``; constant ``d/dt`` parts act on coefficients."""
    a._check(b)
    sa, sb = a.spatial(), b.spatial()
    out = compose(sa, sb) - compose(sb, sa)
    if a.dt:
        out = out + sb.diff_t() * a.dt
    if b.dt:
        out = out - sa.diff_t() * b.dt
    return out


def anticommutator(a: DiffOp, b: DiffOp) -> DiffOp:
    """``[a, b]_+ = a o b + b o a``."""
    return compose(a, b) + compose(b, a)


# ---------------------------------------------------------------------------
# Symmetrized (anticommutator) presentation
# ---------------------------------------------------------------------------


class SymTensorSet:
    """Symmetric tensors ``F^{a1..aj}``, ``j = 0..q``, with polynomial entries.

    Components are keyed by sorted 0-based index tuples; the rank of a
    component is the length of its key.  Missing components are zero.
    """

    def __init__(self, n: int, q: int, components: Optional[Mapping[Tuple[int, ...], object]] = None):
        self.n = n
        self.q = q
        self.components: Dict[Tuple[int, ...], Poly] = {}
        for idx, f in (components or {}).items():
            key = tuple(sorted(idx))
            if len(key) > q or any(not 0 <= a < n for a in key):
                raise ValueError(f"bad tensor index {idx} for n={n}, q={q}")
            f = _coerce_coeff(n, f)
            if f:
                self.components[key] = f

    def __getitem__(self, idx) -> Poly:
        return self.components.get(tuple(sorted(idx)), Poly.zero(self.n))

    def rank_entries(self, j: int) -> Dict[Tuple[int, ...], Poly]:
        """All ``C(j+n-1, n-1)`` components of rank ``j`` (zeros included)."""
        return {sorted_index(alpha): self[sorted_index(alpha)] for alpha in multi_indices(self.n, j, j)}

    def __eq__(self, other):
        if not isinstance(other, SymTensorSet):
            return NotImplemented
        return self.n == other.n and self.components == other.components

    def __repr__(self):
        inner = ", ".join(f"{k}: {v}" for k, v in sorted(self.components.items()))
        return f"SymTensorSet(n={self.n}, q={self.q}, {{{inner}}})"


def _nested_anticommutator(f: Poly, idx: Tuple[int, ...]) -> DiffOp:
    n = f.n
    op = DiffOp.multiplication(f)
    for a in idx:
        op = anticommutator(op, DiffOp.momentum(n, a))
    return op


def expand_symmetrized(F: SymTensorSet) -> DiffOp:
    """``sum_j [...[F^{a1..aj}, p_a1]_+ ... p_aj]_+`` with all index orderings summed."""
    out = DiffOp.zero(F.n)
    for idx, f in F.components.items():
        term = _nested_anticommutator(f, idx)
        m = multiplicity(exponent_vector(idx, F.n))
        out = out + (term * m if m != 1 else term)
    return out


def to_symmetrized(Q: DiffOp, q: Optional[int] = None) -> SymTensorSet:
    """Invert :func:`expand_symmetrized` by peeling off the top order repeatedly."""
    if Q.dt:
        raise ValueError("operator has a d/dt term")
    top = Q.order()
    if q is None:
        q = max(top, 0)
    if top > q:
        raise ValueError(f"operator order {top} exceeds q={q}")
    n = Q.n
    rest = Q
    comps: Dict[Tuple[int, ...], Poly] = {}
    for j in range(top, -1, -1):
        scale = (GQ(0, -2) ** j)
        layer = {}
        for alpha, c in rest.terms.items():
            if sum(alpha) == j:
                layer[sorted_index(alpha)] = c.scale((scale * multiplicity(alpha)).inverse())
        if layer:
            comps.update(layer)
            rest = rest - expand_symmetrized(SymTensorSet(n, j, layer))
    assert rest.is_zero(), "symmetrized inversion left a remainder"
    return SymTensorSet(n, q, comps)


# ---------------------------------------------------------------------------
# Exponential-polynomial time dependence
# ---------------------------------------------------------------------------


class ExpPolyOp:
    """``sum_lambda exp(lambda*t) * op_lambda`` with polynomial-in-t operators."""

    def __init__(self, n: int, branches: Optional[Mapping[object, DiffOp]] = None):
        self.n = n
        self.branches: Dict[GaussianRational, DiffOp] = {}
        for lam, op in (branches or {}).items():
            lam = as_gq(lam)
            if op.n != n:
                raise ValueError("branch dimension mismatch")
            if lam in self.branches:
                op = self.branches[lam] + op
            if op.is_zero():
                self.branches.pop(lam, None)
            else:
                self.branches[lam] = op

    @classmethod
    def from_op(cls, op: DiffOp, lam=0) -> "ExpPolyOp":
        return cls(op.n, {lam: op})

    @classmethod
    def from_chain(cls, lam, chain: List[DiffOp]) -> "ExpPolyOp":
        """``exp(lam*t) * sum_k t^k/k! * C_k``."""
        n = chain[0].n
        total = DiffOp.zero(n)
        for k, c in enumerate(chain):
            tk = Poly.monomial(n, (0,) * n + (k,), GQ(1) / factorial(k))
            total = total + c.left_mul(tk)
        return cls(n, {lam: total})

    def is_zero(self) -> bool:
        return not self.branches

    def sorted_branches(self) -> List[Tuple[GaussianRational, DiffOp]]:
        return sorted(self.branches.items(), key=lambda lb: (lb[0].re, lb[0].im))

    def __add__(self, other: "ExpPolyOp") -> "ExpPolyOp":
        out = dict(self.branches)
        for lam, op in other.branches.items():
            out[lam] = out[lam] + op if lam in out else op
        return ExpPolyOp(self.n, out)

    def __neg__(self):
        return ExpPolyOp(self.n, {l: -op for l, op in self.branches.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, c):
        return ExpPolyOp(self.n, {l: op * c for l, op in self.branches.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, ExpPolyOp):
            return NotImplemented
        return self.n == other.n and self.branches == other.branches

    def __repr__(self):
        from .expr_io import format_operator

        return f"ExpPolyOp({format_operator(self)!r})"

    def __str__(self):
        from .expr_io import format_operator

        return format_operator(self)


def exp_time_derivative(r: ExpPolyOp) -> ExpPolyOp:
    """Branchwise ``(lam, B) -> (lam, lam*B + dB/dt)``."""
    return ExpPolyOp(r.n, {lam: op * lam + op.diff_t() for lam, op in r.branches.items()})


def exp_commutator(h: DiffOp, r: ExpPolyOp) -> ExpPolyOp:
    """``[h, r]`` for a time-independent ``h``, computed branch by branch."""
    if not h.is_time_independent() or h.dt:
        raise ValueError("exp_commutator needs a time-independent operator")
    return ExpPolyOp(r.n, {lam: commutator(h, op) for lam, op in r.branches.items()})


def symmetry_defect(h: DiffOp, r: ExpPolyOp) -> ExpPolyOp:
    """``i dR/dt - [H, R]``; zero exactly when ``R`` is a symmetry of ``i d_t - H``."""
    return exp_time_derivative(r) * I - exp_commutator(h, r)
