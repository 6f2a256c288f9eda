"""Exact arithmetic over the Gaussian rationals Q(i).

Scalars are :class:`GaussianRational` values whose real and imaginary parts
are ``gmpy2.mpq`` rationals.  On top of them sit sparse multivariate
polynomials in ``x1..xn, t`` (:class:`Poly`), univariate polynomials
(:class:`UPoly`), and a small exact linear-algebra toolkit (row reduction,
nullspace, rank, characteristic polynomial, Gaussian-rational roots).

Monomials are plain tuples ``(e1, ..., en, et)``: the exponents of the space
variables followed by the exponent of ``t``.  They are ordered graded
lexicographically with ``x1 > x2 > ... > xn > t``.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import reduce
from itertools import product
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import gmpy2
from gmpy2 import mpq

__all__ = [
    "Rational",
    "GaussianRational",
    "GQ",
    "ZERO",
    "ONE",
    "I",
    "as_rational",
    "as_gq",
    "monomial_key",
    "Poly",
    "poly_arith",
    "poly_diff",
    "UPoly",
    "Matrix",
    "rref",
    "nullspace",
    "rank",
    "char_poly",
    "gaussian_roots",
    "Span",
]

Rational = type(mpq(0))
Monomial = Tuple[int, ...]

_Q0 = mpq(0)
_Q1 = mpq(1)


def as_rational(x) -> Rational:
    """Coerce an int, Fraction, mpq or ``"num/den"`` string to an exact rational."""
    if isinstance(x, Rational):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(x, int):
        return mpq(x)
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    if isinstance(x, str):
        return mpq(Fraction(x.strip()))
    if type(x).__name__ == "mpz":
        return mpq(x)
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


class GaussianRational:
    """Exact complex number ``re + im*i`` with rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = as_rational(re)
        self.im = as_rational(im)

    @classmethod
    def _raw(cls, re, im) -> "GaussianRational":
        z = object.__new__(cls)
        z.re = re
        z.im = im
        return z

    # -- arithmetic -----------------------------------------------------
    def __add__(self, other):
        if type(other) is not GaussianRational:
            try:
                other = as_gq(other)
            except TypeError:
                return NotImplemented
        return GaussianRational._raw(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        if type(other) is not GaussianRational:
            try:
                other = as_gq(other)
            except TypeError:
                return NotImplemented
        return GaussianRational._raw(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        try:
            other = as_gq(other)
        except TypeError:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        if type(other) is not GaussianRational:
            try:
                other = as_gq(other)
            except TypeError:
                return NotImplemented
        a, b, c, d = self.re, self.im, other.re, other.im
        if not b and not d:
            return GaussianRational._raw(a * c, _Q0)
        return GaussianRational._raw(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if type(other) is not GaussianRational:
            try:
                other = as_gq(other)
            except TypeError:
                return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        try:
            other = as_gq(other)
        except TypeError:
            return NotImplemented
        return other * self.inverse()

    def __neg__(self):
        return GaussianRational._raw(-self.re, -self.im)

    def __pos__(self):
        return self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        result, base = ONE, self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def inverse(self) -> "GaussianRational":
        nrm = self.re * self.re + self.im * self.im
        if not nrm:
            raise ZeroDivisionError("division by zero Gaussian rational")
        return GaussianRational._raw(self.re / nrm, -self.im / nrm)

    def conjugate(self) -> "GaussianRational":
        return GaussianRational._raw(self.re, -self.im)

    def norm(self) -> Rational:
        """Squared modulus ``re^2 + im^2``."""
        return self.re * self.re + self.im * self.im

    @property
    def is_real(self) -> bool:
        return not self.im

    # -- comparison / hashing --------------------------------------------
    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        if type(other) is not GaussianRational:
            try:
                other = as_gq(other)
            except TypeError:
                return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    def __repr__(self):
        return f"GQ({self})"

    def __str__(self):
        return format_scalar(self)


GQ = GaussianRational
ZERO = GaussianRational._raw(_Q0, _Q0)
ONE = GaussianRational._raw(_Q1, _Q0)
I = GaussianRational._raw(_Q0, _Q1)


def as_gq(x) -> GaussianRational:
    if type(x) is GaussianRational:
        return x
    if isinstance(x, complex):
        raise TypeError("floating-point complex values are not exact")
    return GaussianRational._raw(as_rational(x), _Q0)


def _fmt_q(q: Rational) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def format_scalar(z: GaussianRational) -> str:
    """Render ``z`` in the polynomial grammar, e.g. ``3/2``, ``-i``, ``(1 - 2*i)``."""
    re, im = z.re, z.im
    if not im:
        return _fmt_q(re)
    if not re:
        if im == 1:
            return "i"
        if im == -1:
            return "-i"
        return f"{_fmt_q(im)}*i"
    sign = "-" if im < 0 else "+"
    mag = abs(im)
    imag = "i" if mag == 1 else f"{_fmt_q(mag)}*i"
    return f"({_fmt_q(re)} {sign} {imag})"


# ---------------------------------------------------------------------------
# Multivariate polynomials
# ---------------------------------------------------------------------------


def monomial_key(m: Monomial) -> tuple:
    """Sort key putting monomials in descending graded-lex order."""
    return (-sum(m), tuple(-e for e in m))


class Poly:
    """Sparse polynomial in ``x1..xn`` and ``t`` with Gaussian-rational coefficients.

    ``terms`` maps exponent tuples of length ``n + 1`` (last entry: power of
    ``t``) to nonzero coefficients.  Instances are treated as immutable.
    """

    __slots__ = ("n", "terms", "_hash")

    def __init__(self, n: int, terms: Optional[Mapping[Monomial, object]] = None):
        self.n = n
        clean: Dict[Monomial, GaussianRational] = {}
        if terms:
            for m, c in terms.items():
                m = tuple(int(e) for e in m)
                if len(m) != n + 1 or any(e < 0 for e in m):
                    raise ValueError(f"bad monomial {m} for n={n}")
                c = as_gq(c)
                if c:
                    clean[m] = c
        self.terms = clean
        self._hash = None

    @classmethod
    def _make(cls, n: int, terms: Dict[Monomial, GaussianRational]) -> "Poly":
        p = object.__new__(cls)
        p.n = n
        p.terms = terms
        p._hash = None
        return p

    # -- constructors ----------------------------------------------------
    @classmethod
    def zero(cls, n: int) -> "Poly":
        return cls._make(n, {})

    @classmethod
    def const(cls, n: int, c=1) -> "Poly":
        return cls(n, {(0,) * (n + 1): c})

    @classmethod
    def var(cls, n: int, a: int) -> "Poly":
        """The coordinate ``x_{a+1}`` (``a`` is 0-based)."""
        if not 0 <= a < n:
            raise ValueError(f"variable index {a} out of range for n={n}")
        m = [0] * (n + 1)
        m[a] = 1
        return cls._make(n, {tuple(m): ONE})

    @classmethod
    def time(cls, n: int) -> "Poly":
        return cls._make(n, {(0,) * n + (1,): ONE})

    @classmethod
    def monomial(cls, n: int, exps: Sequence[int], c=1) -> "Poly":
        return cls(n, {tuple(exps): c})

    # -- queries ---------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def degree(self) -> int:
        """Total degree (``-1`` for the zero polynomial)."""
        return max((sum(m) for m in self.terms), default=-1)

    def x_degree(self) -> int:
        return max((sum(m[:-1]) for m in self.terms), default=-1)

    def t_degree(self) -> int:
        return max((m[-1] for m in self.terms), default=-1)

    def is_time_independent(self) -> bool:
        return all(m[-1] == 0 for m in self.terms)

    def coefficient(self, m: Monomial) -> GaussianRational:
        return self.terms.get(tuple(m), ZERO)

    def constant_value(self) -> Optional[GaussianRational]:
        """The scalar value if the polynomial is constant, else ``None``."""
        if not self.terms:
            return ZERO
        if len(self.terms) == 1:
            (m, c), = self.terms.items()
            if not any(m):
                return c
        return None

    def sorted_terms(self) -> List[Tuple[Monomial, GaussianRational]]:
        return sorted(self.terms.items(), key=lambda mc: monomial_key(mc[0]))

    # -- arithmetic ------------------------------------------------------
    def _check(self, other: "Poly"):
        if self.n != other.n:
            raise ValueError(f"variable count mismatch: {self.n} vs {other.n}")

    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            self._check(other)
            return other
        return Poly.const(self.n, as_gq(other))

    def __add__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m)
            if s is None:
                out[m] = c
            else:
                s = s + c
                if s:
                    out[m] = s
                else:
                    del out[m]
        return Poly._make(self.n, out)

    __radd__ = __add__

    def __neg__(self):
        return Poly._make(self.n, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "Poly":
        c = as_gq(c)
        if not c:
            return Poly.zero(self.n)
        return Poly._make(self.n, {m: v * c for m, v in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, Poly):
            try:
                return self.scale(other)
            except TypeError:
                return NotImplemented
        self._check(other)
        out: Dict[Monomial, GaussianRational] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                v = c1 * c2
                s = out.get(m)
                out[m] = v if s is None else s + v
        return Poly._make(self.n, {m: c for m, c in out.items() if c})

    def __rmul__(self, other):
        try:
            return self.scale(other)
        except TypeError:
            return NotImplemented

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("polynomial powers need a nonnegative integer exponent")
        result = Poly.const(self.n, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def diff(self, var) -> "Poly":
        """Partial derivative by ``x_{var+1}`` (0-based int) or by ``t`` (``'t'``)."""
        idx = self.n if var == "t" else var
        if not isinstance(idx, int) or not 0 <= idx <= self.n:
            raise ValueError(f"no variable {var!r} for n={self.n}")
        out = {}
        for m, c in self.terms.items():
            e = m[idx]
            if e:
                mm = list(m)
                mm[idx] = e - 1
                out[tuple(mm)] = c * e
        return Poly._make(self.n, out)

    def diff_multi(self, beta: Sequence[int]) -> "Poly":
        """Apply ``prod_k d^{beta_k}`` over all ``n + 1`` variables (``t`` last)."""
        if len(beta) != self.n + 1:
            raise ValueError("derivative multi-index must have length n + 1")
        out = {}
        for m, c in self.terms.items():
            factor = 1
            mm = []
            for e, b in zip(m, beta):
                if b > e:
                    break
                factor *= _falling(e, b)
                mm.append(e - b)
            else:
                out[tuple(mm)] = c * factor
        return Poly._make(self.n, out)

    def conjugate(self) -> "Poly":
        return Poly._make(self.n, {m: c.conjugate() for m, c in self.terms.items()})

    # -- equality --------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.n == other.n and self.terms == other.terms
        try:
            c = as_gq(other)
        except TypeError:
            return NotImplemented
        return self.constant_value() == c

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.n, frozenset(self.terms.items())))
        return self._hash

    def __repr__(self):
        from .expr_io import format_poly

        return f"Poly({self.n}, {format_poly(self)!r})"

    def __str__(self):
        from .expr_io import format_poly

        return format_poly(self)


def _falling(e: int, b: int) -> int:
    r = 1
    for k in range(b):
        r *= e - k
    return r


def poly_arith(a: Poly, b, op: str) -> Poly:
    """Dispatch ``add``/``sub``/``mul``/``scale``; ``b`` is a scalar for ``scale``."""
    if op == "scale":
        return a.scale(b)
    if not isinstance(b, Poly):
        raise TypeError(f"{op} needs two polynomials")
    if a.n != b.n:
        raise ValueError(f"variable count mismatch: {a.n} vs {b.n}")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown operation {op!r}")


def poly_diff(p: Poly, var) -> Poly:
    return p.diff(var)


# ---------------------------------------------------------------------------
# Univariate polynomials (characteristic polynomials, root finding)
# ---------------------------------------------------------------------------


class UPoly:
    """Dense univariate polynomial in ``s``; ``coeffs[k]`` multiplies ``s**k``."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [as_gq(c) for c in coeffs]
        while cs and not cs[-1]:
            cs.pop()
        self.coeffs = tuple(cs)

    @classmethod
    def from_roots(cls, roots: Iterable, lead=1) -> "UPoly":
        p = cls([lead])
        for r in roots:
            p = p * cls([-as_gq(r), 1])
        return p

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def lead(self) -> GaussianRational:
        return self.coeffs[-1] if self.coeffs else ZERO

    def __call__(self, x) -> GaussianRational:
        x = as_gq(x)
        acc = ZERO
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __eq__(self, other):
        if not isinstance(other, UPoly):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __add__(self, other: "UPoly") -> "UPoly":
        k = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (ZERO,) * (k - len(self.coeffs))
        b = other.coeffs + (ZERO,) * (k - len(other.coeffs))
        return UPoly(x + y for x, y in zip(a, b))

    def __neg__(self):
        return UPoly(-c for c in self.coeffs)

    def __sub__(self, other: "UPoly") -> "UPoly":
        return self + (-other)

    def __mul__(self, other) -> "UPoly":
        if not isinstance(other, UPoly):
            c = as_gq(other)
            return UPoly(x * c for x in self.coeffs)
        if not self.coeffs or not other.coeffs:
            return UPoly()
        out = [ZERO] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] = out[i + j] + a * b
        return UPoly(out)

    __rmul__ = __mul__

    def __divmod__(self, other: "UPoly"):
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = other.degree
        inv = other.lead().inverse()
        quo = [ZERO] * max(len(rem) - dq, 0)
        for k in range(len(rem) - 1, dq - 1, -1):
            c = rem[k] * inv
            if c:
                quo[k - dq] = c
                for j, b in enumerate(other.coeffs):
                    rem[k - dq + j] = rem[k - dq + j] - c * b
        return UPoly(quo), UPoly(rem[:dq] if dq > 0 else [])

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def derivative(self) -> "UPoly":
        return UPoly(c * k for k, c in enumerate(self.coeffs) if k)

    def monic(self) -> "UPoly":
        return self * self.lead().inverse()

    def gcd(self, other: "UPoly") -> "UPoly":
        a, b = self, other
        while not b.is_zero():
            a, b = b, a % b
        return a.monic() if not a.is_zero() else a

    def __repr__(self):
        return f"UPoly({self})"

    def __str__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for k in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[k]
            if not c:
                continue
            mono = "" if k == 0 else ("s" if k == 1 else f"s^{k}")
            cs = format_scalar(c)
            if not mono:
                parts.append(cs)
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{cs}*{mono}")
        out = parts[0]
        for p in parts[1:]:
            out += " - " + p[1:] if p.startswith("-") else " + " + p
        return out


# ---------------------------------------------------------------------------
# Matrices and row reduction
# ---------------------------------------------------------------------------

SparseRow = Dict[int, GaussianRational]


class Matrix:
    """Exact matrix over Q(i); stored as sparse rows, indexed like a dense one."""

    __slots__ = ("rows", "cols", "_data")

    def __init__(self, entries: Sequence[Sequence] = (), cols: Optional[int] = None):
        data = []
        for r in entries:
            data.append({j: as_gq(v) for j, v in enumerate(r) if as_gq(v)})
        self.rows = len(data)
        if cols is None:
            widths = {len(r) for r in entries}
            if len(widths) > 1:
                raise ValueError("ragged matrix rows")
            cols = widths.pop() if widths else 0
        self.cols = cols
        self._data = data

    @classmethod
    def from_sparse(cls, rows: int, cols: int, data: Sequence[Mapping[int, object]]) -> "Matrix":
        m = object.__new__(cls)
        m.rows, m.cols = rows, cols
        m._data = [{j: as_gq(v) for j, v in r.items() if as_gq(v)} for r in data]
        if len(m._data) != rows:
            raise ValueError("row count mismatch")
        return m

    @classmethod
    def from_columns(cls, rows: int, columns: Sequence[Mapping[int, object]]) -> "Matrix":
        data: List[SparseRow] = [{} for _ in range(rows)]
        for j, col in enumerate(columns):
            for i, v in col.items():
                v = as_gq(v)
                if v:
                    data[i][j] = v
        m = object.__new__(cls)
        m.rows, m.cols, m._data = rows, len(columns), data
        return m

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "Matrix":
        return cls.from_sparse(rows, cols, [{} for _ in range(rows)])

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        return cls.from_sparse(n, n, [{i: ONE} for i in range(n)])

    @property
    def shape(self) -> Tuple[int, int]:
        return self.rows, self.cols

    def __getitem__(self, ij) -> GaussianRational:
        i, j = ij
        return self._data[i].get(j, ZERO)

    def sparse_rows(self) -> List[SparseRow]:
        return [dict(r) for r in self._data]

    def to_lists(self) -> List[List[GaussianRational]]:
        return [[r.get(j, ZERO) for j in range(self.cols)] for r in self._data]

    def transpose(self) -> "Matrix":
        return Matrix.from_columns(self.cols, self._data)

    def is_zero(self) -> bool:
        return not any(self._data)

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.shape == other.shape and self._data == other._data

    def __add__(self, other: "Matrix") -> "Matrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        out = []
        for a, b in zip(self._data, other._data):
            r = dict(a)
            _axpy(r, ONE, b)
            out.append(r)
        return Matrix.from_sparse(self.rows, self.cols, out)

    def __sub__(self, other: "Matrix") -> "Matrix":
        return self + other * (-ONE)

    def __mul__(self, other):
        if isinstance(other, Matrix):
            if self.cols != other.rows:
                raise ValueError("shape mismatch")
            out = []
            for r in self._data:
                acc: SparseRow = {}
                for k, v in r.items():
                    _axpy(acc, v, other._data[k])
                out.append(acc)
            return Matrix.from_sparse(self.rows, other.cols, out)
        if isinstance(other, (list, tuple)):
            if len(other) != self.cols:
                raise ValueError("vector length mismatch")
            return [sum((v * other[j] for j, v in r.items()), ZERO) for r in self._data]
        c = as_gq(other)
        return Matrix.from_sparse(self.rows, self.cols, [{j: v * c for j, v in r.items()} for r in self._data])

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Matrix":
        if self.rows != self.cols:
            raise ValueError("power of a non-square matrix")
        result, base = Matrix.identity(self.rows), self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __repr__(self):
        return f"Matrix({[[str(v) for v in r] for r in self.to_lists()]})"


def _axpy(target: SparseRow, a: GaussianRational, row: Mapping[int, GaussianRational]) -> None:
    """``target += a * row`` in place, dropping cancellations."""
    ar, ai = a.re, a.im
    raw = GaussianRational._raw
    for j, v in row.items():
        vr, vi = v.re, v.im
        pr = ar * vr - ai * vi
        pi = ar * vi + ai * vr
        cur = target.get(j)
        if cur is None:
            if pr or pi:
                target[j] = raw(pr, pi)
        else:
            nr, ni = cur.re + pr, cur.im + pi
            if nr or ni:
                target[j] = raw(nr, ni)
            else:
                del target[j]


def _rref_rows(rows: Iterable[Mapping[int, GaussianRational]]) -> Dict[int, SparseRow]:
    """Incremental Gauss-Jordan: returns ``{pivot column: normalized row}``.

    The result is the reduced row echelon form of the row space, so it is
    independent of the order rows arrive in.
    """
    pivots: Dict[int, SparseRow] = {}
    for src in rows:
        r = dict(src)
        if not r:
            continue
        for c in [c for c in r if c in pivots]:
            f = r.get(c)
            if f:
                _axpy(r, -f, pivots[c])
        if not r:
            continue
        c0 = min(r)
        inv = r[c0].inverse()
        r = {j: v * inv for j, v in r.items()}
        r[c0] = ONE
        for prow in pivots.values():
            f = prow.get(c0)
            if f:
                _axpy(prow, -f, r)
        pivots[c0] = r
    return pivots


def rref(M: Matrix) -> Tuple[Matrix, List[int]]:
    """Reduced row echelon form and the pivot columns."""
    piv = _rref_rows(M._data)
    cols = sorted(piv)
    return Matrix.from_sparse(len(cols), M.cols, [piv[c] for c in cols]), cols


def nullspace(M: Matrix) -> List[List[GaussianRational]]:
    """Exact basis of ``ker M``, one vector per free column in increasing order.

    Each vector has a 1 in its free column and zeros in the other free columns.
    """
    return [[v.get(j, ZERO) for j in range(M.cols)] for v in nullspace_sparse(M._data, M.cols)]


def nullspace_sparse(rows: Iterable[Mapping[int, GaussianRational]], ncols: int) -> List[SparseRow]:
    piv = _rref_rows(rows)
    free = [j for j in range(ncols) if j not in piv]
    basis = []
    for f in free:
        v = {f: ONE}
        for c, prow in piv.items():
            x = prow.get(f)
            if x:
                v[c] = -x
        basis.append(v)
    return basis


def rank(M: Matrix) -> int:
    return len(_rref_rows(M._data))


class Span:
    """Incrementally maintained subspace of sparse vectors.

    ``add`` reports whether a vector enlarged the span; ``express`` writes a
    vector as a combination of the vectors that were accepted by ``add``.
    """

    def __init__(self):
        self._piv: Dict[int, Tuple[SparseRow, SparseRow]] = {}
        self.vectors: List[SparseRow] = []

    def __len__(self):
        return len(self.vectors)

    def _reduce(self, v: Mapping[int, GaussianRational]) -> Tuple[SparseRow, SparseRow]:
        r = dict(v)
        combo: SparseRow = {}
        # pivot rows are kept mutually reduced, so one sweep suffices
        for c in [c for c in r if c in self._piv]:
            f = r.get(c)
            if f:
                prow, pcombo = self._piv[c]
                _axpy(r, -f, prow)
                _axpy(combo, f, pcombo)
        return r, combo

    def contains(self, v: Mapping[int, GaussianRational]) -> bool:
        return not self._reduce(v)[0]

    def residual(self, v: Mapping[int, GaussianRational]) -> SparseRow:
        return self._reduce(v)[0]

    def add(self, v: Mapping[int, GaussianRational]) -> bool:
        r, combo = self._reduce(v)
        if not r:
            return False
        k = len(self.vectors)
        self.vectors.append(dict(v))
        # r = v - sum combo_j * vectors_j
        combo = {j: -x for j, x in combo.items()}
        combo[k] = ONE
        c0 = min(r)
        inv = r[c0].inverse()
        r = {j: x * inv for j, x in r.items()}
        combo = {j: x * inv for j, x in combo.items()}
        for c, (prow, pcombo) in self._piv.items():
            f = prow.get(c0)
            if f:
                _axpy(prow, -f, r)
                _axpy(pcombo, -f, combo)
        self._piv[c0] = (r, combo)
        return True

    def express(self, v: Mapping[int, GaussianRational]) -> Optional[SparseRow]:
        """Coefficients ``{k: c_k}`` with ``v = sum c_k vectors[k]``, or ``None``."""
        r, combo = self._reduce(v)
        if r:
            return None
        return combo


# ---------------------------------------------------------------------------
# Characteristic polynomial and Gaussian-rational roots
# ---------------------------------------------------------------------------


def char_poly(M: Matrix) -> UPoly:
    """``det(s*I - M)`` via exact reduction to upper Hessenberg form."""
    if M.rows != M.cols:
        raise ValueError("characteristic polynomial of a non-square matrix")
    n = M.rows
    H = M.to_lists()
    for m in range(1, n - 1):
        piv = next((i for i in range(m, n) if H[i][m - 1]), None)
        if piv is None:
            continue
        if piv != m:
            H[piv], H[m] = H[m], H[piv]
            for row in H:
                row[piv], row[m] = row[m], row[piv]
        t = H[m][m - 1].inverse()
        for i in range(m + 1, n):
            u = H[i][m - 1] * t
            if not u:
                continue
            Hi, Hm = H[i], H[m]
            for j in range(n):
                if Hm[j]:
                    Hi[j] = Hi[j] - u * Hm[j]
            for row in H:
                if row[i]:
                    row[m] = row[m] + u * row[i]
    polys = [UPoly([1])]
    s = UPoly([0, 1])
    for m in range(1, n + 1):
        p = (s - UPoly([H[m - 1][m - 1]])) * polys[m - 1]
        t = ONE
        for i in range(1, m):
            t = t * H[m - i][m - i - 1]
            if not t:
                break
            h = H[m - i - 1][m - 1]
            if h:
                p = p - polys[m - i - 1] * (t * h)
        polys.append(p)
    return polys[n]


# Gaussian integers are (a, b) tuples of Python ints in the helpers below.


def _gi_mul(z, w):
    return (z[0] * w[0] - z[1] * w[1], z[0] * w[1] + z[1] * w[0])


def _gi_divexact(z, w):
    """``z / w`` if ``w`` divides ``z`` in Z[i], else ``None``."""
    n = w[0] * w[0] + w[1] * w[1]
    a = z[0] * w[0] + z[1] * w[1]
    b = z[1] * w[0] - z[0] * w[1]
    if a % n or b % n:
        return None
    return (a // n, b // n)


def _gi_mod(z, w):
    n = w[0] * w[0] + w[1] * w[1]
    a = z[0] * w[0] + z[1] * w[1]
    b = z[1] * w[0] - z[0] * w[1]
    qa = (2 * a + n) // (2 * n)
    qb = (2 * b + n) // (2 * n)
    q = _gi_mul((qa, qb), w)
    return (z[0] - q[0], z[1] - q[1])


def _gi_gcd(z, w):
    while w != (0, 0):
        z, w = w, _gi_mod(z, w)
    return z


def _split_prime(p: int):
    """A Gaussian prime of norm ``p`` for a rational prime ``p = 1 mod 4``."""
    for c in range(2, p):
        if pow(c, (p - 1) // 2, p) == p - 1:
            x = pow(c, (p - 1) // 4, p)
            return _gi_gcd((p, 0), (x, 1))
    raise ValueError(f"{p} is not 1 mod 4")


def _gi_divisors(z) -> List[Tuple[int, int]]:
    """All divisors of the nonzero Gaussian integer ``z``, up to units."""
    from sympy import factorint

    nrm = z[0] * z[0] + z[1] * z[1]
    primes = []
    for p in factorint(nrm):
        if p == 2:
            primes.append((1, 1))
        elif p % 4 == 3:
            primes.append((p, 0))
        else:
            pi = _split_prime(p)
            primes.extend([pi, (pi[0], -pi[1])])
    powers = []
    rest = z
    for pi in primes:
        k = 0
        while True:
            q = _gi_divexact(rest, pi)
            if q is None:
                break
            rest, k = q, k + 1
        if k:
            powers.append((pi, k))
    divisors = [(1, 0)]
    for pi, k in powers:
        new = []
        for d in divisors:
            acc = d
            new.append(acc)
            for _ in range(k):
                acc = _gi_mul(acc, pi)
                new.append(acc)
        divisors = new
    return divisors


_UNITS = ((1, 0), (-1, 0), (0, 1), (0, -1))


def _integerize(p: UPoly) -> List[Tuple[int, int]]:
    dens = [int(q.denominator) for c in p.coeffs for q in (c.re, c.im)]
    lcm = reduce(math.lcm, dens, 1)
    return [(int(c.re * lcm), int(c.im * lcm)) for c in p.coeffs]


def gaussian_roots(p: UPoly) -> Tuple[List[Tuple[GaussianRational, int]], UPoly]:
    """Roots of ``p`` in Q(i) with multiplicities, plus the rootless cofactor.

    Candidates come from the rational-root theorem in Z[i] applied to the
    squarefree part of ``p``.  The return value satisfies
    ``p == residual * prod((s - r)**mult)``.
    """
    if p.is_zero():
        raise ValueError("roots of the zero polynomial")
    rest = p
    found: List[Tuple[GaussianRational, int]] = []
    k = 0
    while rest.degree > 0 and not rest.coeffs[0]:
        rest = UPoly(rest.coeffs[1:])
        k += 1
    if k:
        found.append((ZERO, k))
    if rest.degree > 0:
        sf = rest // rest.gcd(rest.derivative())
        ints = _integerize(sf)
        num_divs = _gi_divisors(ints[0])
        den_divs = _gi_divisors(ints[-1])
        seen = set()
        for d, e, u in product(num_divs, den_divs, _UNITS):
            num = _gi_mul(d, u)
            cand = GaussianRational(num[0], num[1]) / GaussianRational(e[0], e[1])
            if cand in seen:
                continue
            seen.add(cand)
            if sf(cand):
                continue
            lin = UPoly([-cand, 1])
            mult = 0
            while rest.degree > 0:
                q, r = divmod(rest, lin)
                if not r.is_zero():
                    break
                rest, mult = q, mult + 1
            found.append((cand, mult))
            if len(seen) and rest.degree == 0:
                break
    found.sort(key=lambda rm: (rm[0].re, rm[0].im))
    return found, rest
