"""Counting formulas for symmetry operators and a generalized Killing tensor solver.

The closed forms count arbitrary constants in polynomial solutions of the
flat-space generalized Killing equations

    d^(b1 ... d^bp F^a1...aj) = 0      (symmetrized over all j + p indices)

and :func:`killing_basis` computes those solution spaces directly so the
formulas can be checked against an explicit nullspace.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from itertools import product
from math import comb, factorial
from typing import Dict, List, Optional, Tuple

from .diffop import exponent_vector, multi_indices, sorted_index
from .exactnum import ONE, Poly, nullspace_sparse

__all__ = [
    "PROVEN_MAX_N",
    "count_Nhat",
    "count_S",
    "count_K",
    "count_Ntilde",
    "count_Ntilde_closed",
    "CountTable",
    "count_table",
    "KillingBasis",
    "killing_basis",
    "killing_residual",
]

PROVEN_MAX_N = 4


def _check_nq(n: int, q: int):
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    if q < 0:
        raise ValueError(f"order must be >= 0, got {q}")


def count_Nhat(n: int, q: int) -> int:
    """Upper bound on the number of symmetries of order <= q (free-particle value)."""
    _check_nq(n, q)
    num = factorial(q + n) * factorial(q + n + 1)
    den = factorial(q) * factorial(q + 1) * factorial(n) * factorial(n + 1)
    assert num % den == 0
    return num // den


def count_S(n: int, q: int, j: int) -> int:
    """Dimension of rank-j generalized Killing tensors of order q - j + 1."""
    _check_nq(n, q)
    if not 0 <= j <= q:
        raise ValueError(f"rank j={j} outside 0..{q}")
    num = factorial(j + n - 1) * factorial(q + n) * (q - j + 1)
    den = factorial(n) * factorial(n - 1) * factorial(j) * factorial(q + 1)
    assert num % den == 0
    return num // den


def count_K(n: int, j: int) -> int:
    """Dimension of rank-j (order 1) Killing tensors in flat n-space."""
    _check_nq(n, j)
    num = factorial(j + n - 1) * factorial(j + n)
    den = factorial(j) * factorial(j + 1) * factorial(n - 1) * factorial(n)
    assert num % den == 0
    return num // den


def count_Ntilde(n: int, q: int) -> int:
    """Bound on time-independent symmetries of order <= q, as a sum of Killing counts."""
    _check_nq(n, q)
    return sum(count_K(n, j) for j in range(q + 1))


_P = {
    2: lambda q: 1,
    3: lambda q: 2 * q + 5,
    4: lambda q: 5 * q * q + 30 * q + 42,
}


def count_Ntilde_closed(n: int, q: int) -> int:
    """Closed form of :func:`count_Ntilde`, available for n = 1..4 only."""
    _check_nq(n, q)
    if n == 1:
        return q + 1
    if n not in _P:
        raise ValueError("closed form known only for n <= 4")
    num = factorial(q + n + 1) * _P[n](q)
    den = factorial(q) * factorial(2 * n - 1)
    assert num % den == 0
    return num // den


@dataclass(frozen=True)
class CountTable:
    n: int
    q: int
    N_hat: int
    N_tilde: int
    S: Tuple[int, ...]
    K: Tuple[int, ...]
    outside_proven_range: bool

    def to_json(self) -> dict:
        return {
            "N_hat": self.N_hat,
            "N_tilde": self.N_tilde,
            "S": list(self.S),
            "K": list(self.K),
            "outside_proven_range": self.outside_proven_range,
        }


def count_table(n: int, q: int) -> CountTable:
    S = tuple(count_S(n, q, j) for j in range(q + 1))
    K = tuple(count_K(n, j) for j in range(q + 1))
    table = CountTable(n, q, count_Nhat(n, q), count_Ntilde(n, q), S, K, n > PROVEN_MAX_N)
    assert sum(S) == table.N_hat and sum(K) == table.N_tilde
    return table


# ---------------------------------------------------------------------------
# Killing tensor solver
# ---------------------------------------------------------------------------

Tensor = Dict[Tuple[int, ...], Poly]


@dataclass
class KillingBasis:
    n: int
    rank: int
    order: int
    max_degree: int
    tensors: List[Tensor] = field(default_factory=list)
    saturated: Optional[bool] = None
    outside_proven_range: bool = False

    @property
    def dimension(self) -> int:
        return len(self.tensors)


def _split_weights(n: int, j: int, p: int):
    """For each rank-j component alpha: [(gamma, gamma - alpha, weight)] over |gamma| = j+p.

    The weight counts how many orderings of the symmetrized index list put
    the sub-multiset alpha on the tensor.
    """
    out = {}
    gammas = multi_indices(n, j + p, j + p)
    for alpha in multi_indices(n, j, j):
        rows = []
        for gamma in gammas:
            if all(g >= a for g, a in zip(gamma, alpha)):
                w = 1
                for g, a in zip(gamma, alpha):
                    w *= comb(g, a)
                rows.append((gamma, tuple(g - a for g, a in zip(gamma, alpha)), w))
        out[alpha] = rows
    return out


def killing_residual(tensor: Tensor, n: int, j: int, p: int) -> Dict[Tuple[int, ...], Poly]:
    """Nonzero components of the symmetrized p-fold gradient of a rank-j tensor."""
    res: Dict[Tuple[int, ...], Poly] = {}
    for alpha, rows in _split_weights(n, j, p).items():
        f = tensor.get(sorted_index(alpha))
        if not f:
            continue
        for gamma, beta, w in rows:
            d = f.diff_multi(beta + (0,))
            if d:
                res[gamma] = res[gamma] + d.scale(w) if gamma in res else d.scale(w)
    return {g: v for g, v in res.items() if v}


def _solve_killing(n: int, j: int, p: int, D: int) -> List[Tensor]:
    comps = multi_indices(n, j, j)
    monos = [m + (0,) for m in multi_indices(n, D)]
    weights = _split_weights(n, j, p)
    row_index: Dict[tuple, int] = {}
    rows: List[dict] = []
    columns = []
    for alpha in comps:
        for m in monos:
            col = len(columns)
            columns.append((alpha, m))
            for gamma, beta, w in weights[alpha]:
                if any(b > e for b, e in zip(beta, m)):
                    continue
                c = w
                for e, b in zip(m, beta):
                    for k in range(b):
                        c *= e - k
                key = (gamma, tuple(e - b for e, b in zip(m, beta + (0,))))
                r = row_index.get(key)
                if r is None:
                    r = row_index[key] = len(rows)
                    rows.append({})
                rows[r][col] = ONE * c
    basis = []
    for vec in nullspace_sparse(rows, len(columns)):
        tensor: Tensor = {}
        for col, v in vec.items():
            alpha, m = columns[col]
            idx = sorted_index(alpha)
            term = Poly._make(n, {m: v})
            tensor[idx] = tensor[idx] + term if idx in tensor else term
        basis.append(tensor)
    return basis


def killing_basis(n: int, j: int, p: int, D: Optional[int] = None, check_saturation: bool = True) -> KillingBasis:
    """Polynomial solutions (entry degree <= D) of the rank-j, order-p Killing equation.

    ``D`` defaults to ``j + p - 1``.  With ``check_saturation`` the solve is
    repeated at ``D + 1`` and ``saturated`` records whether the dimension
    stayed the same.
    """
    if n < 1 or j < 0 or p < 1:
        raise ValueError("need n >= 1, j >= 0, p >= 1")
    if D is None:
        D = j + p - 1
    if D < 0:
        raise ValueError("max degree must be >= 0")
    if n > PROVEN_MAX_N:
        warnings.warn(f"n={n} is outside the range n <= {PROVEN_MAX_N} where the polynomial degree bound is proven")
    tensors = _solve_killing(n, j, p, D)
    for tensor in tensors:
        assert not killing_residual(tensor, n, j, p), "Killing basis element failed re-substitution"
    saturated = None
    if check_saturation:
        saturated = len(_solve_killing(n, j, p, D + 1)) == len(tensors)
    return KillingBasis(n, j, p, D, tensors, saturated, n > PROVEN_MAX_N)
