"""Time dependence of symmetries for time-independent potentials.

For a time-independent ``H`` a symmetry satisfies ``dR/dt = M R`` with
``M = -i ad_H``.  On a finite operator space closed under ``M`` every
symmetry is therefore a combination of

    R = exp(lam*t) * sum_k t^k/k! * C_k,      (M - lam) C_k = C_{k+1},

built from Jordan chains of ``M``.  This module restricts ``M`` to the
largest invariant subspace of a bounded operator space, computes its exact
characteristic polynomial and Jordan chains at Gaussian-rational
eigenvalues, and decides whether time-dependent symmetries exist.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .determining import SchrodingerSpec, SymmetryBasis, build_H
from .diffop import DiffOp, ExpPolyOp, commutator, multi_indices, symmetry_defect
from .exactnum import (
    GQ,
    I,
    ONE,
    ZERO,
    GaussianRational,
    Matrix,
    Poly,
    Span,
    UPoly,
    _rref_rows,
    as_gq,
    char_poly,
    gaussian_roots,
    nullspace,
    nullspace_sparse,
    rank,
)

__all__ = [
    "OperatorSpace",
    "AdjointAnalysis",
    "SymmetryChain",
    "Theorem3Verdict",
    "build_operator_space",
    "invariant_subspace",
    "jordan_chains",
    "theorem3_decide",
    "find_mastersymmetries",
    "spectral_analysis",
    "spectral_symmetry_basis",
]

Key = Tuple[Tuple[int, ...], Tuple[int, ...]]  # (derivative alpha, x-monomial incl. t=0)
Vec = Dict[int, GaussianRational]


class OperatorSpace:
    """Time-independent operators ``x^m d^alpha`` with ``|alpha| <= q``, ``deg m <= D``."""

    def __init__(self, n: int, q: int, D: int):
        if n < 1 or q < 0 or D < 0:
            raise ValueError("need n >= 1, q >= 0, D >= 0")
        self.n, self.q, self.D = n, q, D
        alphas = list(reversed(multi_indices(n, q)))
        monos = [m + (0,) for m in reversed(multi_indices(n, D))]
        self.basis: List[Key] = [(a, m) for a in alphas for m in monos]
        self.index: Dict[Key, int] = {k: i for i, k in enumerate(self.basis)}

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def element(self, k: int) -> DiffOp:
        alpha, m = self.basis[k]
        return DiffOp._make(self.n, {alpha: Poly._make(self.n, {m: ONE})})

    def coords(self, op: DiffOp) -> Vec:
        """Coordinates of ``op``; raises if ``op`` lies outside the space."""
        out = {}
        for alpha, c in op.terms.items():
            for m, v in c.terms.items():
                k = self.index.get((alpha, m))
                if k is None:
                    raise ValueError(f"term x^{m[:-1]} d^{alpha} outside the operator space")
                out[k] = v
        return out

    def to_op(self, vec: Vec) -> DiffOp:
        terms: Dict[tuple, Dict[tuple, GaussianRational]] = {}
        for k, v in vec.items():
            alpha, m = self.basis[k]
            terms.setdefault(alpha, {})[m] = v
        return DiffOp(self.n, {a: Poly(self.n, t) for a, t in terms.items()})


def build_operator_space(n: int, q: int, D: int) -> OperatorSpace:
    return OperatorSpace(n, q, D)


@dataclass
class SymmetryChain:
    """Chain ``C_0 .. C_m`` at eigenvalue ``lam`` and the symmetry it assembles."""

    lam: GaussianRational
    chain: List[DiffOp]
    R: ExpPolyOp

    @property
    def length(self) -> int:
        return len(self.chain)

    def tail_symmetries(self) -> List[ExpPolyOp]:
        """The symmetries generated by each tail ``C_l .. C_m`` (``l = 0..m``)."""
        return [ExpPolyOp.from_chain(self.lam, self.chain[l:]) for l in range(len(self.chain))]


@dataclass
class AdjointAnalysis:
    H: DiffOp
    space: OperatorSpace
    basis: List[Vec]  # U in space coordinates, reduced echelon form
    matrix: Matrix  # M = -i ad_H on U, columns are images of basis vectors
    charpoly: UPoly
    eigenvalues: List[Tuple[GaussianRational, int]]
    residual: UPoly
    iterations: int
    chains: Dict[GaussianRational, List[SymmetryChain]] = field(default_factory=dict)
    saturated: Optional[bool] = None

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def basis_ops(self) -> List[DiffOp]:
        return [self.space.to_op(v) for v in self.basis]

    def to_op(self, coords: List[GaussianRational]) -> DiffOp:
        """Operator with the given coordinates with respect to the U basis."""
        vec: Vec = {}
        for c, b in zip(coords, self.basis):
            if c:
                for k, v in b.items():
                    s = vec.get(k, ZERO) + c * v
                    if s:
                        vec[k] = s
                    else:
                        vec.pop(k, None)
        return self.space.to_op(vec)


def _ad(H: DiffOp, op: DiffOp) -> DiffOp:
    """``M(op) = -i [H, op]``."""
    return commutator(H, op) * (-I)


def _combine(vectors: List[Vec], coeffs: Dict[int, GaussianRational]) -> Vec:
    out: Vec = {}
    for i, c in coeffs.items():
        for k, v in vectors[i].items():
            s = out.get(k, ZERO) + c * v
            if s:
                out[k] = s
            else:
                out.pop(k, None)
    return out


def invariant_subspace(H: DiffOp, W: OperatorSpace) -> AdjointAnalysis:
    """Largest subspace ``U`` of ``W`` with ``-i[H, U]`` contained in ``U``.

    Iterates ``U_{k+1} = {v in U_k : M v in U_k}`` from ``U_0 = W``.  Images
    are computed exactly in an ambient space of order ``q + 1`` and
    coefficient degree ``D + max deg(H coefficients)``.
    """
    if not H.is_time_independent() or H.dt:
        raise ValueError("spectral analysis needs a time-independent H")
    if H.n != W.n:
        raise ValueError("dimension mismatch between H and operator space")
    amb_index = dict(W.index)
    max_order = W.q + 1
    max_deg = W.D + max(H.max_coeff_degree(), 0)
    images: List[Vec] = []
    for k in range(W.dimension):
        img = _ad(H, W.element(k))
        vec: Vec = {}
        for alpha, c in img.terms.items():
            assert sum(alpha) <= max_order, "commutator order exceeded the ambient bound"
            for m, v in c.terms.items():
                assert sum(m) <= max_deg, "commutator degree exceeded the ambient bound"
                key = (alpha, m)
                if key not in amb_index:
                    amb_index[key] = len(amb_index)
                vec[amb_index[key]] = v
        images.append(vec)

    def image(v: Vec) -> Vec:
        return _combine(images, v)

    basis: List[Vec] = [{k: ONE} for k in range(W.dimension)]
    iterations = 0
    while True:
        iterations += 1
        k = len(basis)
        cols = [image(b) for b in basis] + [{i: -v for i, v in b.items()} for b in basis]
        rows: Dict[int, Vec] = {}
        for j, col in enumerate(cols):
            for i, v in col.items():
                rows.setdefault(i, {})[j] = v
        kernel = nullspace_sparse(rows.values(), 2 * k)
        new = [_combine(basis, {i: v for i, v in vec.items() if i < k}) for vec in kernel]
        piv = _rref_rows(new)
        new_basis = [piv[c] for c in sorted(piv)]
        done = len(new_basis) == len(basis)
        basis = new_basis
        if done:
            break
    pivots = [min(b) for b in basis]
    d = len(basis)
    columns = []
    for b in basis:
        img = image(b)
        coords = {j: img[p] for j, p in enumerate(pivots) if p in img}
        # exact invariance check: the image must equal its expansion in the basis
        assert _combine(basis, coords) == img, "invariant subspace is not closed"
        columns.append(coords)
    M = Matrix.from_columns(d, columns)
    cp = char_poly(M)
    roots, residual = gaussian_roots(cp)
    return AdjointAnalysis(H, W, basis, M, cp, roots, residual, iterations)


def _mat_vec(M: Matrix, v: List[GaussianRational]) -> List[GaussianRational]:
    return M * v


def _to_sparse(v: List[GaussianRational]) -> Vec:
    return {i: x for i, x in enumerate(v) if x}


def _to_dense(v: Vec, d: int) -> List[GaussianRational]:
    return [v.get(i, ZERO) for i in range(d)]


def _leading_scale(analysis: AdjointAnalysis, v: List[GaussianRational]) -> GaussianRational:
    """Factor making the first nonzero space coordinate of ``v`` equal to 1."""
    coords = analysis.space.coords(analysis.to_op(v))
    return coords[min(coords)].inverse()


def _verify_chain(H: DiffOp, lam: GaussianRational, chain: List[DiffOp]) -> ExpPolyOp:
    il = I * lam
    for l, C in enumerate(chain):
        rhs = C * il
        if l + 1 < len(chain):
            rhs = rhs + chain[l + 1] * I
        assert commutator(H, C) == rhs, "chain relation [H, C_l] = i*lam*C_l + i*C_{l+1} failed"
    R = ExpPolyOp.from_chain(lam, chain)
    assert symmetry_defect(H, R).is_zero(), "assembled operator is not a symmetry"
    return R


def jordan_chains(analysis: AdjointAnalysis, lam) -> List[SymmetryChain]:
    """A maximal independent set of Jordan chains of ``M`` at ``lam``.

    Each chain starts at a top generalized eigenvector ``C_0`` and follows
    ``C_{l+1} = (M - lam) C_l`` down to an eigenvector.  Chains are scaled
    so that the first nonzero space coordinate of ``C_0`` equals 1.
    """
    lam = as_gq(lam)
    d = analysis.dimension
    if analysis.charpoly(lam):
        raise ValueError(f"{lam} is not an eigenvalue")
    N = analysis.matrix - Matrix.identity(d) * lam
    kernels: List[List[Vec]] = [[]]
    power = Matrix.identity(d)
    while True:
        power = power * N
        ker = [_to_sparse(v) for v in nullspace(power)]
        if len(ker) == len(kernels[-1]):
            break
        kernels.append(ker)
    nu = len(kernels) - 1
    tops: List[Tuple[int, Vec]] = []
    for s in range(nu, 0, -1):
        span = Span()
        for v in kernels[s - 1]:
            span.add(v)
        for level, top in tops:
            v = _to_dense(top, d)
            for _ in range(level - s):
                v = N * v
            span.add(_to_sparse(v))
        for v in kernels[s]:
            if span.add(v):
                tops.append((s, v))
    chains = []
    for level, top in tops:
        v = _to_dense(top, d)
        scale = _leading_scale(analysis, v)
        v = [x * scale for x in v]
        seq = []
        for _ in range(level):
            seq.append(analysis.to_op(v))
            v = N * v
        assert not any(v), "chain did not terminate"
        R = _verify_chain(analysis.H, lam, seq)
        chains.append(SymmetryChain(lam, seq, R))
    return chains


@dataclass
class Theorem3Verdict:
    has_time_dependent: bool
    case1: List[Tuple[GaussianRational, DiffOp]]  # exp(lam*t)*K0 with lam != 0
    case2: List[Tuple[DiffOp, DiffOp]]  # (K0, K1) giving K0 + t*K1
    mastersymmetries: List[DiffOp]
    case1_unavailable: bool = False  # nonzero eigenvalues exist but lie outside Q(i)


def _nilpotent(M: Matrix) -> bool:
    return (M ** M.rows).is_zero() if M.rows else True


def find_mastersymmetries(analysis: AdjointAnalysis) -> List[DiffOp]:
    """Basis of ``ker M^2`` modulo ``ker M``: ``[H,[H,K0]] = 0`` but ``[H,K0] != 0``."""
    M = analysis.matrix
    ker1 = [_to_sparse(v) for v in nullspace(M)]
    ker2 = [_to_sparse(v) for v in nullspace(M * M)]
    span = Span()
    for v in ker1:
        span.add(v)
    out = []
    for v in ker2:
        if span.add(v):
            K0 = analysis.to_op(_to_dense(v, analysis.dimension))
            inner = commutator(analysis.H, K0)
            assert not inner.is_zero() and commutator(analysis.H, inner).is_zero()
            out.append(K0)
    return out


def theorem3_decide(analysis: AdjointAnalysis) -> Theorem3Verdict:
    """Decide existence of time-dependent symmetries inside ``U``.

    The decision is made by rank computations alone: ``M`` not nilpotent,
    or ``ker M^2`` strictly larger than ``ker M``.
    """
    M = analysis.matrix
    H = analysis.H
    nilpotent = _nilpotent(M)
    masters = find_mastersymmetries(analysis)
    has_td = (not nilpotent) or bool(masters)
    case1 = []
    for lam, _ in analysis.eigenvalues:
        if not lam:
            continue
        for v in nullspace(M - Matrix.identity(M.rows) * lam):
            scale = _leading_scale(analysis, v)
            K0 = analysis.to_op([x * scale for x in v])
            assert commutator(H, K0) == K0 * (I * lam)
            case1.append((lam, K0))
    case2 = []
    for K0 in masters:
        K1 = _ad(H, K0)
        assert commutator(H, K0) == K1 * I and commutator(H, K1).is_zero()
        case2.append((K0, K1))
    unavailable = not nilpotent and analysis.residual.degree > 0
    return Theorem3Verdict(has_td, case1, case2, masters, unavailable)


def spectral_analysis(spec: SchrodingerSpec, q: int, D: Optional[int] = None, check_saturation: bool = True) -> AdjointAnalysis:
    """Invariant subspace, spectrum and Jordan chains for a time-independent spec."""
    if not spec.is_time_independent():
        raise ValueError("spectral path needs time-independent potentials")
    if D is None:
        D = q + 1
    H = build_H(spec)
    analysis = invariant_subspace(H, build_operator_space(spec.n, q, D))
    for lam, _ in analysis.eigenvalues:
        analysis.chains[lam] = jordan_chains(analysis, lam)
    if check_saturation:
        bigger = invariant_subspace(H, build_operator_space(spec.n, q, D + 1))
        analysis.saturated = bigger.dimension == analysis.dimension
    return analysis


def spectral_symmetry_basis(analysis: AdjointAnalysis, q: Optional[int] = None) -> SymmetryBasis:
    """All symmetries assembled from the Jordan chains (one per chain tail)."""
    ops: List[ExpPolyOp] = []
    chains: List[SymmetryChain] = []
    for lam in sorted(analysis.chains, key=lambda z: (z.re, z.im)):
        for ch in analysis.chains[lam]:
            chains.append(ch)
            ops.extend(ch.tail_symmetries())
    W = analysis.space
    return SymmetryBasis(
        W.n, W.q if q is None else q, ops, W.D, None, analysis.saturated, chains,
        outside_proven_range=W.n > 4,
    )
