import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from schrosym.determining import (
    SchrodingerSpec,
    build_H,
    build_L,
    generate_determining_system,
    restrict_time_independent,
    solve_polynomial_ansatz,
)
from schrosym.diffop import DiffOp, commutator
from schrosym.enumeration import count_Nhat, count_Ntilde
from schrosym.exactnum import GQ, I, Poly, Span
from strategies import diffops

HALF = GQ(1) / 2


def spec(n, V="0", A=None, e=1):
    return SchrodingerSpec.from_strings(n, V, A, e)


def branch0(ops):
    return [op.branches.get(GQ(0), DiffOp.zero(op.n)) for op in ops]


def span_dim(ops):
    s = Span()
    keyed = {}
    for op in ops:
        vec = {}
        for alpha, c in op.terms.items():
            for m, v in c.terms.items():
                vec[keyed.setdefault((alpha, m), len(keyed))] = v
        s.add(vec)
    return len(s)


def test_build_L_free():
    L = build_L(spec(1))
    assert L == DiffOp.time_derivative(1, I) + DiffOp.partial(1, 0, 2) * HALF


def test_build_H_oscillator_has_half_v():
    H = build_H(spec(1, "x1^2"))
    assert H == DiffOp.partial(1, 0, 2) * -HALF + DiffOp.multiplication(Poly.var(1, 0) ** 2 * HALF)


def test_build_H_magnetic_cross_terms():
    H = build_H(spec(2, A=["-1/2*x2", "1/2*x1"]))
    x1, x2 = Poly.var(2, 0), Poly.var(2, 1)
    expected = DiffOp(2, {
        (2, 0): -HALF,
        (0, 2): -HALF,
        (1, 0): x2 * GQ(0, -1) * HALF,
        (0, 1): x1 * GQ(0, 1) * HALF,
        (0, 0): (x1 ** 2 + x2 ** 2) * (GQ(1) / 8),
    })
    assert H == expected


def test_charge_scales_vector_potential():
    a = build_H(spec(1, A=["x1"], e=2))
    b = build_H(spec(1, A=["2*x1"], e=1))
    assert a == b


def test_time_dependent_vector_potential_rejected_for_H():
    s = spec(1, A=["t*x1"])
    with pytest.raises(ValueError):
        build_H(s)
    assert build_L(s).dt == I


def test_spec_validation():
    with pytest.raises(ValueError):
        spec(2, A=["x1"])
    with pytest.raises(ValueError):
        SchrodingerSpec(2, Poly.zero(1))


def test_free_particle_equations_n1_q1():
    system = generate_determining_system(spec(1), 1)
    assert sorted(system.equations) == [(0,), (1,), (2,)]
    x, t = Poly.var(1, 0), Poly.time(1)
    # b1 = 1 + x would violate the top equation d1 b1 = 0
    Q = DiffOp(1, {(1,): x + 1})
    assert system.evaluate(Q)[(2,)] == Poly.const(1, 1)
    # b1 = t, b0 = -i x: i d_t b1 + d1 b0 = i - i = 0, and the constant equation holds
    Q = DiffOp(1, {(1,): t, (0,): x * -I})
    assert system.evaluate(Q) == {}
    text = system.to_text()
    assert "b[1]_x1" in text and "b[0]_t" in text


def test_system_json_is_serializable():
    system = generate_determining_system(spec(2, "x1*x2"), 2)
    data = json.loads(json.dumps(system.to_json()))
    assert len(data) == len(system.equations)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["0", "x1^2", "x1^4 - t*x1", "x1*x2"]), st.data())
def test_system_matches_direct_commutator(V, data):
    n = 2 if "x2" in V else 1
    s = spec(n, V)
    Q = data.draw(diffops(n, max_order=2, with_t=True))
    system = generate_determining_system(s, 2)
    direct = commutator(build_L(s), Q)
    assert direct.dt == 0
    assert system.evaluate(Q) == {k: v for k, v in direct.terms.items()}


def test_system_with_vector_potential_matches_commutator():
    s = spec(2, "x1^2", ["-1/2*x2", "1/2*x1"])
    Q = DiffOp(2, {(1, 1): Poly.var(2, 0) * Poly.time(2), (0, 1): Poly.var(2, 1) ** 2, (0, 0): Poly.time(2)})
    assert generate_determining_system(s, 2).evaluate(Q) == commutator(build_L(s), Q).terms


def test_solve_free_particle_n1_q1():
    basis = solve_polynomial_ansatz(spec(1), 1, D=2, M=2)
    assert basis.dimension == 3 and basis.saturated
    x, t = Poly.var(1, 0), Poly.time(1)
    boost = DiffOp(1, {(1,): t * I, (0,): x})
    expected = [DiffOp.identity(1), DiffOp.partial(1, 0), boost]
    assert span_dim(branch0(basis.operators)) == 3
    assert span_dim(branch0(basis.operators) + expected) == 3


def test_solve_free_particle_n1_q2():
    assert solve_polynomial_ansatz(spec(1), 2, D=3, M=3).dimension == 6 == count_Nhat(1, 2)


def test_restrict_free_plane():
    basis = restrict_time_independent(spec(2), 1, D=2)
    assert basis.dimension == 4 == count_Ntilde(2, 1)
    x1, x2 = Poly.var(2, 0), Poly.var(2, 1)
    rot = DiffOp(2, {(0, 1): x1, (1, 0): -x2})
    assert span_dim(branch0(basis.operators) + [rot]) == 4


@pytest.mark.parametrize("n, q", [(1, 1), (1, 2), (1, 3), (2, 1), (2, 2), (3, 1), (3, 2)])
def test_restrict_free_matches_killing_count(n, q):
    assert restrict_time_independent(spec(n), q, D=q).dimension == count_Ntilde(n, q)


def test_restrict_oscillator_is_polynomial_in_H():
    # centralizer of H inside order <= 2 is span{1, H}; a+ a- = H - 1/2 adds nothing
    s = spec(1, "x1^2")
    basis = restrict_time_independent(s, 2, D=3)
    assert basis.dimension == 2
    assert span_dim(branch0(basis.operators) + [build_H(s), DiffOp.identity(1)]) == 2


def test_restrict_quartic():
    s = spec(1, "x1^4")
    assert restrict_time_independent(s, 2, D=3).dimension == 1
    basis = restrict_time_independent(s, 2, D=4)
    assert basis.dimension == 2 <= count_Ntilde(1, 2)
    assert span_dim(branch0(basis.operators) + [build_H(s)]) == 2


def test_restrict_rejects_time_dependent():
    with pytest.raises(ValueError):
        restrict_time_independent(spec(1, "t*x1"), 1)


@pytest.mark.parametrize(
    "n, V, A, q",
    [(1, "x1^2", None, 2), (1, "t*x1", None, 1), (2, "x1^2 + x2^2", None, 1), (2, "0", ["-1/2*x2", "1/2*x1"], 1)],
)
def test_soundness_and_bound(n, V, A, q):
    s = spec(n, V, A)
    basis = solve_polynomial_ansatz(s, q, D=q + 1, M=q + 1, check_saturation=False)
    L = build_L(s)
    for Q in branch0(basis.operators):
        assert commutator(L, Q).is_zero()
    assert basis.dimension <= count_Nhat(n, q)


def test_linear_potential_in_time():
    # V = 2*t*x1 (force linear in t): the dimension matches the free particle
    basis = solve_polynomial_ansatz(spec(1, "2*t*x1"), 1, D=2, M=3)
    assert basis.dimension == 3


def test_monotone_in_bounds():
    s = spec(1, "x1^2")
    dims = {(D, M): solve_polynomial_ansatz(s, 1, D=D, M=M, check_saturation=False).dimension
            for D in range(3) for M in range(4)}
    for (D, M), d in dims.items():
        if (D + 1, M) in dims:
            assert dims[(D + 1, M)] >= d
        if (D, M + 1) in dims:
            assert dims[(D, M + 1)] >= d


FREE_GRID = [(n, q) for n in range(1, 5) for q in range(4)]


@pytest.mark.parametrize("n, q", [c for c in FREE_GRID if c != (4, 3)])
def test_free_saturates_at_nhat(n, q):
    basis = solve_polynomial_ansatz(spec(n), q, D=q + 1, M=q + 1)
    assert basis.dimension == count_Nhat(n, q) and basis.saturated


@pytest.mark.slow
def test_free_saturates_at_nhat_n4_q3():
    basis = solve_polynomial_ansatz(spec(4), 3, D=4, M=4)
    assert basis.dimension == count_Nhat(4, 3) == 490 and basis.saturated


def test_closure_under_commutator():
    s = spec(1)
    L = build_L(s)
    ops = branch0(solve_polynomial_ansatz(s, 2, D=3, M=3, check_saturation=False).operators)
    for a in ops:
        for b in ops:
            assert commutator(L, commutator(a, b)).is_zero()


def test_default_bounds():
    basis = solve_polynomial_ansatz(spec(1), 1, check_saturation=False)
    assert (basis.D, basis.M) == (2, 2) and basis.dimension == 3
