"""Formal ODE coefficients, resonances, determination orders, kernel chains."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crjets.rational import ComplexRational as CR
from crjets.series import TruncatedSeries as TS
from crjets.linalg import det, invert, mat_mul
from crjets.odejets import (
    InconsistentSeed,
    OdeError,
    SingularODE,
    WrongGamma,
    determination_order,
    formal_coefficients,
    kernel_chain_diagnostic,
    linearization_at_origin,
    residual,
    resonance_set,
    rhs_jet,
    zero_solution,
)

ORDER = 24


def scalar_ode(gamma, p_coeffs, q_coeffs=None, order=ORDER + 6):
    variables = ("x", "y")
    p = TS(variables, order, p_coeffs)
    q = TS(variables, order, q_coeffs or {(0, 0): 1})
    return SingularODE(gamma, [p], q)


def system_ode(gamma, matrix, order=ORDER + 8):
    """Linear right-hand side p = A y, q = 1."""
    n = len(matrix)
    variables = ("x",) + tuple(f"y{i + 1}" for i in range(n))
    ps = []
    for i in range(n):
        coeffs = {}
        for j in range(n):
            a = CR.coerce(matrix[i][j])
            if not a.is_zero:
                mi = tuple(1 if k == j + 1 else 0 for k in range(n + 1))
                coeffs[mi] = a
        ps.append(TS(variables, order, coeffs))
    q = TS(variables, order, {(0,) * (n + 1): 1})
    return SingularODE(gamma, ps, q)


# ----------------------------------------------------------------------
# rhs_jet


def test_rhs_jet_linear():
    ode = scalar_ode(0, {(0, 1): 3})
    out = rhs_jet(ode, {0: (0,), 1: (0,), 2: (Fraction(1, 2),)})
    assert out == TS(("x",), 2, {(2,): Fraction(3, 2)})


def test_rhs_jet_square():
    ode = scalar_ode(0, {(0, 2): 1})
    out = rhs_jet(ode, {0: (0,), 1: (1,), 2: (0,)})
    assert out == TS(("x",), 2, {(2,): 1})


def test_rhs_jet_geometric_divisor():
    # f = y / (1 + x) with y = x: oracle is the alternating geometric series
    ode = scalar_ode(0, {(0, 1): 1}, {(0, 0): 1, (1, 0): 1})
    table = {s: (1,) if s == 1 else (0,) for s in range(7)}
    out = rhs_jet(ode, table)
    expected = TS(("x",), 6, {(j,): (-1) ** (j - 1) for j in range(1, 7)})
    assert out == expected


# ----------------------------------------------------------------------
# formal_coefficients


def test_resonant_scalar_gamma0():
    # x y' = 2 y: every order except 2 forces zero; order 2 stays free
    ode = scalar_ode(0, {(0, 1): 2})
    run = formal_coefficients(ode, {}, 10)
    assert run.free_orders == (2,)
    entry = next(e for e in run.obstruction_ledger if e.order == 2)
    assert entry.status == "free"
    assert entry.kernel_dim == 1
    for s in range(11):
        if s != 2:
            assert run.coefficients[s] == (CR(0),)


def test_resonant_scalar_seeded():
    ode = scalar_ode(0, {(0, 1): 2})
    run = formal_coefficients(ode, {2: (Fraction(5),)}, 10)
    assert run.fully_determined
    assert run.coefficients[2] == (CR(5),)
    assert all(run.coefficients[s] == (CR(0),) for s in range(11) if s != 2)
    # back-substitution: y = 5 x^2 solves x y' = 2 y exactly
    assert all(r.is_zero for r in residual(ode, run))


def test_gamma1_chain_forces_zero():
    # x^2 y' = y: a_0 = 0 forced, then (s-1) a_{s-1} = a_s chain gives 0
    ode = scalar_ode(1, {(0, 1): 1})
    run = formal_coefficients(ode, {}, 12)
    assert run.fully_determined
    assert all(run.coefficients[s] == (CR(0),) for s in range(13))


def test_zero_rhs_extends_by_zeros():
    ode = scalar_ode(1, {})
    run = formal_coefficients(ode, {1: (Fraction(0),)}, 8)
    assert run.fully_determined
    assert all(run.coefficients[s] == (CR(0),) for s in range(9))


def test_inconsistent_seed_detected():
    # x^2 y' = y with a_1 = 1 contradicts the chain at later orders
    ode = scalar_ode(1, {(0, 1): 1})
    with pytest.raises(InconsistentSeed):
        formal_coefficients(ode, {1: (Fraction(1),)}, 12)


def test_nonzero_y0_rejected():
    ode = scalar_ode(0, {(0, 1): 1})
    with pytest.raises(OdeError):
        formal_coefficients(ode, {0: (Fraction(1),)}, 4)


# ----------------------------------------------------------------------
# resonance_set


def test_resonance_simple():
    assert resonance_set(scalar_ode(0, {(0, 1): 2}), 24) == {2}
    assert resonance_set(scalar_ode(0, {(0, 1): -1}), 24) == set()
    assert resonance_set(scalar_ode(0, {}), 24) == set()


def test_resonance_requires_gamma0():
    with pytest.raises(WrongGamma):
        resonance_set(scalar_ode(1, {(0, 1): 1}), 10)


def test_resonance_with_denominator():
    # f = 3 y / (3 - x): f_y(0,0) = 1
    ode = scalar_ode(0, {(0, 1): 3}, {(0, 0): 3, (1, 0): -1})
    assert linearization_at_origin(ode) == [[CR(1)]]
    assert resonance_set(ode, 10) == {1}


def test_resonance_2x2_constructed():
    # conjugated diagonal matrices with known eigenvalues
    s = [[Fraction(2), Fraction(1)], [Fraction(1), Fraction(1)]]
    s_inv = invert(s)
    eigs = (Fraction(3), Fraction(7, 2))
    d = [[CR(eigs[0]), CR(0)], [CR(0), CR(eigs[1])]]
    a = mat_mul(mat_mul(s, d), s_inv)
    ode = system_ode(0, a)
    assert resonance_set(ode, 24) == {3}


def test_linear_system_defer_orders_match_resonances():
    a = [[Fraction(4), Fraction(1)], [Fraction(0), Fraction(-2)]]
    ode = system_ode(0, a)
    run = formal_coefficients(ode, {}, 12)
    defer = {e.order for e in run.obstruction_ledger if e.status != "resolved"}
    assert defer == resonance_set(ode, 12)


# ----------------------------------------------------------------------
# determination_order


def test_determination_resonant():
    ode = scalar_ode(0, {(0, 1): 2})
    base = zero_solution(ode, ORDER)
    assert determination_order(ode, base, ORDER) == 2


def test_determination_gamma1():
    ode = scalar_ode(1, {(0, 1): 1})
    base = zero_solution(ode, ORDER)
    assert determination_order(ode, base, ORDER) == 0


def test_determination_zero_rhs():
    ode = scalar_ode(1, {})
    base = zero_solution(ode, ORDER)
    assert determination_order(ode, base, ORDER) == 0


def test_determination_below_k_leaves_freedom():
    ode = scalar_ode(0, {(0, 1): 2})
    run = formal_coefficients(ode, {1: (Fraction(0),)}, 12)
    assert 2 in run.free_orders


def test_back_substitution_of_nonzero_solution():
    # x y' = 2 y has solutions c x^2; check the recursion reproduces one
    ode = scalar_ode(0, {(0, 1): 2})
    run = formal_coefficients(ode, {2: (Fraction(3, 4),)}, 16)
    assert all(r.is_zero for r in residual(ode, run))


# ----------------------------------------------------------------------
# kernel chain


def test_chain_invertible_q0():
    ode = scalar_ode(1, {(0, 1): 1})
    report = kernel_chain_diagnostic(ode, {0: (0,)}, r_max=4)
    assert report.ker_q0_dim == 0
    assert all(row.terminated_at == 0 for row in report.rows)


def test_chain_singular_q0_one_step():
    # x^2 y' = x: Q0 = f_y(0,0) = 0, kernel R; first elimination step kills it
    ode = scalar_ode(1, {(1, 0): 1})
    report = kernel_chain_diagnostic(ode, {0: (0,)}, r_max=4)
    assert report.ker_q0_dim == 1
    for row in report.rows:
        assert row.terminated_at == 1
        assert row.dims == (1, 0)


def test_chain_termination_bound_scalar():
    # n = 1: the chain must terminate within n * gamma steps on the corpus
    for gamma, p in ((1, {(0, 1): 1}), (1, {(1, 0): 1})):
        ode = scalar_ode(gamma, p)
        report = kernel_chain_diagnostic(ode, {0: (0,)}, r_max=3)
        assert report.bound == gamma
        assert all(
            row.terminated_at is not None and row.terminated_at <= gamma
            for row in report.rows
        )


def test_chain_requires_gamma_positive():
    with pytest.raises(WrongGamma):
        kernel_chain_diagnostic(scalar_ode(0, {(0, 1): 1}), {0: (0,)})


# ----------------------------------------------------------------------
# properties


@settings(max_examples=15, deadline=None)
@given(
    st.fractions(min_value=Fraction(-3), max_value=Fraction(3), max_denominator=3),
    st.integers(min_value=1, max_value=4),
)
def test_seeded_runs_back_substitute(c, k):
    ode = scalar_ode(0, {(0, 1): 2})
    seed = {2: (c,)}
    run = formal_coefficients(ode, seed, 10 + k)
    assert all(r.is_zero for r in residual(ode, run))


@settings(max_examples=10, deadline=None)
@given(
    st.integers(min_value=-3, max_value=5),
    st.integers(min_value=-3, max_value=5),
)
def test_resonances_are_integer_eigenvalues(e1, e2):
    d = [[Fraction(e1), Fraction(0)], [Fraction(1), Fraction(e2)]]
    ode = system_ode(0, d)
    expected = {e for e in (e1, e2) if 1 <= e <= 20}
    assert resonance_set(ode, 20) == expected
