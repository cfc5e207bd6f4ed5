"""Normal form construction, validity checks, invariants."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crjets.rational import ComplexRational as CR
from crjets.series import TruncatedSeries as TS
from crjets.hypersurface import (
    GRAPH_VARS,
    SURFACE_VARS,
    InfiniteUpTo,
    NormalFormSurface,
    RealGraph,
    SurfaceError,
    UnknownAbove,
    from_real_graph,
    heisenberg,
    infinite_type_model,
    levi_flat_model,
    quartic_model,
)

I = CR(0, 1)


def graph(order, coeffs):
    return RealGraph(TS(GRAPH_VARS, order, coeffs))


def test_from_real_graph_heisenberg():
    surf = from_real_graph(graph(8, {(1, 1, 0): 1}))
    assert surf == heisenberg(8)


def test_from_real_graph_quartic():
    surf = from_real_graph(graph(8, {(2, 2, 0): 1}))
    assert surf == quartic_model(8)


def test_from_real_graph_infinite_type():
    surf = from_real_graph(graph(8, {(1, 1, 1): 1}))
    assert surf == infinite_type_model(8)
    # closed-form check: Q = t (1 + i z x) / (1 - i z x)
    izx = TS(SURFACE_VARS, 8, {(1, 1, 0): I})
    t = TS.variable("t", SURFACE_VARS, 8)
    assert surf.q == (t * (1 + izx)) / (1 - izx)


def test_from_real_graph_rejects_non_normal_input():
    with pytest.raises(SurfaceError):
        from_real_graph(graph(6, {(1, 0, 0): 1}))


def test_check_normal_pass_and_fail():
    assert heisenberg(10).check_normal().passed
    assert levi_flat_model(6).check_normal().passed
    bad = NormalFormSurface(
        TS(SURFACE_VARS, 6, {(0, 0, 1): 1, (1, 0, 0): 1})
    )
    report = bad.check_normal()
    assert not report.passed
    assert report.violations[0][1] == (1, 0, 0)


def test_check_reality_pass():
    assert heisenberg(10).check_reality().passed
    assert levi_flat_model(6).check_reality().passed


def test_check_reality_detects_missing_i():
    bad = NormalFormSurface(TS(SURFACE_VARS, 6, {(0, 0, 1): 1, (1, 1, 0): 1}))
    report = bad.check_reality()
    assert not report.passed
    # brute-force oracle: Q(z,x,Qbar(x,z,w)) - w = (w + zx) + zx - w = 2 z x
    assert report.residual == TS(("z", "x", "w"), 6, {(1, 1, 0): 2})


def test_q_table_heisenberg():
    table = heisenberg(10).q_table(4)
    assert table[(1, 0)] == TS(("x",), 9, {(1,): 2 * I})
    assert all(s.is_zero for key, s in table.items() if key != (1, 0))


def test_q_table_quartic():
    table = quartic_model(10).q_table(4)
    assert table[(2, 0)] == TS(("x",), 8, {(2,): 4 * I})
    assert table[(1, 0)].is_zero and table[(1, 1)].is_zero


def test_q_table_infinite_type():
    table = infinite_type_model(10).q_table(3)
    assert table[(1, 1)] == TS(("x",), 8, {(1,): 2 * I})
    assert table[(1, 0)].is_zero and table[(2, 0)].is_zero


def test_q_vanishes_at_origin():
    for surf in (heisenberg(8), quartic_model(8), infinite_type_model(8)):
        for (alpha, mu), series in surf.q_table(5).items():
            assert alpha >= 1
            assert series.coefficient((0,)).is_zero


def test_invariants_heisenberg():
    inv = heisenberg(12).compute_invariants()
    assert inv.tuple() == (1, 1, 0, 1, 1)
    assert inv.finite_type is True
    assert inv.levi_flat is False


def test_invariants_quartic():
    inv = quartic_model(12).compute_invariants()
    assert inv.tuple() == (2, 2, 0, 2, 2)
    assert inv.finite_type is True


def test_invariants_infinite_type():
    inv = infinite_type_model(12).compute_invariants()
    assert (inv.m0, inv.alpha0, inv.mu0, inv.ell) == (2, 1, 1, 1)
    assert inv.beta0 is None
    assert inv.finite_type is False
    assert inv.levi_flat is False


def test_invariants_levi_flat():
    inv = levi_flat_model(12).compute_invariants()
    assert inv.m0 == InfiniteUpTo(12)
    assert inv.levi_flat == UnknownAbove(12)
    assert inv.finite_type is False
    assert inv.alpha0 is None and inv.mu0 is None


def test_ell_at_least_alpha0_on_corpus():
    for surf in (heisenberg(12), quartic_model(12), infinite_type_model(12)):
        inv = surf.compute_invariants()
        assert not inv.ell_below_alpha0


# ----------------------------------------------------------------------
# invariance under normal-form-preserving dilations (z,w) -> (lam z, rho w)


def dilate_surface(surf, lam: CR, rho: Fraction) -> NormalFormSurface:
    n = surf.order
    inv_rho = CR(Fraction(1) / rho)
    zg = TS.variable("z", SURFACE_VARS, n)
    xg = TS.variable("x", SURFACE_VARS, n)
    tg = TS.variable("t", SURFACE_VARS, n)
    pulled = surf.q.compose(
        {"z": zg * (CR(1) / lam), "x": xg * (CR(1) / lam.conjugate()), "t": tg * inv_rho}
    )
    return NormalFormSurface(pulled * CR(rho))


@pytest.mark.parametrize(
    "lam,rho",
    [
        (CR(2), Fraction(3)),
        (CR(0, 1), Fraction(1, 2)),
        (CR(Fraction(3, 5), Fraction(4, 5)), Fraction(-2)),
    ],
)
def test_invariants_stable_under_dilations(lam, rho):
    for make in (heisenberg, quartic_model, infinite_type_model):
        surf = make(10)
        moved = dilate_surface(surf, lam, rho)
        moved.validate()
        assert moved.compute_invariants().tuple() == surf.compute_invariants().tuple()


# ----------------------------------------------------------------------
# random admissible graphs: construction always lands in normal form

small_rationals = st.fractions(
    min_value=Fraction(-3), max_value=Fraction(3), max_denominator=4
)


@st.composite
def admissible_graphs(draw):
    order = draw(st.integers(min_value=4, max_value=7))
    base = {}
    for _ in range(draw(st.integers(min_value=1, max_value=3))):
        a = draw(st.integers(min_value=1, max_value=3))
        b = draw(st.integers(min_value=1, max_value=3))
        m = draw(st.integers(min_value=0, max_value=2))
        if a + b + m > order:
            continue
        base[(a, b, m)] = CR(draw(small_rationals), draw(small_rationals))
    rho = TS(GRAPH_VARS, order, base)
    phi = rho + rho.conjugate().rename_variables({"z": "x", "x": "z"})
    return RealGraph(phi)


@settings(max_examples=20, deadline=None)
@given(admissible_graphs())
def test_from_real_graph_always_normal_and_real(g):
    surf = from_real_graph(g)
    assert surf.check_normal().passed
    assert surf.check_reality().passed
