"""Coefficient-ring layer: residues, truncated series, Weierstrass splitting."""

from __future__ import annotations

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from iwafitt.errors import InsufficientPrecision, RingMismatch
from iwafitt.ring import (
    PadicNumber,
    SpecializationRing,
    TruncatedSeries,
    WeierstrassForm,
    padic_valuation,
    weierstrass_divide,
    weierstrass_prepare,
)

S = lambda p, K, m, cs: TruncatedSeries.make(p, K, m, cs)


# ---------------------------------------------------------------- residues

def test_valuation_examples():
    assert padic_valuation(3, 9, 4) == 2
    assert padic_valuation(3, 0, 4) == 4
    assert padic_valuation(5, 7, 3) == 0


def test_valuation_reduces_first():
    # 81 = 3^4 is the zero residue at K=4, so the convention value applies
    assert padic_valuation(3, 81, 4) == 4
    assert padic_valuation(3, 81 + 3, 4) == 1


def test_padic_number_basics():
    x = PadicNumber(3, 4, 100)
    assert x.value == 100 % 81
    y = PadicNumber(3, 4, 5)
    assert (x + y).value == (100 + 5) % 81
    assert (x * y).value == (100 * 5) % 81
    assert (-y).value == 81 - 5
    assert y.inverse() * y == PadicNumber(3, 4, 1)
    assert PadicNumber(3, 4, 0).valuation() == 4


def test_padic_number_mismatch():
    with pytest.raises(RingMismatch):
        PadicNumber(3, 4, 1) + PadicNumber(5, 4, 1)
    with pytest.raises(ZeroDivisionError):
        PadicNumber(3, 4, 6).inverse()


# ------------------------------------------------------------ ring axioms

def _triples_at(pkm):
    p, K, m = pkm
    one = st.lists(st.integers(0, p**K - 1), min_size=m, max_size=m).map(
        lambda cs: S(p, K, m, cs)
    )
    return st.tuples(one, one, one)


series_triples = st.tuples(
    st.sampled_from([2, 3, 5]), st.integers(2, 4), st.integers(2, 6)
).flatmap(_triples_at)


@settings(max_examples=1000, deadline=None)
@given(series_triples)
def test_series_ring_axioms(triple):
    a, b, c = triple
    assert (a + b) + c == a + (b + c)
    assert a + b == b + a
    assert (a * b) * c == a * (b * c)
    assert a * b == b * a
    assert a * (b + c) == a * b + a * c
    zero = TruncatedSeries.zero(a.p, a.K, a.m)
    one = TruncatedSeries.one(a.p, a.K, a.m)
    assert a + zero == a
    assert a * one == a
    assert a + (-a) == zero


def test_series_shape_is_enforced():
    with pytest.raises(ValueError):
        TruncatedSeries(3, 4, 3, (1, 2))
    with pytest.raises(RingMismatch):
        S(3, 4, 3, [1]) + S(3, 4, 4, [1])


def test_series_unit_inverse():
    u = S(3, 5, 6, [2, 7, 1, 0, 4, 9])
    assert u * u.inverse() == TruncatedSeries.one(3, 5, 6)
    with pytest.raises(ZeroDivisionError):
        S(3, 5, 6, [3, 1]).inverse()


def test_series_json_round_trip():
    f = S(5, 3, 4, [1, 120, 3, 0])
    assert TruncatedSeries.from_dict(f.to_dict()) == f


# ------------------------------------------------- Weierstrass preparation

def test_prepare_already_distinguished():
    f = S(3, 6, 8, [3, 1])
    w = weierstrass_prepare(f)
    assert w.mu == 0
    assert w.distinguished == S(3, 6, 8, [3, 1])
    assert w.unit == TruncatedSeries.one(3, 6, 8)


def test_prepare_pure_content():
    f = S(3, 6, 8, [0, 3])
    w = weierstrass_prepare(f)
    assert w.mu == 1
    assert w.distinguished == S(3, 5, 8, [0, 1])
    assert w.unit == TruncatedSeries.one(3, 5, 8)


def test_prepare_cubic_against_product_oracle():
    # oracle: expand (2+T)(T^2+3) independently, feed the expansion in,
    # and demand the canonical factors back
    T = sympy.symbols("T")
    expanded = sympy.Poly((2 + T) * (T**2 + 3), T).all_coeffs()[::-1]
    assert expanded == [6, 3, 2, 1]
    f = S(3, 6, 8, expanded)
    assert f == S(3, 6, 8, [6, 3, 2, 1])
    w = weierstrass_prepare(f)
    assert w.mu == 0
    assert w.distinguished == S(3, 6, 8, [3, 0, 1])
    assert w.unit == S(3, 6, 8, [2, 1])
    assert w.recompose(6) == f


def test_prepare_zero_rejected():
    with pytest.raises(InsufficientPrecision):
        weierstrass_prepare(TruncatedSeries.zero(3, 4, 5))
    # 9*g dies entirely at K=2
    with pytest.raises(InsufficientPrecision):
        weierstrass_prepare(S(3, 2, 5, [9, 18]))


dist_polys = st.integers(0, 3).flatmap(
    lambda d: st.lists(st.integers(0, 3 ** 3 - 1).map(lambda c: 3 * c),
                       min_size=d, max_size=d)
)


def _faithful_pair(low, unit_body, c0):
    # keep deg(P*U) < m so nothing wraps past the truncation; only then is
    # the factor pair pinned down exactly by the product
    m = 8
    d = len(low)
    body = unit_body[: m - d - 1]
    return low + [1], [c0] + body


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 3 ** 4 - 1).filter(lambda c: c % 3 != 0),
       st.lists(st.integers(0, 3 ** 4 - 1), min_size=7, max_size=7),
       dist_polys, st.integers(0, 3))
def test_prepare_recompose_round_trip(c0, body, low, mu):
    p, K, m = 3, 7, 8
    p_coeffs, u_coeffs = _faithful_pair(low, body, c0)
    U = S(p, K - mu, m, u_coeffs)
    P = S(p, K - mu, m, p_coeffs)
    f = (P * U).lift_precision(K).scale(p ** mu)
    w = weierstrass_prepare(f)
    assert w.mu == mu
    assert w.distinguished == P
    assert w.unit == U
    assert w.recompose(K) == f


def test_prepare_with_wraparound_keeps_recompose_contract():
    # U has a term at T^7; the product pushes it past T^8, so only the
    # recomposition (not the unit itself) is recoverable
    U = S(3, 7, 8, [1, 0, 0, 0, 0, 0, 0, 1])
    P = S(3, 7, 8, [3, 1])
    f = P * U
    w = weierstrass_prepare(f)
    assert w.mu == 0
    assert w.distinguished == P
    assert w.recompose(7) == f


# --------------------------------------------------- Weierstrass division

def test_divide_by_self():
    P = S(3, 4, 6, [3, 0, 1])
    q, r = weierstrass_divide(P, P)
    assert q == TruncatedSeries.one(3, 4, 6)
    assert r.is_zero()


def test_divide_cubic_long_division_oracle():
    T = sympy.symbols("T")
    q_sym, r_sym = sympy.div(T**3, T + 3, T)
    assert sympy.Poly(q_sym, T).all_coeffs()[::-1] == [9, -3, 1]
    assert sympy.Poly(r_sym, T).all_coeffs()[::-1] == [-27]
    K = 4
    f = S(3, K, 5, [0, 0, 0, 1])
    P = S(3, K, 5, [3, 1])
    q, r = weierstrass_divide(f, P)
    assert q == S(3, K, 5, [9, -3 % 81, 1])
    assert r == S(3, K, 5, [-27 % 81])
    assert q * P + r == f


def test_divide_zero():
    P = S(3, 4, 5, [3, 1])
    q, r = weierstrass_divide(TruncatedSeries.zero(3, 4, 5), P)
    assert q.is_zero() and r.is_zero()


def test_divide_rejects_non_distinguished():
    with pytest.raises(ValueError):
        weierstrass_divide(S(3, 4, 5, [1]), S(3, 4, 5, [1, 1]))


any_series = st.lists(st.integers(0, 3 ** 5 - 1), min_size=6, max_size=6).map(
    lambda cs: S(3, 5, 6, cs)
)


@settings(max_examples=200, deadline=None)
@given(any_series, dist_polys)
def test_divide_recompose(f, low):
    P = S(3, 5, 6, low + [1])
    q, r = weierstrass_divide(f, P)
    assert q * P + r == f
    d = len(low)
    assert all(c == 0 for c in r.coeffs[d:])


def test_weierstrass_form_validation():
    with pytest.raises(ValueError):
        WeierstrassForm(0, S(3, 4, 5, [1, 1]), TruncatedSeries.one(3, 4, 5))
    with pytest.raises(ValueError):
        WeierstrassForm(0, S(3, 4, 5, [3, 1]), S(3, 4, 5, [3]))


# ----------------------------------------------------- specialization rings

def test_eisenstein_ring_valuations():
    for j in (1, 2, 5):
        ring = SpecializationRing(p=3, j=j, K=6, kind="eisenstein")
        p_img = ring.image_valuation(S(3, 6, 8, [3]))
        assert p_img == j
        t_img = ring.image_valuation(S(3, 6, 8, [0, 1]))
        assert t_img == 1
        assert ring.ramification_index == j


def test_unramified_ring_valuations():
    ring = SpecializationRing(p=3, j=4, K=9, kind="unramified", a=0)
    assert ring.image_valuation(S(3, 9, 8, [3])) == 1
    # T maps to a - p^j = -81, valuation 4
    assert ring.image_valuation(S(3, 9, 8, [0, 1])) == 4
    assert ring.ramification_index == 1


def test_eisenstein_relation_collapses():
    # p + T^j is exactly the defining relation, so its image is 0
    ring = SpecializationRing(p=3, j=2, K=4, kind="eisenstein")
    f = S(3, 4, 6, [3, 0, 1])
    assert ring.is_zero_image(f)
    assert ring.image_valuation(f) == ring.valuation_cap


@settings(max_examples=300, deadline=None)
@given(st.lists(st.integers(0, 3 ** 4 - 1), min_size=5, max_size=5),
       st.lists(st.integers(0, 3 ** 4 - 1), min_size=5, max_size=5),
       st.integers(1, 4))
def test_eisenstein_valuation_additive(cs1, cs2, j):
    ring = SpecializationRing(p=3, j=j, K=4, kind="eisenstein")
    f, g = S(3, 4, 5, cs1), S(3, 4, 5, cs2)
    vf, vg = ring.image_valuation(f), ring.image_valuation(g)
    vfg = ring.image_valuation(f * g)
    # additivity is exact below both the p-precision cap and the T-truncation
    # (the discarded tail T^5*(...) has image valuation >= 5 here)
    if vf + vg < min(5, ring.valuation_cap):
        assert vfg == vf + vg


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
