"""Minor enumeration, diagonalization, and the structure formulas."""

import random

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy.matrices.normalforms import smith_normal_form as zz_snf

from iwafitt.errors import InsufficientPrecision, NotTorsion, RingMismatch
from iwafitt.fitting import (
    ElementaryDVRModule,
    PresentationMatrix,
    RingDescriptor,
    direct_sum_fitting,
    dvr_structure,
    fitting_from_structure,
    fitting_ideal,
    smith_normal_form,
)
from iwafitt.ring import TruncatedSeries, padic_valuation

DVR = RingDescriptor("dvr", 3, 12)


def dvr_matrix(entries, ring=DVR):
    return PresentationMatrix.make(ring, entries)


def exp_of(M, i):
    return fitting_ideal(M, i).exponent


# ---------------------------------------------------------------- examples


def test_fitting_diag_123():
    M = dvr_matrix([[3, 0, 0], [0, 9, 0], [0, 0, 27]])
    # 2x2 minors of the diagonal are {p^3, p^4, p^5}; the minimum wins
    assert exp_of(M, 1) == 3
    assert exp_of(M, 0) == 6
    assert exp_of(M, 2) == 1
    assert exp_of(M, 3) == 0


def test_fitting_single_relation():
    for k in (1, 2, 5):
        M = dvr_matrix([[3**k]])
        assert exp_of(M, 0) == k
        assert exp_of(M, 1) == 0


def test_fitting_empty_presentation_is_full_ring():
    M = PresentationMatrix(DVR, 0, 0, ())
    assert exp_of(M, 0) == 0


def test_fitting_zero_ideal_when_relations_run_out():
    # two generators, one relation: the order-2 minors do not exist
    M = dvr_matrix([[3], [9]])
    assert exp_of(M, 0) == "full"
    arting = RingDescriptor("Zp_mod_pk", 3, 4)
    N = PresentationMatrix.make(arting, [[3], [9]])
    assert exp_of(N, 0) == 4


def test_fitting_rejects_bad_index():
    M = dvr_matrix([[3]])
    with pytest.raises(RingMismatch):
        fitting_ideal(M, -1)
    with pytest.raises(RingMismatch):
        fitting_ideal(M, True)


def test_fitting_chain_on_small_example():
    M = dvr_matrix([[3, 1, 0], [0, 9, 3], [27, 0, 9]])
    exps = [exp_of(M, i) for i in range(4)]
    vals = [12 if e == "full" else e for e in exps]
    assert vals == sorted(vals, reverse=True)


# ---------------------------------------------------------------- Smith form


def test_snf_permuted_diagonal():
    cert = smith_normal_form(dvr_matrix([[9, 0], [0, 3]]))
    assert cert.exponents == (1, 2)


def test_snf_dense_two_by_two():
    # divisors of [[3,3],[3,9]]: gcd has valuation 1 and the determinant
    # 27-9 has valuation 2, so both exponents are 1
    cert = smith_normal_form(dvr_matrix([[3, 3], [3, 9]]))
    assert cert.exponents == (1, 1)


def test_snf_unit_divisor():
    cert = smith_normal_form(dvr_matrix([[1, 0], [0, 3]]))
    assert cert.exponents == (0, 1)


def test_snf_certificate_shape():
    M = dvr_matrix([[3, 3], [3, 9]])
    cert = smith_normal_form(M)
    assert cert.verifies(M)
    q = 3**12
    for i, e in enumerate(cert.exponents):
        assert cert.diagonal[i][i] == 3**e % q
    # off-diagonal must be clean zeros
    assert all(
        cert.diagonal[i][j] == 0
        for i in range(2)
        for j in range(2)
        if i != j
    )
    # the transformations are products of elementary ops: unit determinant
    for mat in (cert.left, cert.right):
        det = sympy.Matrix([list(r) for r in mat]).det()
        assert padic_valuation(3, int(det) % q, 12) == 0


def test_snf_refuses_zero_pivot_at_precision():
    with pytest.raises(InsufficientPrecision):
        smith_normal_form(dvr_matrix([[0]]))
    cert = smith_normal_form(dvr_matrix([[0]]), allow_zero_block=True)
    assert cert.exponents == (12,)


def test_snf_requires_dvr_kind():
    arting = RingDescriptor("Zp_mod_pk", 3, 4)
    with pytest.raises(RingMismatch):
        smith_normal_form(PresentationMatrix.make(arting, [[3]]))


# ---------------------------------------------------------------- structure


def test_structure_examples():
    assert dvr_structure(
        dvr_matrix([[3, 0, 0], [0, 9, 0], [0, 0, 27]])
    ).exponents == (1, 2, 3)
    assert dvr_structure(dvr_matrix([[3, 3], [3, 9]])).exponents == (1, 1)
    assert dvr_structure(dvr_matrix([[3**5]])).exponents == (5,)
    assert dvr_structure(dvr_matrix([[1, 0], [0, 3]])).exponents == (1,)


def test_structure_free_summand_always_rejected():
    M = dvr_matrix([[3], [9]])
    with pytest.raises(NotTorsion):
        dvr_structure(M)
    with pytest.raises(NotTorsion):
        dvr_structure(M, assume_torsion=True)


def test_structure_zero_divisor_needs_vouching():
    M = dvr_matrix([[3, 0], [0, 0]])
    with pytest.raises(NotTorsion):
        dvr_structure(M)
    assert dvr_structure(M, assume_torsion=True).exponents == (1, 12)


# ------------------------------------------------------- structure formulas


def test_fitting_from_structure_examples():
    E = ElementaryDVRModule((1, 2, 3))
    assert [fitting_from_structure(E, i) for i in range(4)] == [6, 3, 1, 0]
    assert fitting_from_structure(ElementaryDVRModule((7,)), 0) == 7
    assert fitting_from_structure(ElementaryDVRModule((1, 1, 2, 2)), 1) == 4


def test_fitting_from_structure_matches_minor_oracle():
    # the formula against direct minor enumeration on the diagonal matrix
    for exps in [(1, 2, 3), (1, 1, 2, 2), (4,), (2, 2)]:
        E = ElementaryDVRModule(exps)
        M = dvr_matrix(
            [
                [3**e if r == c else 0 for c in range(len(exps))]
                for r, e in enumerate(exps)
            ]
        )
        for i in range(len(exps) + 2):
            assert fitting_from_structure(E, i) == exp_of(M, i)


def test_direct_sum_examples():
    one, two = ElementaryDVRModule((1,)), ElementaryDVRModule((2,))
    assert direct_sum_fitting(one, two, 1) == 1
    empty = ElementaryDVRModule(())
    assert direct_sum_fitting(empty, two, 0) == fitting_from_structure(two, 0)
    pair = ElementaryDVRModule((1, 1))
    assert direct_sum_fitting(pair, pair, 2) == 2


def test_elementary_module_validation():
    with pytest.raises(ValueError):
        ElementaryDVRModule((2, 1))
    with pytest.raises(ValueError):
        ElementaryDVRModule((0, 1))


# ------------------------------------------------------------- bulk oracle


def random_torsion_matrix(rng, n, K=12, p=3):
    """U * diag(p^e) * V for random small exponents and unimodular U, V."""
    exps = sorted(rng.randint(0, 2) for _ in range(n))
    while sum(exps) > K - 2:
        exps[exps.index(max(exps))] -= 1
    q = p**K
    A = [[p ** exps[r] if r == c else 0 for c in range(n)] for r in range(n)]
    for _ in range(2 * n):
        i, j = rng.randrange(n), rng.randrange(n)
        if i == j:
            continue
        c = rng.randint(-9, 9)
        if rng.random() < 0.5:
            A[i] = [(a + c * b) % q for a, b in zip(A[i], A[j])]
        else:
            for row in A:
                row[i] = (row[i] + c * row[j]) % q
    return dvr_matrix(A), exps


def test_minors_match_structure_on_random_matrices():
    rng = random.Random(20260822)
    for trial in range(210):
        n = rng.randint(1, 6)
        M, exps = random_torsion_matrix(rng, n)
        E = dvr_structure(M)
        assert list(E.exponents) == [e for e in exps if e > 0]
        for i in range(7):
            assert exp_of(M, i) == fitting_from_structure(E, i), (trial, i)


def test_structure_against_integer_snf_oracle():
    rng = random.Random(404)
    for _ in range(20):
        n = rng.randint(2, 5)
        M, _ = random_torsion_matrix(rng, n)
        D = zz_snf(sympy.Matrix([list(r) for r in M.entries]), domain=sympy.ZZ)
        oracle = sorted(
            padic_valuation(3, int(D[i, i]), 12) for i in range(n)
        )
        cert = smith_normal_form(M)
        assert list(cert.exponents) == oracle


# ---------------------------------------------------------------- properties


@st.composite
def dvr_matrices(draw):
    n = draw(st.integers(1, 4))
    k = draw(st.integers(1, 4))
    q = 3**12
    entries = draw(
        st.lists(
            st.lists(
                st.builds(
                    lambda v, u: (3**v * u) % q,
                    st.integers(0, 4),
                    st.integers(1, 80),
                ),
                min_size=k,
                max_size=k,
            ),
            min_size=n,
            max_size=n,
        )
    )
    return dvr_matrix(entries)


@settings(max_examples=80, deadline=None)
@given(dvr_matrices())
def test_chain_property(M):
    vals = [
        12 if (e := exp_of(M, i)) == "full" else e for i in range(M.rows + 1)
    ]
    assert vals == sorted(vals, reverse=True)


@settings(max_examples=80, deadline=None)
@given(dvr_matrices(), st.integers(0, 4), st.integers(1, 11))
def test_base_change(M, i, new_K):
    before = exp_of(M, i)
    before = 12 if before == "full" else before
    after = exp_of(M.reduce_precision(new_K), i)
    after = new_K if after == "full" else after
    assert after == min(before, new_K)


@settings(max_examples=80, deadline=None)
@given(dvr_matrices(), st.integers(0, 4), st.data())
def test_appending_relations_only_grows_the_ideal(M, i, data):
    extra = data.draw(
        st.lists(
            st.lists(st.integers(0, 3**6), min_size=1, max_size=1),
            min_size=M.rows,
            max_size=M.rows,
        )
    )
    before = exp_of(M, i)
    after = exp_of(M.append_columns(extra), i)
    before = 12 if before == "full" else before
    after = 12 if after == "full" else after
    assert after <= before


# ------------------------------------------------------------- series kind


LAM = RingDescriptor("lambda", 3, 6, 8)


def lam(coeffs):
    return TruncatedSeries.make(3, 6, 8, coeffs)


def test_series_fitting_generators():
    T = [0, 1]
    M = PresentationMatrix.make(LAM, [[T, [0]], [[0], [3]]])
    f0 = fitting_ideal(M, 0)
    assert [list(g.coeffs) for g in f0.generators] == [[0, 3, 0, 0, 0, 0, 0, 0]]
    f1 = fitting_ideal(M, 1)
    assert {g.coeffs for g in f1.generators} == {lam(T).coeffs, lam([3]).coeffs}


def test_series_fitting_dedupes_and_drops_zero():
    T = [0, 1]
    M = PresentationMatrix.make(LAM, [[T, T], [T, T]])
    assert fitting_ideal(M, 0).generators == ()
    assert [g.coeffs for g in fitting_ideal(M, 1).generators] == [lam(T).coeffs]


def test_series_fitting_unit_minor_short_circuits():
    M = PresentationMatrix.make(LAM, [[[1], [0, 1]], [[0], [1]]])
    gens = fitting_ideal(M, 0).generators
    assert len(gens) == 1 and gens[0].is_unit()
    assert fitting_ideal(M, 2).generators[0].is_unit()
    wide = PresentationMatrix.make(LAM, [[[0, 1]], [[3]]])
    assert fitting_ideal(wide, 0).generators == ()


# ------------------------------------------------------------------- JSON


def test_matrix_from_dict_round_trip():
    doc = {
        "ring": {"kind": "dvr", "p": 3, "K": 12},
        "rows": 2,
        "cols": 2,
        "entries": [[3, 0], [0, 9]],
    }
    M = PresentationMatrix.from_dict(doc)
    assert exp_of(M, 0) == 3


def test_matrix_from_dict_reports_paths():
    from iwafitt.errors import InputError

    with pytest.raises(InputError) as e:
        PresentationMatrix.from_dict({"ring": {"kind": "nope"}})
    assert e.value.json_path == "$.ring.kind"
    with pytest.raises(InputError) as e:
        PresentationMatrix.from_dict(
            {
                "ring": {"kind": "dvr", "p": 3, "K": 2},
                "rows": 1,
                "cols": 2,
                "entries": [[1, "x"]],
            }
        )
    assert e.value.json_path == "$.entries[0][1]"
    with pytest.raises(InputError) as e:
        PresentationMatrix.from_dict([1, 2])
    assert e.value.json_path == "$"


def test_entry_coercion_rejects_cross_ring():
    with pytest.raises(RingMismatch):
        PresentationMatrix.make(DVR, [[lam([1])]])
    with pytest.raises(RingMismatch):
        PresentationMatrix.make(LAM, [[3]])
    with pytest.raises(RingMismatch):
        PresentationMatrix.make(
            LAM, [[TruncatedSeries.make(5, 6, 8, [1])]]
        )
