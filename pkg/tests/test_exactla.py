from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from dgkit.exactla import (FinComplex, Matrix, QQ, cohomology_table, field_from_name,
                           induced_map, prime_field, rank, rank_and_kernel, rref, solve,
                           check_chain_map, NotChainMap, InvalidComplex)

F7 = prime_field(7)
small = st.integers(-4, 4)


def mat(F, rows):
    return Matrix.from_rows(F, [[F(a) for a in r] for r in rows])


matrices = st.integers(1, 4).flatmap(
    lambda r: st.integers(1, 4).flatmap(
        lambda c: st.lists(st.lists(small, min_size=c, max_size=c), min_size=r, max_size=r)))


@given(matrices)
def test_rank_of_transpose(rows):
    m = mat(QQ, rows)
    assert rank(m) == rank(m.transpose())


@given(matrices)
def test_kernel_vectors_are_killed(rows):
    m = mat(QQ, rows)
    r, ker = rank_and_kernel(m)
    assert r + len(ker) == m.cols
    for v in ker:
        assert all(a == 0 for a in m.apply(v))


@given(matrices, st.lists(small, min_size=4, max_size=4))
def test_solve_finds_preimages(rows, x):
    m = mat(QQ, rows)
    x = [QQ(a) for a in x[:m.cols]]
    b = m.apply(x)
    y = solve(m, b)
    assert y is not None and m.apply(y) == b


@given(matrices)
def test_rank_mod_p_never_exceeds_rank_over_q(rows):
    assert rank(mat(F7, rows)) <= rank(mat(QQ, rows))


def test_rref_pivots():
    r, piv = rref(mat(QQ, [[0, 2, 4], [0, 1, 2]]))
    assert piv == [1]
    assert r.data[0] == [0, 1, 2]


def test_solve_inconsistent():
    assert solve(mat(QQ, [[1], [1]]), [QQ(1), QQ(2)]) is None


def test_prime_field_arithmetic():
    a = F7(3)
    assert (a * F7(5)).v == 1
    assert (F7.one / a * a) == F7.one
    assert F7(Fraction(1, 2)).v == 4
    with pytest.raises(ValueError):
        prime_field(8)


@given(st.fractions(max_denominator=50))
def test_scalar_text_round_trip(q):
    s = QQ.format(q)
    assert QQ.parse(s) == q and QQ.format(QQ.parse(s)) == s


def test_non_canonical_scalars_rejected():
    for bad in ("2/4", "0.5", "+1", "1/-2"):
        with pytest.raises(ValueError):
            QQ.parse(bad)
    with pytest.raises(ValueError):
        F7.parse("9")
    assert field_from_name("F32003").characteristic == 32003


def test_cohomology_of_small_complex():
    # k --(1 1)^T--> k^2 --(1 -1)--> k : acyclic
    c = FinComplex(QQ, {0: 1, 1: 2, 2: 1},
                   {0: mat(QQ, [[1], [1]]), 1: mat(QQ, [[1, -1]])})
    assert cohomology_table(c) == {}
    c2 = FinComplex(QQ, {0: 1, 1: 2}, {0: mat(QQ, [[1], [1]])})
    assert cohomology_table(c2) == {1: 1}


def test_bad_complex_detected():
    c = FinComplex(QQ, {0: 1, 1: 1, 2: 1}, {0: mat(QQ, [[1]]), 1: mat(QQ, [[1]])})
    with pytest.raises(InvalidComplex):
        cohomology_table(c)


def test_induced_map_and_chain_map_check():
    c = FinComplex(QQ, {0: 1}, {})
    check_chain_map(c, c, {0: mat(QQ, [[2]])})
    assert induced_map(c, c, {0: mat(QQ, [[2]])}, 0) == mat(QQ, [[2]])
    d = FinComplex(QQ, {0: 1, 1: 1}, {0: mat(QQ, [[1]])})
    with pytest.raises(NotChainMap):
        check_chain_map(c, d, {0: mat(QQ, [[1]])})
