import random

import pytest
from hypothesis import given, strategies as st

from dgkit.dgcore import (CategoryBuilder, DgFunctor, IdentityFunctor, PointFunctor, h_table,
                          materialize_functor, opposite, product, quasi_ff_check, transport,
                          validate_category, validate_functor)
from dgkit.exactla import Matrix, QQ, rank
from dgkit.instances import (InfiniteHom, category_instances, make_dg_a3_quiver, make_kronecker,
                             make_point, make_quiver_path_category, make_sphere_algebra)


def one_object(bases, diffs=(), comps=()):
    b = CategoryBuilder(QQ, name="m")
    b.add_object("x", "id")
    for nm, d in bases:
        b.add_basis("x", "x", nm, d)
    for src, tgt, c in diffs:
        b.set_diff("x", "x", src, {tgt: c})
    for g, f, terms in comps:
        b.set_comp("x", "x", "x", g, f, terms)
    return b.build()


MUTANTS = {
    "unit": one_object([("t", 1)], diffs=[("id", "t", 1)]),
    "d-squared": one_object([("a", 0), ("b", 1), ("c", 2)],
                            diffs=[("a", "b", 1), ("b", "c", 1)],
                            comps=[("a", "a", {}), ("a", "b", {}), ("b", "a", {}),
                                   ("a", "c", {}), ("c", "a", {})]),
    "degree": one_object([("a", 0), ("b", 0)], diffs=[("a", "b", 1)],
                         comps=[("a", "a", {}), ("a", "b", {}), ("b", "a", {}), ("b", "b", {})]),
    "leibniz": one_object([("a", 0), ("b", 1)], diffs=[("a", "b", 1)],
                          comps=[("a", "a", {"a": 1})]),
    "composition-degree": one_object([("eps", 2)], comps=[("eps", "eps", {"id": 1})]),
    "associativity": one_object([("a", 0), ("b", 0)],
                                comps=[("a", "a", {"b": 1}), ("a", "b", {"a": 1}),
                                       ("b", "a", {}), ("b", "b", {})]),
}


@pytest.mark.parametrize("name", sorted(category_instances()))
def test_shipped_categories_validate(name):
    assert validate_category(category_instances()[name]).ok


@pytest.mark.parametrize("axiom", sorted(MUTANTS))
def test_mutants_cite_their_axiom(axiom):
    rep = validate_category(MUTANTS[axiom])
    assert axiom in rep.axioms()


def test_unit_mutant_identity_composition():
    c = make_sphere_algebra(2)
    b = CategoryBuilder(QQ, "bad")
    b.add_object("S", "id").add_basis("S", "S", "eps", 2)
    b.set_comp("S", "S", "S", "id", "eps", {"eps": 2})
    rep = validate_category(b.build())
    assert "unit" in rep.axioms()
    assert validate_category(c).ok


def test_other_leibniz_sign_is_rejected_on_dg_quiver():
    c = make_dg_a3_quiver()
    assert validate_category(c).ok
    assert "leibniz" in validate_category(c, leibniz="right").axioms()


def test_h_table_examples(point, sphere2):
    assert h_table(point, ["e"]) == {("e", "e"): {0: 1}}
    assert sphere2.h_row("S", "S") == {0: 1, 2: 1}
    assert make_kronecker().h_row("P1", "P2") == {0: 2}
    c = make_dg_a3_quiver()
    assert c.h_row("P1", "P3") == {}


def test_functor_validation_and_mutants():
    c = make_dg_a3_quiver()
    ident = IdentityFunctor(c)
    assert validate_functor(ident).ok
    frozen = materialize_functor(ident, c)
    assert validate_functor(frozen).ok

    def tweak(key, i, j, val):
        hm = {k: Matrix(QQ, m.rows, m.cols, [list(r) for r in m.data]) for k, m in frozen.hom_map.items()}
        hm[key].data[i][j] = QQ(val)
        return DgFunctor(c, c, frozen.obj_map, hm, "tweaked")

    assert "functor-composition" in validate_functor(tweak(("P1", "P2"), 0, 0, 2)).axioms()
    assert "functor-unit" in validate_functor(tweak(("P1", "P1"), 0, 0, 2)).axioms()
    assert "functor-differential" in validate_functor(tweak(("P1", "P3"), 0, 0, 0)).axioms()


def test_point_to_sphere_functor(point, sphere2):
    f = PointFunctor(point, sphere2, "S")
    assert validate_functor(f).ok
    rep = quasi_ff_check(f, [("e", "e")])
    assert not rep.ok and rep.failures == [(("e", "e"), 2)]


def test_quasi_ff(sphere2):
    assert quasi_ff_check(IdentityFunctor(sphere2), [("S", "S")]).ok
    zero = DgFunctor(sphere2, sphere2, {"S": "S"}, {("S", "S"): Matrix.zeros(QQ, 2, 2)})
    assert not quasi_ff_check(zero, [("S", "S")]).ok


def test_opposite_and_product(point):
    assert opposite(point) == point or opposite(point).h_row("e", "e") == {0: 1}
    for c in category_instances().values():
        assert opposite(opposite(c)) == c
        assert validate_category(opposite(c)).ok
    p = product(point, point)
    assert len(p.objects) == 1 and p.h_row(p.objects[0], p.objects[0]) == {0: 1}
    s = make_sphere_algebra(3)
    ps = product(s, s)
    assert validate_category(ps).ok
    assert ps.h_row(ps.objects[0], ps.objects[0]) == {0: 1, 3: 2, 6: 1}


def test_infinite_hom_rejected():
    with pytest.raises(InfiniteHom):
        make_quiver_path_category(["A"], [("l", "A", "A", 0)])


def random_change(c, key, rng):
    """Random degree-preserving invertible change of basis fixing the unit."""
    h = c.homs[key]
    n = len(h.names)
    u = c.units[key[0]] if key[0] == key[1] else None
    while True:
        m = Matrix.identity(QQ, n)
        for i in range(n):
            for j in range(n):
                if j != u and h.degrees[i] == h.degrees[j]:
                    m.data[i][j] = QQ(rng.randint(-2, 2))
        if rank(m) == n:
            return m


@given(st.integers(0, 10_000))
def test_h_table_invariant_under_change_of_basis(seed):
    rng = random.Random(seed)
    for c in (make_kronecker(), make_dg_a3_quiver()):
        changes = {k: random_change(c, k, rng) for k in c.homs}
        t = transport(c, changes)
        assert validate_category(t).ok
        assert h_table(t, t.objects) == h_table(c, c.objects)
