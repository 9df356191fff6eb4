import pytest

from dgkit.dgcore import IdentityFunctor, validate_category, validate_functor
from dgkit.glue import (GluingDatum, cone_functor, directed_category, directed_generators,
                        directed_vs_glued_oracle, glue, glued_object, iterated_glue,
                        perf_point_pieces, semiorthogonality_report)
from dgkit.instances import make_point
from dgkit.noncomm import DirectSumFunctor
from dgkit.sphere import ObjectFunctor
from dgkit.twist import NotClosed, TwMorphism, cone, embed, tw_category


@pytest.fixture(scope="module")
def a2k(point):
    I = IdentityFunctor(point)
    D = GluingDatum(point, point, I, I)
    objs = [glued_object(D, "e", None), glued_object(D, None, "e"),
            glued_object(D, "e", "e", point.identity("e"))]
    return D, glue(D, objs, "A2(k)")


def test_a2_tables(a2k):
    _, G = a2k
    x1, x2, x12 = G.objects
    assert G.h_row(x1, x2) == {1: 1}
    assert G.h_row(x2, x1) == {}
    assert G.h_row(x12, x12) == {0: 1}
    assert G.h_row(x1, x1) == {0: 1}


def test_a2_axioms(a2k):
    _, G = a2k
    assert validate_category(G).ok
    assert validate_functor(cone_functor(G), G.objects).ok


def test_semiorthogonality(a2k):
    _, G = a2k
    assert semiorthogonality_report(G).ok


def test_mu_must_be_closed(point):
    tw = tw_category(point)
    e = embed(point, "e")
    C = cone(TwMorphism(e, e, tw.identity(e)))
    F = ObjectFunctor(point, C)
    D = GluingDatum(point, point, F, F)
    glue(D, [glued_object(D, "e", "e", tw.identity(C))])
    degs = tw.hom_degrees(C, C)
    for k, d in enumerate(degs):
        v = tuple(point.field.one if t == k else point.field.zero for t in range(len(degs)))
        if d == 0 and any(tw.d(C, C, v)):
            break
    else:
        raise AssertionError("End(cone(id)) has no non-closed degree-0 element")
    with pytest.raises(NotClosed):
        glue(D, [glued_object(D, "e", "e", v)])


@pytest.mark.parametrize("which", ["point", "sphere2"])
@pytest.mark.parametrize("k", [1, 2, 3])
def test_directed_vs_glued(which, k, point, sphere2):
    c = point if which == "point" else sphere2
    u = ["e"] * k if which == "point" else ["S"] * k
    rep = directed_vs_glued_oracle(c, u)
    assert rep.ok, rep.lines()


def test_directed_category_shape(sphere2):
    dc = directed_category(sphere2, ["S", "S", "S"])
    assert validate_category(dc).ok
    assert dc.h_row("P1", "P3") == {0: 1, 2: 1}
    assert dc.h_row("P3", "P1") == {}


def test_iterated_glue_cone_functor(point):
    pt, pieces = perf_point_pieces(point, ["e", "e", "e"])
    gens = directed_generators(pt, 3)
    cat, fun = iterated_glue(pieces, gens)
    assert validate_category(cat).ok
    assert validate_functor(fun, gens).ok
    T = fun.dst
    for x in gens:
        assert T.h_row(fun.obj(x), fun.obj(x)) == {0: 1}


def test_replacing_a_gluing_functor_by_a_quasi_isomorphic_one(point, sphere2):
    S = embed(sphere2, "S")
    F = ObjectFunctor(point, S)
    tw = tw_category(sphere2)
    contractible = cone(TwMorphism(S, S, tw.identity(S)))
    Fpad = DirectSumFunctor(F, ObjectFunctor(point, contractible))
    tables = []
    for f1 in (F, Fpad):
        D = GluingDatum(point, point, f1, F)
        objs = [glued_object(D, "e", None), glued_object(D, None, "e"), glued_object(D, "e", "e")]
        G = glue(D, objs)
        tables.append([G.h_row(x, y) for x in objs for y in objs])
    assert tables[0] == tables[1]
    assert tables[0][1] == {1: 1, 3: 1}
