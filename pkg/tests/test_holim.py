import pytest
from fractions import Fraction
from hypothesis import given, strategies as st

from dgkit.dgcore import IdentityFunctor, validate_category, validate_functor
from dgkit.glue import GluingDatum, GluedObject, glue, glued_object
from dgkit.holim import (BadCertificate, IsoCertificate, Unknown, UnsupportedN, a3_seed,
                         build_a_n, certify_iso, cone_in_equalizer, equalizer_object,
                         fiber_object, fibration_lift, ho_equalizer, ho_fiber, iso_check,
                         verify_certificate)
from dgkit.sphere import ObjectFunctor
from dgkit.twist import TwMorphism, cone, direct_sum, embed, tw_category


@pytest.fixture(scope="module")
def twp(point):
    return tw_category(point)


def scaled(T, x, c):
    return tuple(T.field(c) * a for a in T.identity(x))


def test_equalizer_of_identities(point, twp):
    I = IdentityFunctor(twp)
    e = embed(point, "e")
    x = equalizer_object(I, I, e, twp.identity(e))
    E = ho_equalizer(I, I, [x])
    assert E.h_row(x, x) == {0: 1, 1: 1}
    assert validate_category(E).ok


def test_equalizer_rejects_non_invertible_structure_map(point, twp):
    I = IdentityFunctor(twp)
    e = embed(point, "e")
    with pytest.raises(BadCertificate):
        equalizer_object(I, I, e, twp.zero(e, e))


def test_fiber_example_and_glue_agreement(point, sphere2):
    S = embed(sphere2, "S")
    F = ObjectFunctor(point, S)
    tw = tw_category(sphere2)
    x = fiber_object(F, F, "e", "e", tw.identity(S))
    Fb = ho_fiber(F, F, [x])
    assert Fb.h_row(x, x) == {0: 1, 3: 1}
    assert validate_category(Fb).ok
    D = GluingDatum(point, point, F, F)
    g = glued_object(D, "e", "e", tw.identity(S))
    G = glue(D, [g])
    assert G.hom_degrees(g, g) == Fb.hom_degrees(x, x)
    assert G.hom_diff(g, g) == Fb.hom_diff(x, x)


def test_iso_check(point, twp):
    e = embed(point, "e")
    C = cone(TwMorphism(e, e, twp.identity(e)))
    padded = direct_sum([e, C])
    cert = iso_check(twp, e, padded)
    assert isinstance(cert, IsoCertificate) and verify_certificate(twp, cert)
    miss = iso_check(twp, e, embed(point, "e", 1))
    assert isinstance(miss, Unknown) and not miss
    assert "not isomorphic" in miss.note
    assert iso_check(twp, e, padded, seed=5) == iso_check(twp, e, padded, seed=5)


@given(st.integers(-20, 20))
def test_certify_scalar(c):
    from dgkit.instances import make_point
    P = make_point()
    T = tw_category(P)
    e = embed(P, "e")
    cert = certify_iso(T, e, e, scaled(T, e, c))
    assert (cert is None) == (c == 0)
    if cert is not None:
        assert T.compose(e, e, e, cert.g, cert.f) == T.identity(e)


def test_a_tower(point, twp):
    e = embed(point, "e")
    A2t = build_a_n(point, 2)
    assert len(A2t.functors) == 3
    xg = GluedObject(e, e, twp.identity(e))
    A2t.category.objects = [xg, GluedObject(e, None, ()), GluedObject(None, e, ())]
    assert validate_category(A2t.category).ok
    for f in A2t.functors:
        assert validate_functor(f, A2t.category.objects).ok
    xh = GluedObject(cone(TwMorphism(e, e, twp.identity(e))), None, ())
    tower = build_a_n(point, 3)
    s = a3_seed(tower, xg, xh)
    tower.category.objects = [s]
    assert validate_category(tower.category).ok
    assert len(tower.functors) == 4
    for f in tower.functors:
        assert validate_functor(f, [s]).ok
    with pytest.raises(UnsupportedN):
        build_a_n(point, 4)


def test_fibration_lift(point, twp):
    e = embed(point, "e")
    I = IdentityFunctor(twp)
    D = GluingDatum(twp, twp, I, I)
    x = GluedObject(e, e, twp.identity(e))
    xi = certify_iso(twp, e, e, scaled(twp, e, 2))
    tau = certify_iso(twp, e, e, twp.identity(e))
    y, cert = fibration_lift(D, x, xi, tau)
    assert y.mu == scaled(twp, e, Fraction(1, 2))
    assert verify_certificate(glue(D, [x, y]), cert)


def test_cone_in_equalizer(point, twp):
    e = embed(point, "e")
    I = IdentityFunctor(twp)
    x = equalizer_object(I, I, e, twp.identity(e))
    E = ho_equalizer(I, I, [x])
    f = tuple(twp.identity(e)) + tuple(E.split(x, x, E.zero(x, x))[1])
    c = cone_in_equalizer(E, x, x, f)
    assert c.a == cone(TwMorphism(e, e, twp.identity(e)))
    E.objects.append(c)
    assert E.h_row(c, c) == {}
