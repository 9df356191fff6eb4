import pytest

from dgkit.dgcore import validate_functor
from dgkit.holim import IsoCertificate, iso_check
from dgkit.instances import make_a2_quiver, make_point, make_sphere_algebra
from dgkit.sphere import (DualTwistFunctor, ObjectFunctor, TwistFunctor, cotwist_table,
                          dual_twist_eval, spherical_test, twist_eval)
from dgkit.twist import TwMorphism, cone, direct_sum, embed, shift, tw_category


def sphere_functor(n):
    A = make_sphere_algebra(n)
    return A, ObjectFunctor(make_point(), embed(A, "S"))


@pytest.mark.parametrize("n", [2, 3, 4])
def test_spherical_object(n):
    A, F = sphere_functor(n)
    rep = spherical_test(F)
    assert rep.verdict == "pass", rep.lines()
    assert rep.cy_degree == n
    assert rep.end_table == {0: 1, n: 1}


@pytest.mark.parametrize("n", [2, 3, 4])
def test_twist_of_S_is_a_shift(n):
    A, F = sphere_functor(n)
    tw = tw_category(A)
    S = embed(A, "S")
    TS = twist_eval(F, S)
    assert isinstance(iso_check(tw, TS, shift(S, n - 1)), IsoCertificate)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_cotwist_is_one_dimensional(n):
    _, F = sphere_functor(n)
    t = cotwist_table(F)
    assert sum(t.values()) == 1
    assert t == {n + 1: 1}


def test_dual_twist_inverts_twist(S2, sphere2):
    tw = tw_category(sphere2)
    S = embed(sphere2, "S")
    back = dual_twist_eval(S2, twist_eval(S2, S))
    assert isinstance(iso_check(tw, back, S), IsoCertificate)
    forth = twist_eval(S2, dual_twist_eval(S2, S))
    assert isinstance(iso_check(tw, forth, S), IsoCertificate)


def test_twist_functoriality(S2, sphere2):
    S = embed(sphere2, "S")
    objs = [S, shift(S, 1), direct_sum([S, shift(S, 2)])]
    assert validate_functor(TwistFunctor(S2), objs).ok
    assert validate_functor(DualTwistFunctor(S2), objs[:2]).ok


def test_twist_preserves_tables(S2, sphere2):
    S = embed(sphere2, "S")
    tw = tw_category(sphere2)
    C = cone(TwMorphism(S, S, tw.identity(S)))
    rep = spherical_test(S2, [S, shift(S, 1), C])
    assert rep.preserves_tables
    assert tw.h_row(twist_eval(S2, C), twist_eval(S2, C)) == {}


def test_non_spherical_object():
    A = make_a2_quiver()
    F = ObjectFunctor(make_point(), embed(A, A.objects[0]))
    rep = spherical_test(F)
    assert rep.verdict == "fail"
    assert rep.cy_degree is None


def test_sphere_algebra_rejects_small_degree():
    from dgkit.instances import BadParam
    with pytest.raises(BadParam):
        make_sphere_algebra(1)
