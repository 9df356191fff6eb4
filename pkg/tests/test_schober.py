import itertools

import pytest

from dgkit.instances import make_a2_quiver, make_fixture_schobers, make_point
from dgkit.noncomm import identity_auto, shift_auto, twist_auto
from dgkit.schober import (CONSISTENT, NONTRIVIAL, TRIVIAL_CERTIFIED, BadCycle, BadIndex, Cycle,
                           Flagged, UnsupportedSkeleton, boundary_triviality, braid_mutate,
                           disc_data, flagged_notes, glsect_oracle, k_circle, marked_order,
                           monodromy, monodromy_functor, mutation_report, same_functor_data,
                           skeleton_K_k, skeleton_K_p, skeleton_chain, validate_schober)
from dgkit.sphere import ObjectFunctor
from dgkit.twist import embed, shift


@pytest.fixture(scope="module")
def fx():
    return make_fixture_schobers()


@pytest.mark.parametrize("name", ["k2-sphere", "k3-sphere", "kp-point", "kp-sphere",
                                  "kphi-point", "kphi-sphere", "chain-sphere"])
def test_fixture_schobers_validate(fx, name):
    rep = validate_schober(fx[name])
    assert rep.ok, rep.lines() if hasattr(rep, "lines") else rep


def test_k1_template(S2, sphere2):
    s = skeleton_K_k(sphere2, [S2])
    assert validate_schober(s).ok
    assert disc_data(s) == (None, ["p1"], "q1.p")
    assert glsect_oracle(s).ok


def test_non_spherical_marked_point_is_rejected_unless_flagged():
    A = make_a2_quiver()
    F = ObjectFunctor(make_point(), embed(A, A.objects[0]))
    s = skeleton_K_k(A, [F, F])
    assert not validate_schober(s).ok
    s.marked_functors = {p: Flagged(F) for p in s.marked_functors}
    assert validate_schober(s).ok
    assert flagged_notes(s) == ["p1: UNVERIFIED (assume-spherical)",
                                "p2: UNVERIFIED (assume-spherical)"]


def test_bad_cycles(fx):
    g = fx["kphi-sphere"].graph
    with pytest.raises(BadCycle):
        g.cycle(["v1", "h1"])
    with pytest.raises(BadCycle):
        g.cycle(["v1", "nope", "v1"])
    with pytest.raises(BadCycle):
        g.cycle(["v1", "g1", "v1"])
    with pytest.raises(BadCycle):
        g.check_cycle(Cycle((("h1.1", "h2.2"),)))
    assert g.cycle(["v1", "h1", "v2", "-h2", "v1"]) == g.cycles["meridian"]


def test_monodromy_concatenation(fx):
    t = k_circle(fx["k3-sphere"])
    cyc = t.graph.cycles
    names = ["C1", "C2", "C3"]
    loops = [cyc[n] for n in names] + [cyc[n].reverse() for n in names]
    tests = t.tests()
    pairs = list(itertools.combinations(range(len(loops)), 2))
    assert len(pairs) >= 5
    for i, j in pairs:
        a, b = loops[i], loops[j]
        whole = monodromy_functor(t, a + b)
        parts = monodromy_functor(t, a).then(monodromy_functor(t, b))
        assert same_functor_data(whole, parts, tests)


def test_loop_monodromy_is_the_twist(S2, sphere2):
    t = k_circle(skeleton_K_k(sphere2, [S2]))
    mon = monodromy_functor(t, t.graph.cycles["loop:p1"])
    assert same_functor_data(mon, twist_auto(S2), t.tests())


def test_verdicts(point, S2, sphere2):
    e = embed(point, "e")
    assert boundary_triviality(skeleton_K_p(point, identity_auto(point))).verdict == TRIVIAL_CERTIFIED
    assert boundary_triviality(skeleton_K_p(point, shift_auto(point, 1))).verdict == NONTRIVIAL
    t = twist_auto(S2)
    round_trip = t.then(t.inverse())
    s = skeleton_K_p(sphere2, round_trip)
    rep = monodromy(s, s.graph.cycles["meridian"])
    assert rep.verdict == CONSISTENT
    s = skeleton_K_p(point, shift_auto(point, 2))
    assert monodromy(s, s.graph.cycles["meridian"], [e]).verdict == NONTRIVIAL


def test_sphere_disc_boundaries(fx):
    rep = boundary_triviality(fx["k2-sphere"])
    assert rep.verdicts() == {"C1": NONTRIVIAL, "C2": NONTRIVIAL, "Cinf": NONTRIVIAL}


@pytest.mark.parametrize("name", ["k2-sphere", "k3-sphere"])
def test_glsect(fx, name):
    rep = glsect_oracle(fx[name])
    assert rep.ok, rep.lines()


def test_mutation(fx):
    s = fx["k2-sphere"]
    m = braid_mutate(s, 1)
    S = embed(s.fiber, "S")
    assert m.functor_of("p2").S == shift(S, 1)
    assert mutation_report(s, [1]).ok


def test_braid_relation(fx):
    rep = mutation_report(fx["k3-sphere"], [1, 2, 1], [2, 1, 2])
    assert rep.ok, rep.lines()


def test_bad_index(fx):
    s = fx["k3-sphere"]
    assert marked_order(s) == ["p1", "p2", "p3"]
    for i in (0, 3):
        with pytest.raises(BadIndex):
            braid_mutate(s, i)


def test_unsupported_skeleta(fx, S2, sphere2):
    with pytest.raises(UnsupportedSkeleton):
        disc_data(fx["kp-sphere"])
    with pytest.raises(UnsupportedSkeleton):
        skeleton_chain(2, sphere2, [identity_auto(sphere2)], ends=([S2], [S2, S2]))
    with pytest.raises(UnsupportedSkeleton):
        skeleton_K_k(sphere2, [])
    chain = skeleton_chain(2, sphere2, [twist_auto(S2)], ends=([S2, S2], [S2, S2]))
    assert validate_schober(chain).ok
