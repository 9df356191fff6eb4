"""Segal's category D_Φ and the noncommutative P¹-bundle glued from an autoequivalence.

Autoequivalences act on twisted complexes Tw C and always carry an
explicit quasi-inverse; nothing is ever inverted numerically.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .dgcore import (CartesianProduct, Category, ComposedFunctor, Functor, IdentityFunctor,
                     block_diag, is_zero, split_by_degree, vadd)
from .glue import GluedCategory, GluedObject, GluingDatum, OracleReport, check_glued_object
from .holim import (BadCertificate, EqualizerCategory, EqualizerObject, IsoCertificate,
                    a2_category, certify_structure_map, fiber_object, ho_fiber, iso_check)
from .sphere import DualTwistFunctor, ObjectFunctor, TwistFunctor
from .twist import (ExtendedFunctor, ShiftFunctor, TwCategory, TwObject, bracket, cone, direct_sum,
                    embed, shift, tw_category, zero_object, TwMorphism)


class NotSplit(ValueError):
    pass


# ------------------------------------------------------------ autoequivalences

class Autoequivalence:
    """Φ: Tw C -> Tw C together with a chosen quasi-inverse.

    `desc` is a small tree used for printing, inversion and serialization:
    ("id",), ("shift", n) meaning x |-> x[n], ("twist", S), ("dual-twist", S),
    ("strict", F, G) for a strict automorphism F of C with inverse G, and
    ("compose", first, second).
    """

    def __init__(self, base: Category, phi: Functor, phi_inv: Functor, desc: tuple):
        self.base = base
        self.tw = tw_category(base)
        self.phi, self.phi_inv = phi, phi_inv
        self.desc = desc
        self.unit: dict = {}
        self.counit: dict = {}

    @property
    def name(self) -> str:
        return describe(self.desc)

    def __repr__(self):
        return f"Autoequivalence({self.name})"

    def obj(self, x):
        return self.phi.obj(x)

    def hom(self, x, y, v):
        return self.phi.hom(x, y, v)

    def inverse(self) -> "Autoequivalence":
        k = self.desc[0]
        if k == "id":
            return self
        if k == "shift":
            return shift_auto(self.base, -self.desc[1])
        if k == "twist":
            return dual_twist_auto(ObjectFunctor(_point(self.base), self.desc[1]))
        if k == "dual-twist":
            return twist_auto(ObjectFunctor(_point(self.base), self.desc[1]))
        if k == "strict":
            return strict_auto(self.desc[2], self.desc[1])
        if k == "compose":
            return self.desc[2].inverse().then(self.desc[1].inverse())
        raise ValueError(f"cannot invert {k}")

    def then(self, other: "Autoequivalence") -> "Autoequivalence":
        """other ∘ self."""
        if self.desc == ("id",):
            return other
        if other.desc == ("id",):
            return self
        return Autoequivalence(self.base, ComposedFunctor(other.phi, self.phi),
                               ComposedFunctor(self.phi_inv, other.phi_inv),
                               ("compose", self, other))

    def certify(self, objects: Sequence[TwObject]) -> "Autoequivalence":
        """Record H⁰-isomorphism certificates Φ⁻¹Φx ≅ x and ΦΦ⁻¹x ≅ x."""
        for x in objects:
            for store, y in ((self.unit, self.phi_inv.obj(self.phi.obj(x))),
                             (self.counit, self.phi.obj(self.phi_inv.obj(x)))):
                cert = iso_check(self.tw, y, x)
                if not isinstance(cert, IsoCertificate):
                    raise BadCertificate(f"{self.name} is not invertible at {x!r}")
                store[x] = cert
        return self

    def identity_on(self, objects: Sequence[TwObject]) -> bool:
        """Φ is the identity on these objects and on all their hom spaces, as data."""
        tw = self.tw
        for x in objects:
            if self.phi.obj(x) != x:
                return False
        for x in objects:
            for y in objects:
                for v in tw.basis(x, y):
                    if tuple(self.phi.hom(x, y, v)) != tuple(v):
                        return False
        return True


AutoequivalenceDatum = Autoequivalence


def describe(desc) -> str:
    k = desc[0]
    if k == "id":
        return "id"
    if k == "shift":
        return f"[{desc[1]}]"
    if k == "twist":
        return f"T({desc[1]!r})"
    if k == "dual-twist":
        return f"T'({desc[1]!r})"
    if k == "strict":
        return getattr(desc[1], "name", "strict")
    if k == "compose":
        return f"{desc[2].name}∘{desc[1].name}"
    return str(desc)


_POINTS = {}


def _point(base):
    from .instances import make_point
    key = base.field
    if key not in _POINTS:
        _POINTS[key] = make_point(base.field)
    return _POINTS[key]


def identity_auto(base: Category) -> Autoequivalence:
    tw = tw_category(base)
    ident = IdentityFunctor(tw)
    return Autoequivalence(base, ident, ident, ("id",))


def shift_auto(base: Category, n: int) -> Autoequivalence:
    """x |-> x[n]."""
    if n == 0:
        return identity_auto(base)
    tw = tw_category(base)
    return Autoequivalence(base, ShiftFunctor(tw, -n), ShiftFunctor(tw, n), ("shift", n))


def twist_auto(F: ObjectFunctor) -> Autoequivalence:
    return Autoequivalence(F.base, TwistFunctor(F), DualTwistFunctor(F), ("twist", F.S))


def dual_twist_auto(F: ObjectFunctor) -> Autoequivalence:
    return Autoequivalence(F.base, DualTwistFunctor(F), TwistFunctor(F), ("dual-twist", F.S))


def strict_auto(fun: Functor, inv: Functor) -> Autoequivalence:
    """A dg automorphism of C with its inverse, extended to Tw C."""
    if fun.src is not fun.dst or inv.src is not fun.src or inv.dst is not fun.src:
        raise ValueError("a strict automorphism must be an endofunctor with an endofunctor inverse")
    return Autoequivalence(fun.src, ExtendedFunctor(fun), ExtendedFunctor(inv),
                           ("strict", fun, inv))


def compose_word(base: Category, word: Sequence[tuple]) -> Autoequivalence:
    """Compose [(Φ₁, ±1), (Φ₂, ±1), ...], applying Φ₁ first."""
    out = identity_auto(base)
    for a, e in word:
        out = out.then(a if e > 0 else a.inverse())
    return out


# ------------------------------------------------------------ helper functors

class DirectSumFunctor(Functor):
    """x |-> F(x) ⊕ G(x), acting blockwise on morphisms."""

    def __init__(self, f: Functor, g: Functor):
        self.f, self.g = f, g
        self.src, self.dst = f.src, f.dst
        self.name = f"{getattr(f, 'name', 'F')}⊕{getattr(g, 'name', 'G')}"

    def obj(self, x):
        return direct_sum([self.f.obj(x), self.g.obj(x)])

    def hom(self, x, y, vec):
        T = self.dst
        fx, gx, fy, gy = self.f.obj(x), self.g.obj(x), self.f.obj(y), self.g.obj(y)
        out = dict(T.entries(fx, fy, self.f.hom(x, y, vec)))
        for (i, j), v in T.entries(gx, gy, self.g.hom(x, y, vec)).items():
            out[(i + fy.size, j + fx.size)] = v
        return T.assemble(self.obj(x), self.obj(y), out)


class PairFunctor(Functor):
    """x |-> (F x, G x) into a cartesian product."""

    def __init__(self, f: Functor, g: Functor, dst: CartesianProduct):
        self.f, self.g = f, g
        self.src, self.dst = f.src, dst
        self.name = f"({getattr(f, 'name', 'F')},{getattr(g, 'name', 'G')})"

    def obj(self, x):
        return (self.f.obj(x), self.g.obj(x))

    def hom(self, x, y, vec):
        return tuple(self.f.hom(x, y, vec)) + tuple(self.g.hom(x, y, vec))


# ------------------------------------------------------------ Segal's category

@dataclass(frozen=True)
class SegalObject:
    a: TwObject

    def __repr__(self):
        return f"j*{self.a!r}"


class SegalCategory(Category):
    """hom(j*a, j*b) = hom(a, b) ⊕ hom(a, Φ⁻¹b[1]) with
    (g, g')∘(f, f') = (g f, g' f + Φ⁻¹(g)[1] f')."""

    def __init__(self, base: Category, auto: Autoequivalence, objs: Sequence = (), name="segal"):
        self.base = base
        self.tw = tw_category(base)
        self.field = base.field
        self.auto = auto
        self.objects = [o if isinstance(o, SegalObject) else SegalObject(_as_tw(base, o)) for o in objs]
        self.name = name
        self._s = ShiftFunctor(self.tw, -1)

    def _twisted(self, y: SegalObject) -> TwObject:
        return bracket(self.auto.phi_inv.obj(y.a), 1)

    def _n(self, x, y):
        return self.tw.dim(x.a, y.a)

    def hom_degrees(self, x, y):
        return tuple(self.tw.hom_degrees(x.a, y.a)) + tuple(self.tw.hom_degrees(x.a, self._twisted(y)))

    def hom_names(self, x, y):
        return tuple("0:" + n for n in self.tw.hom_names(x.a, y.a)) + tuple(
            "1:" + n for n in self.tw.hom_names(x.a, self._twisted(y)))

    def hom_diff(self, x, y):
        return block_diag(self.field, [self.tw.hom_diff(x.a, y.a),
                                       self.tw.hom_diff(x.a, self._twisted(y))])

    def compose(self, x, y, z, g, f):
        tw, inv = self.tw, self.auto.phi_inv
        nf, ng = self._n(x, y), self._n(y, z)
        f0, f1 = tuple(f[:nf]), tuple(f[nf:])
        g0, g1 = tuple(g[:ng]), tuple(g[ng:])
        ty, tz = self._twisted(y), self._twisted(z)
        c0 = tw.compose(x.a, y.a, z.a, g0, f0)
        c1 = tw.compose(x.a, y.a, tz, g1, f0)
        if not is_zero(f1) and not is_zero(g0):
            py, pz = inv.obj(y.a), inv.obj(z.a)
            ig = self._s.hom(py, pz, inv.hom(y.a, z.a, g0))
            c1 = vadd(c1, tw.compose(x.a, ty, tz, ig, f1))
        return tuple(c0) + tuple(c1)

    def identity(self, x):
        return tuple(self.tw.identity(x.a)) + (self.field.zero,) * self.tw.dim(x.a, self._twisted(x))


def _as_tw(base, o):
    return o if isinstance(o, TwObject) else embed(base, o)


def segal_category(c: Category, phi: Autoequivalence, objs: Sequence, name="segal") -> SegalCategory:
    return SegalCategory(c, phi, objs, name)


def _segal_equalizer(c: Category, phi: Autoequivalence, objs: Sequence, extra_shift: int):
    """Eq^h(f1, Φ[extra]·f2) on A2(C) with objects ((a, (Φ[extra])⁻¹a, 0), id)."""
    A2, (f1, f2, _) = a2_category(c)
    psi = phi if not extra_shift else shift_auto(c, extra_shift).then(phi)
    g2 = ComposedFunctor(psi.phi, f2)
    T = A2.datum.target
    eqobjs = []
    for o in objs:
        a = _as_tw(c, o)
        b = psi.phi_inv.obj(a)
        x = GluedObject(a, b, T.zero(a, b))
        target = g2.obj(x)
        mu = T.identity(a) if target == a else iso_check(T, a, target).f
        eqobjs.append(EqualizerObject(x, tuple(mu), certify_structure_map(T, a, target, mu)))
    return EqualizerCategory(f1, g2, eqobjs, name="segal-equalizer"), eqobjs


def segal_equalizer_oracle(c: Category, phi: Autoequivalence, objs: Sequence,
                           diagnostic: bool = True) -> OracleReport:
    seg = segal_category(c, phi, objs)
    eq, eqobjs = _segal_equalizer(c, phi, objs, 0)
    rows = []
    for i, x in enumerate(seg.objects):
        for j, y in enumerate(seg.objects):
            a, b = seg.h_row(x, y), eq.h_row(eqobjs[i], eqobjs[j])
            rows.append((f"({x!r},{y!r})", a, b, a == b))
    notes = []
    if diagnostic and objs:
        eq2, e2 = _segal_equalizer(c, phi, objs, -2)
        agree = all(seg.h_row(x, y) == eq2.h_row(e2[i], e2[j])
                    for i, x in enumerate(seg.objects) for j, y in enumerate(seg.objects))
        notes.append("equalizer with Φ∘[-2] in place of Φ "
                     + ("matches every row" if agree else "also differs"))
    return OracleReport("segal vs equalizer", rows, notes)


# ------------------------------------------------------------ P¹-bundles

def bundle_datum(c: Category, phi: Autoequivalence) -> GluingDatum:
    tw = tw_category(c)
    return GluingDatum(tw, tw, IdentityFunctor(tw), DirectSumFunctor(IdentityFunctor(tw), phi.phi))


def p1_bundle(c: Category, phi: Autoequivalence, objs: Sequence = (), name="P1-bundle") -> GluedCategory:
    """C ×_G C with G(a, b) = hom(a, b ⊕ Φb); seeds are c₁- and c₂-side generators."""
    datum = bundle_datum(c, phi)
    seeds = []
    for o in objs:
        a = _as_tw(c, o)
        seeds.append(side_one(a))
    for o in objs:
        seeds.append(side_two(_as_tw(c, o)))
    G = GluedCategory(datum, seeds, name)
    for x in seeds:
        check_glued_object(datum, x)
    rep = bundle_report(G, phi)
    if not rep.ok:
        raise BadCertificate("; ".join(rep.lines()[1:]))
    return G


def side_one(a: TwObject) -> GluedObject:
    return GluedObject(a, None, ())


def side_two(b: TwObject) -> GluedObject:
    """c₂-side generator, placed as b[1] so that hom(c₁, c₂) sits in degree 0."""
    return GluedObject(None, bracket(b, 1), ())


def bundle_report(G: GluedCategory, phi: Autoequivalence) -> OracleReport:
    ones = [x for x in G.objects if x.b is None]
    twos = [x for x in G.objects if x.a is None]
    tw = G.datum.target
    rows, notes = [], []
    for x in twos:
        for y in ones:
            n = G.dim(x, y)
            rows.append((f"hom({x!r},{y!r}) zero complex", {}, {0: n} if n else {}, n == 0))
    for x in ones:
        for y in twos:
            b = bracket(y.b, -1)
            want = direct_sum([b, phi.obj(b)])
            a, c = G.h_row(x, y), tw.h_row(x.a, want)
            ok = a == c and _constructive_iso(G, x, y, want)
            rows.append((f"hom({x!r},{y!r}) vs hom(a, b⊕Φb)", a, c, ok))
    return OracleReport("P1-bundle (1)-(2)", rows, notes)


def _constructive_iso(G: GluedCategory, x, y, want) -> bool:
    """The h-block of hom(x, y) is hom(a, b[1] ⊕ Φb[1]); identifying basis
    vectors with those of hom(a, b ⊕ Φb) is a chain isomorphism up to the sign -1."""
    tw = G.datum.target
    D1 = G.hom_diff(x, y)
    D2 = tw.hom_diff(x.a, want)
    if G.hom_degrees(x, y) != tw.hom_degrees(x.a, want):
        return False
    return D1 == D2.scale(-G.field.one) if D1.rows else D2.rows == 0


# ------------------------------------------------------------ ΓS_φ

class BundleSections:
    """ΓS_φ = A2 ×^h_{C×C} A2 along (f1, Φ·f2) and (f1, f2)."""

    def __init__(self, c: Category, phi: Autoequivalence):
        self.c, self.phi = c, phi
        A2, (f1, f2, _) = a2_category(c)
        self.A2 = A2
        tw = A2.datum.target
        self.tw = tw
        P = CartesianProduct(tw, tw)
        self.P = P
        self.left = PairFunctor(f1, ComposedFunctor(phi.phi, f2), P)
        self.right = PairFunctor(f1, f2, P)
        self.category = ho_fiber(self.left, self.right, [], name="ΓS_φ")

    def _obj(self, x1: GluedObject, x2: GluedObject) -> EqualizerObject:
        s, t = self.left.obj(x1), self.right.obj(x2)
        mu = self.P.identity(s) if s == t else iso_check(self.P, s, t).f
        return fiber_object(self.left, self.right, x1, x2, mu)

    def s1(self, a: TwObject) -> EqualizerObject:
        return self._obj(GluedObject(a, None, ()), GluedObject(a, None, ()))

    def s2(self, b: TwObject) -> EqualizerObject:
        """((0, b[1], 0), (0, Φ(b)[1], 0), id)."""
        b1 = bracket(b, 1)
        return self._obj(GluedObject(None, b1, ()), GluedObject(None, self.phi.obj(b1), ()))

    def xi(self, a: TwObject, b: TwObject, mu1, mu2) -> EqualizerObject:
        """((a, b, μ₁), (a, Φb, μ₂), id, id)."""
        pb = self.phi.obj(b)
        return self._obj(GluedObject(a, b, tuple(mu1)), GluedObject(a, pb, tuple(mu2)))

    def add(self, *objs):
        for o in objs:
            if o not in self.category.objects:
                self.category.objects.append(o)
        return objs


def prop_checks(c: Category, phi: Autoequivalence, objs: Sequence,
                mixed: Sequence = ()) -> OracleReport:
    """(1) zero reverse homs, (2) hom(S1 a, S2 b) ≅ hom(a, b ⊕ Φb) as complexes,
    (3) cone(μ, τ, 0) ≅ Ξ(a, b, μ ⊕ τ) for each (a, b, μ, τ) in `mixed`."""
    B = BundleSections(c, phi)
    G = B.category
    tw = B.tw
    rows = []
    ones = [B.s1(_as_tw(c, o)) for o in objs]
    twos = [B.s2(_as_tw(c, o)) for o in objs]
    B.add(*ones, *twos)
    for y in twos:
        for x in ones:
            n = G.dim(y, x)
            rows.append((f"(1) hom(S2 {y.a[1].b!r}, S1 {x.a[0].a!r})", {}, {0: n} if n else {}, n == 0))
    for x, a in zip(ones, objs):
        for y, b in zip(twos, objs):
            a, b = _as_tw(c, a), _as_tw(c, b)
            want = direct_sum([b, phi.obj(b)])
            t1, t2 = G.h_row(x, y), tw.h_row(a, want)
            ok = t1 == t2 and _gamma_iso(B, x, y, a, b, want)
            rows.append((f"(2) hom(S1 {a!r}, S2 {b!r})", t1, t2, ok))
    for a, b, mu, tau in mixed:
        a, b = _as_tw(c, a), _as_tw(c, b)
        ok, t1, t2 = _cone_check(B, a, b, mu, tau)
        rows.append((f"(3) cone over ({a!r}, {b!r})", t1, t2, ok))
    return OracleReport("P1-bundle sections", rows, [])


def _gamma_iso(B: BundleSections, x, y, a, b, want) -> bool:
    """hom_Γ(S1 a, S2 b) is the direct sum of the two h-blocks hom(a, b[1]) and
    hom(a, Φb[1]); the basis identification with hom(a, b ⊕ Φb) is checked to
    intertwine the differentials up to the sign -1."""
    G, tw = B.category, B.tw
    D1 = G.hom_diff(x, y)
    D2 = tw.hom_diff(a, want)
    if G.hom_degrees(x, y) != tw.hom_degrees(a, want):
        return False
    if not D1.rows:
        return not D2.rows
    return D1 == D2.scale(-G.field.one)


def _cone_check(B: BundleSections, a, b, mu, tau):
    G, tw = B.category, B.tw
    A, Bo = B.s1(a), B.s2(b)
    X = B.xi(a, b, mu, tau)
    B.add(A, Bo, X)
    b1, pb1 = bracket(b, 1), B.phi.obj(bracket(b, 1))
    m1 = tw.assemble(a, b1, tw.entries(a, b, mu))
    m2 = tw.assemble(a, pb1, tw.entries(a, B.phi.obj(b), tau))
    vec = tuple(m1) + tuple(m2) + (G.field.zero,) * (G.dim(A, Bo) - len(m1) - len(m2))
    if G.degree_of(A, Bo, vec) not in (0, None) or not is_zero(G.d(A, Bo, vec)):
        return False, {}, {}
    TG = tw_category(G)
    C = cone(TwMorphism(embed(G, A), embed(G, Bo), TG.assemble(embed(G, A), embed(G, Bo), {(0, 0): vec})))
    E = embed(G, X)
    cert = iso_check(TG, C, E)
    return isinstance(cert, IsoCertificate), TG.h_row(C, C), TG.h_row(E, E)


def section_functors(bundle: GluedCategory, phi: Autoequivalence, x: GluedObject) -> tuple:
    """(cone(μ: a -> b), cone(ξ: a -> Φb)) for x = (a, b, μ ⊕ ξ), with the
    mapping cone cone(f: X -> Y) = Y ⊕ X[1]."""
    tw = bundle.datum.target
    a = x.a if x.a is not None else zero_object(tw.base)
    b = x.b if x.b is not None else zero_object(tw.base)
    pb = phi.obj(b)
    F2b = bundle.datum.F2(x.b)
    if F2b != direct_sum([b, pb]):
        raise NotSplit("the second component is not b ⊕ Φ(b) as data")
    ent = tw.entries(a, F2b, x.mu) if x.mu else {}
    mu, xi = {}, {}
    for (i, j), v in ent.items():
        if i < b.size:
            mu[(i, j)] = v
        else:
            xi[(i - b.size, j)] = v
    c1 = cone(TwMorphism(a, b, tw.assemble(a, b, mu)))
    c2 = cone(TwMorphism(a, pb, tw.assemble(a, pb, xi)))
    return shift(c1, -1), shift(c2, -1)
