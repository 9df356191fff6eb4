"""Homotopy equalizers and fiber products, the A_n tower, and isomorphism recognition.

The equalizer of F1, F2: A -> T has objects (a, mu) with mu: F1 a -> F2 a
closed of degree 0 and invertible in H⁰.  Morphisms are pairs (f, h)
with h in hom^{i-1}(F1 a, F2 a'):

    d(f, h) = (df, -dh + F2(f)∘mu - xi∘F1(f))
    (f, h)∘(f', h') = (f f', h∘F1(f') + (-1)^{|f|} F2(f)∘h')

These are the glue formulas with g = f, so fiber products (equalizers
over A1 × A2) have literally the same hom complexes as glued categories.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

from .dgcore import (CartesianProduct, Category, ComposedFunctor, Functor, IdentityFunctor,
                     Projection, is_zero, split_by_degree, unit_vec, vadd, vsub)
from .exactla import Matrix, solve
from .glue import ConeFunctor, GluedCategory, GluedObject, GluingDatum, check_glued_object
from .twist import (TwCategory, TwMorphism, TwObject, cone, embed, tw_category, zero_object)


class BadCertificate(ValueError):
    pass


class CertificateNotFound(ValueError):
    pass


class UnsupportedN(ValueError):
    pass


# ------------------------------------------------------------ isomorphisms

@dataclass(frozen=True)
class IsoCertificate:
    """f: x -> y and g: y -> x, closed of degree 0, with [g][f] = 1 and [f][g] = 1."""
    x: object
    y: object
    f: tuple
    g: tuple


@dataclass(frozen=True)
class Unknown:
    note: str = ""

    def __bool__(self):
        return False


def _h0_coords(cat: Category, x, y, vec):
    gh = cat.hom_complex(x, y)
    return gh.cohomology_basis(0).coords(gh.restrict(vec, 0))


def _is_closed_deg0(cat, x, y, v) -> bool:
    return cat.degree_of(x, y, v) in (0, None) and is_zero(cat.d(x, y, v))


def verify_certificate(cat: Category, cert: IsoCertificate) -> bool:
    x, y = cert.x, cert.y
    if not (_is_closed_deg0(cat, x, y, cert.f) and _is_closed_deg0(cat, y, x, cert.g)):
        return False
    gf = cat.compose(x, y, x, cert.g, cert.f)
    fg = cat.compose(y, x, y, cert.f, cert.g)
    return (_h0_coords(cat, x, x, vsub(gf, cat.identity(x))) == _zero_tuple(cat, x, x)
            and _h0_coords(cat, y, y, vsub(fg, cat.identity(y))) == _zero_tuple(cat, y, y))


def _zero_tuple(cat, x, y):
    n = cat.hom_complex(x, y).cohomology_basis(0).dim
    return (cat.field.zero,) * n


def certify_iso(cat: Category, x, y, f) -> IsoCertificate | None:
    """Decide whether the class of a given closed degree-0 f is invertible.

    Exact: the inverse class solves a linear system in H⁰.
    """
    if not _is_closed_deg0(cat, x, y, f):
        return None
    F = cat.field
    hyx = cat.hom_complex(y, x)
    reps = [hyx.extend(r, 0) for r in hyx.cohomology_basis(0).reps]
    hxx = cat.hom_complex(x, x).cohomology_basis(0)
    hyy = cat.hom_complex(y, y).cohomology_basis(0)
    rows_x = [_h0_coords(cat, x, x, cat.compose(x, y, x, r, f)) for r in reps]
    rows_y = [_h0_coords(cat, y, y, cat.compose(y, x, y, f, r)) for r in reps]
    target = _h0_coords(cat, x, x, cat.identity(x)) + _h0_coords(cat, y, y, cat.identity(y))
    nrows = hxx.dim + hyy.dim
    if not reps:
        if any(target):
            return None
        g = cat.zero(y, x)
    else:
        cols = [rx + ry for rx, ry in zip(rows_x, rows_y)]
        if nrows == 0:
            c = (F.zero,) * len(reps)
        else:
            c = solve(Matrix.from_columns(F, cols, nrows), target)
            if c is None:
                return None
        g = cat.zero(y, x)
        for ci, r in zip(c, reps):
            if ci:
                g = vadd(g, tuple(ci * a for a in r))
    cert = IsoCertificate(x, y, tuple(f), g)
    if not verify_certificate(cat, cert):
        raise AssertionError("certificate failed re-verification")
    return cert


SEARCH_SEED = 0


def iso_check(cat: Category, x, y, samples: int = 64, seed: int | None = None):
    """Search for an H⁰-isomorphism x -> y; returns a certificate or Unknown.

    Random combinations are drawn from `seed`, defaulting to SEARCH_SEED.
    """
    if x == y:
        return IsoCertificate(x, y, cat.identity(x), cat.identity(x))
    tx, ty, txy = cat.h_row(x, x), cat.h_row(y, y), cat.h_row(x, y)
    if tx != ty or txy != tx:
        return Unknown("not isomorphic: H-tables differ")
    gh = cat.hom_complex(x, y)
    reps = [gh.extend(r, 0) for r in gh.cohomology_basis(0).reps]
    candidates = list(reps)
    if not reps:
        candidates = [cat.zero(x, y)]
    rng = random.Random(SEARCH_SEED if seed is None else seed)
    F = cat.field
    if len(reps) > 1:
        for _ in range(samples):
            coeffs = [F(rng.randint(-3, 3)) for _ in reps]
            v = cat.zero(x, y)
            for c, r in zip(coeffs, reps):
                if c:
                    v = vadd(v, tuple(c * a for a in r))
            candidates.append(v)
    for f in candidates:
        cert = certify_iso(cat, x, y, f)
        if cert is not None:
            return cert
    return Unknown(f"no invertible class among {len(candidates)} candidates")


def homotopy(cat: Category, x, y, v):
    """Some H with dH = v (v closed), or None if v is not exact."""
    gh = cat.hom_complex(x, y)
    degs = set(gh.degrees[i] for i, a in enumerate(v) if a)
    if not degs:
        return cat.zero(x, y)
    if len(degs) > 1:
        raise ValueError("homotopy needs a homogeneous input")
    k = degs.pop()
    D = gh.complex.d(k - 1)
    if D.cols == 0:
        return None
    sol = solve(D, gh.restrict(v, k))
    if sol is None:
        return None
    return gh.extend(sol, k - 1)


# ------------------------------------------------------------ equalizers

@dataclass(frozen=True)
class EqualizerObject:
    a: object
    mu: tuple
    cert: IsoCertificate | None = None

    def __hash__(self):
        return hash((self.a, self.mu))

    def __eq__(self, other):
        return isinstance(other, EqualizerObject) and (self.a, self.mu) == (other.a, other.mu)

    def __repr__(self):
        return f"Eq({self.a!r}, mu)"


class EqualizerCategory(Category):
    def __init__(self, f1: Functor, f2: Functor, objs: Sequence = (), name="equalizer"):
        if f1.src is not f2.src:
            raise ValueError("equalizer functors must share a source")
        self.f1, self.f2 = f1, f2
        self.A = f1.src
        self.T = f1.dst
        self.field = self.A.field
        self.objects = list(objs)
        self.name = name
        self._cache = {}

    def parts(self, x, y):
        key = (x, y)
        hit = self._cache.get(key)
        if hit is None:
            df = self.A.hom_degrees(x.a, y.a)
            dh = self.T.hom_degrees(self.f1.obj(x.a), self.f2.obj(y.a))
            hit = (len(df), len(dh), df, dh)
            self._cache[key] = hit
        return hit

    def split(self, x, y, v):
        nf = self.parts(x, y)[0]
        return v[:nf], v[nf:]

    def hom_degrees(self, x, y):
        _, _, df, dh = self.parts(x, y)
        return tuple(df) + tuple(p + 1 for p in dh)

    def hom_names(self, x, y):
        return tuple("f:" + n for n in self.A.hom_names(x.a, y.a)) + tuple(
            "h:" + n for n in self.T.hom_names(self.f1.obj(x.a), self.f2.obj(y.a)))

    def hom_diff(self, x, y):
        key = ("d", x, y)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        nf, nh = self.parts(x, y)[:2]
        n = nf + nh
        F = self.field
        T, A = self.T, self.A
        F1a, F2a, F1b, F2b = (self.f1.obj(x.a), self.f2.obj(x.a), self.f1.obj(y.a), self.f2.obj(y.a))
        cols = []
        for t in range(n):
            e = unit_vec(F, n, t)
            f, h = e[:nf], e[nf:]
            df = A.d(x.a, y.a, f) if nf else ()
            dh = tuple(-c for c in T.d(F1a, F2b, h)) if nh else ()
            if nh and not is_zero(f):
                dh = vadd(dh, T.compose(F1a, F2a, F2b, self.f2.hom(x.a, y.a, f), x.mu))
                dh = vsub(dh, T.compose(F1a, F1b, F2b, y.mu, self.f1.hom(x.a, y.a, f)))
            cols.append(tuple(df) + tuple(dh))
        m = Matrix.from_columns(F, cols, n) if n else Matrix.zeros(F, 0, 0)
        self._cache[key] = m
        return m

    def compose(self, x, y, z, g, f):
        """g = (f2, h2): y -> z after f = (f1, h1): x -> y."""
        A, T = self.A, self.T
        fa, fh = self.split(x, y, f)
        ga, gh = self.split(y, z, g)
        nf, nh = self.parts(x, z)[:2]
        ca = A.compose(x.a, y.a, z.a, ga, fa) if nf else ()
        ch = (self.field.zero,) * nh
        if nh:
            F1x, F1y, F2y, F2z = (self.f1.obj(x.a), self.f1.obj(y.a), self.f2.obj(y.a),
                                  self.f2.obj(z.a))
            if not is_zero(gh) and not is_zero(fa):
                ch = vadd(ch, T.compose(F1x, F1y, F2z, gh, self.f1.hom(x.a, y.a, fa)))
            if not is_zero(fh) and not is_zero(ga):
                for dg, comp in split_by_degree(A.hom_degrees(y.a, z.a), ga).items():
                    term = T.compose(F1x, F2y, F2z, self.f2.hom(y.a, z.a, comp), fh)
                    ch = vsub(ch, term) if dg % 2 else vadd(ch, term)
        return tuple(ca) + tuple(ch)

    def identity(self, x):
        return tuple(self.A.identity(x.a)) + (self.field.zero,) * self.parts(x, x)[1]

    def materialize(self, names=None, name=None):
        from .dgcore import materialize
        return materialize(self, self.objects, names, name or self.name)


class EqualizerForget(Functor):
    """(a, mu) |-> a and (f, h) |-> f."""

    def __init__(self, eq: EqualizerCategory):
        self.src, self.dst = eq, eq.A
        self.name = "forget"

    def obj(self, x):
        return x.a

    def hom(self, x, y, vec):
        return self.src.split(x, y, vec)[0]


def certify_structure_map(T: Category, src, dst, mu) -> IsoCertificate:
    cert = certify_iso(T, src, dst, mu)
    if cert is None:
        raise BadCertificate("structure morphism is not invertible in H⁰")
    return cert


def equalizer_object(f1: Functor, f2: Functor, a, mu) -> EqualizerObject:
    mu = tuple(mu)
    cert = certify_structure_map(f1.dst, f1.obj(a), f2.obj(a), mu)
    return EqualizerObject(a, mu, cert)


def ho_equalizer(f1: Functor, f2: Functor, objs: Sequence[EqualizerObject],
                 name="equalizer") -> EqualizerCategory:
    T = f1.dst
    for x in objs:
        c = x.cert
        if c is None or c.f != x.mu or not verify_certificate(T, c) or \
                (c.x, c.y) != (f1.obj(x.a), f2.obj(x.a)):
            raise BadCertificate(f"invalid certificate on {x!r}")
    return EqualizerCategory(f1, f2, objs, name)


@dataclass(frozen=True)
class FiberObject:
    a: object
    b: object
    mu: tuple
    cert: IsoCertificate | None = None


class FiberProduct(EqualizerCategory):
    """A1 ×^h_T A2 as the equalizer of F1∘pr1 and F2∘pr2 on A1 × A2."""

    def __init__(self, f1: Functor, f2: Functor, objs: Sequence = (), name="fiber"):
        self.g1, self.g2 = f1, f2
        prod = CartesianProduct(f1.src, f2.src)
        super().__init__(ComposedFunctor(f1, Projection(prod, 0)),
                         ComposedFunctor(f2, Projection(prod, 1)), objs, name)
        self.product = prod


def fiber_object(f1: Functor, f2: Functor, a, b, mu) -> EqualizerObject:
    mu = tuple(mu)
    cert = certify_structure_map(f1.dst, f1.obj(a), f2.obj(b), mu)
    return EqualizerObject((a, b), mu, cert)


def ho_fiber(f1: Functor, f2: Functor, objs: Sequence, name="fiber") -> FiberProduct:
    """objs: EqualizerObjects with a = (a1, a2), or FiberObjects."""
    conv = []
    for x in objs:
        if isinstance(x, FiberObject):
            x = EqualizerObject((x.a, x.b), x.mu, x.cert)
        conv.append(x)
    cat = FiberProduct(f1, f2, conv, name)
    T = f1.dst
    for x in conv:
        c = x.cert
        if c is None or c.f != x.mu or not verify_certificate(T, c) or \
                (c.x, c.y) != (f1.obj(x.a[0]), f2.obj(x.a[1])):
            raise BadCertificate(f"invalid certificate on {x!r}")
    return cat


# ------------------------------------------------------------ A_n tower

class GluedProjection(Functor):
    """(a, b, mu) |-> a (which=0) or b (which=1), with zero objects for None."""

    def __init__(self, glued: GluedCategory, which: int):
        self.src = glued
        self.which = which
        D = glued.datum
        self.dst = D.a1 if which == 0 else D.a2
        self.name = f"f{which + 1}"

    def obj(self, x):
        v = x.a if self.which == 0 else x.b
        if v is None:
            return zero_object(self.dst.base)
        return v

    def hom(self, x, y, vec):
        f, g, _ = self.src.split(x, y, vec)
        v = f if self.which == 0 else g
        s, t = self.obj(x), self.obj(y)
        if not v:
            return self.dst.zero(s, t)
        return v


@dataclass
class ATower:
    category: Category
    functors: list          # f1 .. f_{n+1}
    a2: GluedCategory
    tw: TwCategory


def a2_category(c: Category, seeds: Sequence = ()) -> tuple:
    tw = tw_category(c) if not isinstance(c, TwCategory) else c
    ident = IdentityFunctor(tw)
    datum = GluingDatum(tw, tw, ident, ident)
    A2 = GluedCategory(datum, (), name="A2")
    for x in seeds:
        check_glued_object(datum, x)
    A2.objects = list(seeds)
    return A2, [GluedProjection(A2, 0), GluedProjection(A2, 1), ConeFunctor(A2)]


def build_a_n(c: Category, n: int, seeds: Sequence = ()) -> ATower:
    """A_2(c) = Tw c ×_{id,id} Tw c with f1, f2, f3; A_3 = fiber of (f3, f1) on two copies."""
    if n not in (2, 3):
        raise UnsupportedN(f"A_n is built only for n in {{2, 3}}, got {n}")
    if n == 2:
        A2, fs = a2_category(c, seeds)
        return ATower(A2, fs, A2, A2.datum.target)
    A2, (f1, f2, f3) = a2_category(c)
    A3 = FiberProduct(f3, f1, (), name="A3")
    conv = []
    for x in seeds:
        if isinstance(x, FiberObject):
            x = EqualizerObject((x.a, x.b), x.mu, x.cert)
        conv.append(x)
    A3.objects = conv
    P = A3.product
    forget = EqualizerForget(A3)
    g = ComposedFunctor(Projection(P, 0), forget)
    h = ComposedFunctor(Projection(P, 1), forget)
    fs = [ComposedFunctor(f1, g), ComposedFunctor(f2, g), ComposedFunctor(f2, h),
          ComposedFunctor(f3, h)]
    for f, nm in zip(fs, ("f1", "f2", "f3", "f4")):
        f.name = nm
    return ATower(A3, fs, A2, A2.datum.target)


def a3_seed(tower: ATower, xg: GluedObject, xh: GluedObject, mu=None) -> EqualizerObject:
    """Fiber object over (xg, xh); mu defaults to the canonical identification when
    cone(xg) equals the first entry of xh as data."""
    A2 = tower.a2
    f3, f1 = ConeFunctor(A2), GluedProjection(A2, 0)
    s, t = f3.obj(xg), f1.obj(xh)
    T = tower.tw
    if mu is None:
        if s != t:
            raise ValueError("no canonical identification; pass mu")
        mu = T.identity(s)
    cert = certify_structure_map(T, s, t, mu)
    return EqualizerObject((xg, xh), tuple(mu), cert)


# ------------------------------------------------------------ lifts and cones

def fibration_lift(datum: GluingDatum, x: GluedObject, xi: IsoCertificate,
                   tau: IsoCertificate) -> tuple:
    """Transport (a, b, mu) along xi: a -> a' and tau: b -> b'.

    Returns ((a', b', mu'), certificate of (a,b,mu) ≅ (a',b',mu')) with
    mu' = F2(tau)∘mu∘F1(xi'), xi' the certified quasi-inverse of xi.
    """
    A1, A2, T = datum.a1, datum.a2, datum.target
    for cat, cert in ((A1, xi), (A2, tau)):
        if not verify_certificate(cat, cert):
            raise BadCertificate("invalid certificate")
    if xi.x != x.a or tau.x != x.b:
        raise BadCertificate("certificates do not start at the object")
    a2, b2 = xi.y, tau.y
    F1a, F1a2, F2b, F2b2 = datum.F1(x.a), datum.F1(a2), datum.F2(x.b), datum.F2(b2)
    F1xi_inv = datum.f1.hom(a2, x.a, xi.g)
    F2tau = datum.f2.hom(x.b, b2, tau.f)
    mu2 = T.compose(F1a2, F2b, F2b2, F2tau, T.compose(F1a2, F1a, F2b, x.mu, F1xi_inv))
    y = GluedObject(a2, b2, mu2)
    check_glued_object(datum, y)
    # h = F2(tau)∘mu∘F1(H) with dH = id - xi'∘xi makes (xi, tau, h) closed
    H = homotopy(A1, x.a, x.a, vsub(A1.identity(x.a), A1.compose(x.a, a2, x.a, xi.g, xi.f)))
    if H is None:
        raise BadCertificate("xi' is not a quasi-inverse of xi")
    F1H = datum.f1.hom(x.a, x.a, H)
    h = T.compose(F1a, F2b, F2b2, F2tau, T.compose(F1a, F1a, F2b, x.mu, F1H))
    G = GluedCategory(datum, [x, y])
    mor = tuple(xi.f) + tuple(tau.f) + tuple(h)
    cert = certify_iso(G, x, y, mor)
    if cert is None:
        raise CertificateNotFound("lifted morphism is not invertible")
    return y, cert


def cone_in_equalizer(eq: EqualizerCategory, x: EqualizerObject, y: EqualizerObject,
                      f) -> EqualizerObject:
    """Cone of a closed degree-0 (f_A, f') : (a, mu) -> (b, xi).

    The ambient category must be twisted complexes and both functors must
    commute with cones on data (extended functors do).  The structure map
    of the cone is the block matrix with mu, xi on the diagonal and f' in
    the corner.
    """
    A, T = eq.A, eq.T
    if not isinstance(A, TwCategory):
        raise ValueError("cones need a category of twisted complexes as source")
    if eq.degree_of(x, y, f) not in (0, None) or not is_zero(eq.d(x, y, f)):
        raise ValueError("cone_in_equalizer needs a closed degree-0 morphism")
    fa, fh = eq.split(x, y, f)
    c = cone(TwMorphism(x.a, y.a, fa))
    F1c, F2c = eq.f1.obj(c), eq.f2.obj(c)
    F1a, F2a, F1b, F2b = eq.f1.obj(x.a), eq.f2.obj(x.a), eq.f1.obj(y.a), eq.f2.obj(y.a)
    if F1c != cone(TwMorphism(F1a, F1b, eq.f1.hom(x.a, y.a, fa))) or \
            F2c != cone(TwMorphism(F2a, F2b, eq.f2.hom(x.a, y.a, fa))):
        raise ValueError("functors do not commute with cones on data")
    n1, n2 = F1a.size, F2a.size
    ent = {}
    for (i, j), v in T.entries(F1a, F2a, x.mu).items():
        ent[(i, j)] = v
    for (i, j), v in T.entries(F1b, F2b, y.mu).items():
        ent[(i + n2, j + n1)] = v
    for (i, j), v in T.entries(F1a, F2b, fh).items():
        key = (i + n2, j)
        ent[key] = vadd(ent[key], v) if key in ent else v
    gamma = T.assemble(F1c, F2c, ent)
    cert = certify_iso(T, F1c, F2c, gamma)
    if cert is None:
        raise CertificateNotFound("structure map of the cone is not invertible")
    return EqualizerObject(c, gamma, cert)
