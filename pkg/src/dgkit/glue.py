"""Gluing of dg categories along a pair of functors, and directed categories.

Objects of the glued category are triples (a, b, mu) with a in A1, b in
A2 (either may be None, standing for the zero object) and mu a closed
degree-0 element of hom(F1 a, F2 b) in the common target.  Morphisms
are triples (f, g, h) with h in hom^{i-1}(F1 a, F2 b').

    d(f, g, h) = (df, dg, -dh + F2(g)∘mu - xi∘F1(f))
    (f', g', h')∘(f, g, h) = (f'f, g'g, h'∘F1(f) + (-1)^{|g'|} F2(g')∘h)

The sign in front of dh is forced by d² = 0.  The cone functor sends
(a, b, mu) to cone(mu) and (r, s, t) of degree i to the block matrix
with r on the first summands, (-1)^i s on the second and -t in the
corner.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .dgcore import (Category, DgCategory, Functor, HomSpace, Matrix, ValidationReport,
                     block_diag, is_zero, split_by_degree, unit_vec, vadd, vsub, vec_degree)
from .twist import (NotClosed, TwCategory, TwMorphism, TwObject, WrongDegree, as_tw_functor,
                    cone, tw_category, zero_object)


@dataclass(frozen=True)
class GluedObject:
    a: object
    b: object
    mu: tuple = ()

    def __repr__(self):
        return f"({self.a!r}, {self.b!r}, mu)" if self.mu and any(self.mu) else f"({self.a!r}, {self.b!r}, 0)"


class GluingDatum:
    """Functors f1: a1 -> T and f2: a2 -> T into twisted complexes over a common base."""

    def __init__(self, a1: Category, a2: Category, f1: Functor, f2: Functor):
        f1, f2 = as_tw_functor(f1), as_tw_functor(f2)
        if f1.dst is not f2.dst:
            if getattr(f1.dst, "base", None) is not getattr(f2.dst, "base", None):
                raise ValueError("gluing functors must share a target")
        if not (a1.field == a2.field == f1.dst.field):
            raise ValueError("all categories must be over the same field")
        self.a1, self.a2, self.f1, self.f2 = a1, a2, f1, f2
        self.target: TwCategory = f1.dst
        self.field = a1.field

    def F1(self, a) -> TwObject:
        return zero_object(self.target.base) if a is None else self.f1.obj(a)

    def F2(self, b) -> TwObject:
        return zero_object(self.target.base) if b is None else self.f2.obj(b)


def _hd(cat, x, y):
    if x is None or y is None:
        return ()
    return cat.hom_degrees(x, y)


class GluedCategory(Category):
    def __init__(self, datum: GluingDatum, objs: Sequence[GluedObject] = (), name="glued"):
        self.datum = datum
        self.field = datum.field
        self.objects = list(objs)
        self.name = name
        self._cache = {}

    # block sizes
    def parts(self, x: GluedObject, y: GluedObject):
        key = (x, y)
        hit = self._cache.get(key)
        if hit is None:
            D = self.datum
            df = _hd(D.a1, x.a, y.a)
            dg = _hd(D.a2, x.b, y.b)
            dh = D.target.hom_degrees(D.F1(x.a), D.F2(y.b))
            hit = (len(df), len(dg), len(dh), df, dg, dh)
            self._cache[key] = hit
        return hit

    def split(self, x, y, v):
        nf, ng, nh = self.parts(x, y)[:3]
        return v[:nf], v[nf:nf + ng], v[nf + ng:]

    def hom_degrees(self, x, y):
        _, _, _, df, dg, dh = self.parts(x, y)
        return tuple(df) + tuple(dg) + tuple(p + 1 for p in dh)

    def hom_names(self, x, y):
        D = self.datum
        nf, ng, nh = self.parts(x, y)[:3]
        f = D.a1.hom_names(x.a, y.a) if nf else ()
        g = D.a2.hom_names(x.b, y.b) if ng else ()
        h = D.target.hom_names(D.F1(x.a), D.F2(y.b)) if nh else ()
        return tuple("f:" + n for n in f) + tuple("g:" + n for n in g) + tuple("h:" + n for n in h)

    def _F1(self, a, a2, f):
        if a is None or a2 is None or not f:
            return None
        return self.datum.f1.hom(a, a2, f)

    def _F2(self, b, b2, g):
        if b is None or b2 is None or not g:
            return None
        return self.datum.f2.hom(b, b2, g)

    def hom_diff(self, x, y):
        key = ("d", x, y)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        D = self.datum
        T = D.target
        nf, ng, nh = self.parts(x, y)[:3]
        n = nf + ng + nh
        F = self.field
        F1a, F2b, F1a2, F2b2 = D.F1(x.a), D.F2(x.b), D.F1(y.a), D.F2(y.b)
        cols = []
        for t in range(n):
            e = unit_vec(F, n, t)
            f, g, h = e[:nf], e[nf:nf + ng], e[nf + ng:]
            df = D.a1.d(x.a, y.a, f) if nf else ()
            dg = D.a2.d(x.b, y.b, g) if ng else ()
            dh = tuple(-c for c in T.d(F1a, F2b2, h)) if nh else ()
            if nh:
                F2g = self._F2(x.b, y.b, g)
                if F2g is not None and not is_zero(F2g) and x.mu:
                    dh = vadd(dh, T.compose(F1a, F2b, F2b2, F2g, x.mu))
                F1f = self._F1(x.a, y.a, f)
                if F1f is not None and not is_zero(F1f) and y.mu:
                    dh = vsub(dh, T.compose(F1a, F1a2, F2b2, y.mu, F1f))
            cols.append(tuple(df) + tuple(dg) + tuple(dh))
        m = Matrix.from_columns(F, cols, n) if n else Matrix.zeros(F, 0, 0)
        self._cache[key] = m
        return m

    def compose(self, x, y, z, g2, g1):
        """(f',g',h') = g2 on y -> z after (f,g,h) = g1 on x -> y."""
        D = self.datum
        T = D.target
        f, g, h = self.split(x, y, g1)
        f2, gg2, h2 = self.split(y, z, g2)
        nf, ng, nh = self.parts(x, z)[:3]
        F = self.field
        cf = D.a1.compose(x.a, y.a, z.a, f2, f) if nf and y.a is not None else (F.zero,) * nf
        cg = D.a2.compose(x.b, y.b, z.b, gg2, g) if ng and y.b is not None else (F.zero,) * ng
        ch = (F.zero,) * nh
        if nh:
            F1a, F1a1, F2b1, F2b2 = D.F1(x.a), D.F1(y.a), D.F2(y.b), D.F2(z.b)
            F1f = self._F1(x.a, y.a, f)
            if F1f is not None and h2 and not is_zero(h2):
                ch = vadd(ch, T.compose(F1a, F1a1, F2b2, h2, F1f))
            if h and not is_zero(h) and gg2 and not is_zero(gg2):
                degs = D.a2.hom_degrees(y.b, z.b)
                for dgr, comp in split_by_degree(degs, gg2).items():
                    F2g = D.f2.hom(y.b, z.b, comp)
                    term = T.compose(F1a, F2b1, F2b2, F2g, h)
                    ch = vsub(ch, term) if dgr % 2 else vadd(ch, term)
        return tuple(cf) + tuple(cg) + tuple(ch)

    def identity(self, x):
        D = self.datum
        f = D.a1.identity(x.a) if x.a is not None else ()
        g = D.a2.identity(x.b) if x.b is not None else ()
        return tuple(f) + tuple(g) + (self.field.zero,) * self.parts(x, x)[2]

    def materialize(self, names=None, name=None) -> DgCategory:
        from .dgcore import materialize
        return materialize(self, self.objects, names, name or self.name)


def check_glued_object(datum: GluingDatum, x: GluedObject) -> None:
    T = datum.target
    A, B = datum.F1(x.a), datum.F2(x.b)
    n = T.dim(A, B)
    if len(x.mu) != n:
        raise ValueError(f"mu has length {len(x.mu)}, expected {n}")
    deg = T.degree_of(A, B, x.mu)
    if deg not in (0, None):
        raise WrongDegree(f"mu has degree {deg}")
    if not is_zero(T.d(A, B, x.mu)):
        raise NotClosed("mu is not closed")


def glue(datum: GluingDatum, objs: Sequence[GluedObject], name="glued") -> GluedCategory:
    for x in objs:
        check_glued_object(datum, x)
    return GluedCategory(datum, objs, name)


def glued_object(datum: GluingDatum, a, b, mu=None) -> GluedObject:
    T = datum.target
    n = T.dim(datum.F1(a), datum.F2(b))
    mu = tuple(mu) if mu is not None else (datum.field.zero,) * n
    return GluedObject(a, b, mu)


class ConeFunctor(Functor):
    """c_{F1,F2}: glued category -> Tw of the common base."""

    def __init__(self, glued: GluedCategory):
        self.src = glued
        self.datum = glued.datum
        self.dst = self.datum.target
        self.name = "cone"

    def obj(self, x: GluedObject) -> TwObject:
        D = self.datum
        return cone(TwMorphism(D.F1(x.a), D.F2(x.b), x.mu))

    def hom(self, x, y, vec):
        D = self.datum
        T = self.dst
        f, g, h = self.src.split(x, y, vec)
        A, B, A2, B2 = D.F1(x.a), D.F2(x.b), D.F1(y.a), D.F2(y.b)
        cx, cy = self.obj(x), self.obj(y)
        n, n2 = A.size, A2.size
        out = {}

        def put(blocks, di, dj, sign=1):
            for (i, j), v in blocks.items():
                if sign == -1:
                    v = tuple(-c for c in v)
                key = (i + di, j + dj)
                out[key] = vadd(out[key], v) if key in out else v

        F1f = self.src._F1(x.a, y.a, f)
        if F1f is not None:
            put(T.entries(A, A2, F1f), 0, 0)
        if g and not is_zero(g):
            for dgr, comp in split_by_degree(D.a2.hom_degrees(x.b, y.b), g).items():
                put(T.entries(B, B2, D.f2.hom(x.b, y.b, comp)), n2, n, -1 if dgr % 2 else 1)
        if h and not is_zero(h):
            put(T.entries(A, B2, h), n2, 0, -1)
        return T.assemble(cx, cy, out)


def cone_functor(glued: GluedCategory) -> ConeFunctor:
    return ConeFunctor(glued)


def iterated_glue(pieces: Sequence[tuple], seeds: Sequence = (), name="glued"):
    """Left-associated gluing of (A_i, F_i) pieces; returns (category, cone functor)."""
    if not pieces:
        raise ValueError("need at least one piece")
    cat, fun = pieces[0]
    if len(pieces) == 1:
        return cat, fun
    for k, (a, f) in enumerate(pieces[1:], start=2):
        datum = GluingDatum(cat, a, fun, f)
        cat = GluedCategory(datum, (), name=f"{name}{k}")
        fun = ConeFunctor(cat)
    for x in seeds:
        check_glued_object(cat.datum, x)
    cat.objects = list(seeds)
    return cat, fun


def semiorthogonality_report(glued: GluedCategory, objs: Sequence[GluedObject] | None = None
                             ) -> ValidationReport:
    """Zero homs from A2-side to A1-side objects; A1-side homs equal the A1 homs."""
    objs = list(glued.objects if objs is None else objs)
    D = glued.datum
    rep = ValidationReport(f"{glued.name} semiorthogonality")
    side1 = [x for x in objs if x.b is None]
    side2 = [x for x in objs if x.a is None]
    for y in side2:
        for x in side1:
            if glued.dim(y, x):
                rep.add("semiorthogonality", (y, x), "reverse hom is nonzero")
    for x in side1:
        for x2 in side1:
            if glued.hom_degrees(x, x2) != tuple(D.a1.hom_degrees(x.a, x2.a)) or \
                    glued.hom_diff(x, x2) != D.a1.hom_diff(x.a, x2.a):
                rep.add("semiorthogonality", (x, x2), "A1-side hom differs from A1")
    return rep


# ------------------------------------------------------------ directed categories

def directed_category(c: Category, u: Sequence, name=None) -> DgCategory:
    """Objects P1..Pn; End(Pi) = k, hom(Pi,Pj) = hom(u_i,u_j) for i<j, else 0."""
    F = c.field
    n = len(u)
    objs = [f"P{i + 1}" for i in range(n)]
    homs, comp, units = {}, {}, {}
    for i in range(n):
        homs[(objs[i], objs[i])] = HomSpace(("id",), (0,), Matrix.zeros(F, 1, 1))
        units[objs[i]] = 0
        for j in range(i + 1, n):
            degs = c.hom_degrees(u[i], u[j])
            if degs:
                homs[(objs[i], objs[j])] = HomSpace(tuple(c.hom_names(u[i], u[j])), tuple(degs),
                                                    c.hom_diff(u[i], u[j]))
    for i in range(n):
        for j in range(i, n):
            for k in range(j, n):
                X, Y, Z = objs[i], objs[j], objs[k]
                nxy = len(homs.get((X, Y), HomSpace((), (), None)).names)
                nyz = len(homs.get((Y, Z), HomSpace((), (), None)).names)
                if not nxy or not nyz:
                    continue
                tab = {}
                for a in range(nyz):
                    for b in range(nxy):
                        if i == j:
                            row = {a: F.one}
                        elif j == k:
                            row = {b: F.one}
                        else:
                            g = unit_vec(F, nyz, a)
                            f = unit_vec(F, nxy, b)
                            v = c.compose(u[i], u[j], u[k], g, f)
                            row = {t: x for t, x in enumerate(v) if x}
                        if row:
                            tab[(a, b)] = row
                if tab:
                    comp[(X, Y, Z)] = tab
    return DgCategory(F, objs, homs, comp, units, name or f"directed({getattr(c, 'name', 'c')})")


def perf_point_pieces(c: Category, u: Sequence, point: DgCategory | None = None):
    """Copies of Tw(point) mapped to Tw(c) at the objects u_i."""
    from .instances import make_point
    from .dgcore import PointFunctor
    from .twist import ExtendedFunctor
    point = point or make_point(c.field)
    tp = tw_category(point)
    return point, [(tp, ExtendedFunctor(PointFunctor(point, c, ui))) for ui in u]


def directed_generators(point: DgCategory, k: int) -> list:
    """Generators of the k-fold glued category matching P1..Pk of the directed category.

    P1 is e placed in the first piece; P_j (j >= 2) is e[1] placed in the
    j-th piece, so that hom(P_i, P_j) = hom(u_i, u_j) in the same degrees.
    """
    from .twist import embed
    gens = []
    for j in range(k):
        obj = embed(point, "e", 0 if j == 0 else 1)
        x = None
        for level in range(1, k):
            if level == 1:
                if j == 0:
                    x = GluedObject(obj, None, ())
                elif j == 1:
                    x = GluedObject(None, obj, ())
                else:
                    x = None
            else:
                if j == level:
                    x = GluedObject(None, obj, ())
                elif j < level:
                    x = GluedObject(x, None, ())
        gens.append(x if k > 1 else obj)
    return gens


@dataclass
class OracleReport:
    name: str
    rows: list           # (label, left table, right table, equal)
    notes: list

    @property
    def ok(self):
        return all(r[3] for r in self.rows)

    def lines(self):
        out = [f"{self.name}: {'PASS' if self.ok else 'FAIL'}"]
        for label, a, b, eq in self.rows:
            out.append(f"  {label}: {fmt_table(a)} | {fmt_table(b)} {'match' if eq else 'MISMATCH'}")
        out.extend(f"  note: {n}" for n in self.notes)
        return out


def fmt_table(t: dict) -> str:
    if not t:
        return "{}"
    return "{" + ", ".join(f"{d}:{n}" for d, n in sorted(t.items())) + "}"


def directed_vs_glued_oracle(c: Category, u: Sequence) -> OracleReport:
    if not 1 <= len(u) <= 4:
        raise ValueError("directed_vs_glued_oracle supports 1 to 4 objects")
    dc = directed_category(c, u)
    point, pieces = perf_point_pieces(c, u)
    gens = directed_generators(point, len(u))
    cat, _ = iterated_glue(pieces, gens if len(u) > 1 else ())
    rows = []
    for i, x in enumerate(gens):
        for j, y in enumerate(gens):
            a = dc.h_row(dc.objects[i], dc.objects[j])
            b = cat.h_row(x, y)
            rows.append((f"(P{i + 1},P{j + 1})", a, b, a == b))
    return OracleReport(f"directed-vs-glued {list(u)}", rows, [])
