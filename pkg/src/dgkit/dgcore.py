"""Finite dg categories, dg functors, bimodules and their validators.

A category is anything implementing the small protocol of `Category`:
graded hom bases, a differential matrix per hom space, composition on
coordinate vectors and identities.  `DgCategory` stores all of this as
explicit structure constants; the constructions in other modules are
lazy categories computing the same data by formula.

Sign conventions.  For f in hom^i(b,c) and g in hom^j(a,b) the
differential obeys d(f∘g) = df∘g + (-1)^i f∘dg.  Vectors are tuples of
field scalars in the declared basis order of the hom space.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field as dc_field
from typing import Hashable, Iterable, Sequence

from .exactla import (FieldSpec, FinComplex, Matrix, CohomologyBasis, cohomology_table,
                      induced_map, rank, QQ)


# ---------------------------------------------------------------- reports

@dataclass(frozen=True)
class Violation:
    axiom: str
    where: tuple
    detail: str = ""

    def __str__(self):
        loc = ", ".join(str(w) for w in self.where)
        return f"{self.axiom} at ({loc}){': ' + self.detail if self.detail else ''}"


@dataclass
class ValidationReport:
    subject: str
    violations: list = dc_field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, axiom, where, detail=""):
        self.violations.append(Violation(axiom, tuple(where), detail))

    def axioms(self) -> set:
        return {v.axiom for v in self.violations}

    def lines(self) -> list[str]:
        if self.ok:
            return [f"{self.subject}: ok"]
        return [f"{self.subject}: {len(self.violations)} violation(s)"] + [
            f"  {v}" for v in self.violations]


# ------------------------------------------------------------ vectors

def zero_vec(F: FieldSpec, n: int) -> tuple:
    return (F.zero,) * n


def unit_vec(F: FieldSpec, n: int, i: int) -> tuple:
    v = [F.zero] * n
    v[i] = F.one
    return tuple(v)


def vadd(u, v):
    return tuple(a + b for a, b in zip(u, v))


def vsub(u, v):
    return tuple(a - b for a, b in zip(u, v))


def vscale(c, u):
    return tuple(c * a for a in u)


def is_zero(v) -> bool:
    return not any(v)


def split_by_degree(degrees: Sequence[int], vec: Sequence) -> dict:
    """Homogeneous components of a vector, keyed by degree."""
    out = {}
    F0 = None
    for i, (d, a) in enumerate(zip(degrees, vec)):
        if a:
            if d not in out:
                F0 = vec[i] - vec[i]
                out[d] = [F0] * len(vec)
            out[d][i] = a
    return {d: tuple(v) for d, v in out.items()}


def vec_degree(degrees: Sequence[int], vec: Sequence):
    """Degree of a nonzero homogeneous vector; None for zero; raises if mixed."""
    ds = {d for d, a in zip(degrees, vec) if a}
    if not ds:
        return None
    if len(ds) > 1:
        raise ValueError(f"vector is not homogeneous (degrees {sorted(ds)})")
    return ds.pop()


# ------------------------------------------------------------ protocol

class Category:
    """Protocol for finite dg categories (concrete or computed by formula)."""

    field: FieldSpec = QQ

    def hom_degrees(self, x, y) -> tuple:
        raise NotImplementedError

    def hom_names(self, x, y) -> tuple:
        return tuple(f"b{i}" for i in range(len(self.hom_degrees(x, y))))

    def hom_diff(self, x, y) -> Matrix:
        raise NotImplementedError

    def compose(self, x, y, z, g, f) -> tuple:
        """g∘f for f in hom(x,y), g in hom(y,z)."""
        raise NotImplementedError

    def identity(self, x) -> tuple:
        raise NotImplementedError

    def seed_objects(self) -> list:
        return list(getattr(self, "objects", []))

    # derived helpers

    def dim(self, x, y) -> int:
        return len(self.hom_degrees(x, y))

    def zero(self, x, y) -> tuple:
        return zero_vec(self.field, self.dim(x, y))

    def basis(self, x, y) -> list:
        n = self.dim(x, y)
        return [unit_vec(self.field, n, i) for i in range(n)]

    def d(self, x, y, vec) -> tuple:
        if not vec:
            return ()
        return self.hom_diff(x, y).apply(vec)

    def degree_of(self, x, y, vec):
        return vec_degree(self.hom_degrees(x, y), vec)

    def hom_complex(self, x, y) -> "GradedHom":
        cache = self.__dict__.setdefault("_hom_complex_cache", {})
        key = (x, y)
        if key not in cache:
            cache[key] = GradedHom.build(self.field, self.hom_degrees(x, y), self.hom_diff(x, y))
        return cache[key]

    def h_row(self, x, y) -> dict:
        return self.hom_complex(x, y).table()


@dataclass
class GradedHom:
    """A hom space regrouped degree by degree as a FinComplex."""

    field: FieldSpec
    degrees: tuple
    blocks: dict          # degree -> list of basis indices
    complex: FinComplex
    _table: dict | None = None

    @classmethod
    def build(cls, F, degrees, diff: Matrix):
        blocks = {}
        for i, d in enumerate(degrees):
            blocks.setdefault(d, []).append(i)
        dims = {d: len(ix) for d, ix in blocks.items()}
        diffs = {}
        for d, ix in blocks.items():
            tgt = blocks.get(d + 1)
            if tgt:
                diffs[d] = diff.submatrix(tgt, ix)
        for i in range(diff.rows):
            for j in range(diff.cols):
                if diff.data[i][j] and degrees[i] != degrees[j] + 1:
                    raise ValueError("differential does not raise degree by one")
        return cls(F, tuple(degrees), blocks, FinComplex(F, dims, diffs))

    def table(self) -> dict:
        if self._table is None:
            self._table = cohomology_table(self.complex)
        return dict(self._table)

    def restrict(self, vec, d) -> tuple:
        return tuple(vec[i] for i in self.blocks.get(d, []))

    def extend(self, comp, d) -> tuple:
        out = [self.field.zero] * len(self.degrees)
        for i, a in zip(self.blocks.get(d, []), comp):
            out[i] = a
        return tuple(out)

    def cohomology_basis(self, d) -> CohomologyBasis:
        cache = self.__dict__.setdefault("_hb", {})
        if d not in cache:
            cache[d] = CohomologyBasis(self.complex, d)
        return cache[d]


# --------------------------------------------------------- concrete category

@dataclass
class HomSpace:
    names: tuple
    degrees: tuple
    diff: Matrix


class DgCategory(Category):
    """Finite dg category given by explicit structure constants.

    comp[(x, y, z)][(i, j)] = {k: c} means  e_i ∘ e_j = Σ c e_k  with
    e_i in hom(y,z) and e_j in hom(x,y).  units[x] is the basis index of
    the identity of x.
    """

    def __init__(self, field: FieldSpec, objects: Sequence, homs: dict, comp: dict,
                 units: dict, name: str = "category"):
        self.field = field
        self.objects = list(objects)
        self.homs = dict(homs)
        self.comp = {k: dict(v) for k, v in comp.items()}
        self.units = dict(units)
        self.name = name
        self._empty = HomSpace((), (), Matrix.zeros(field, 0, 0))

    def hom(self, x, y) -> HomSpace:
        return self.homs.get((x, y), self._empty)

    def hom_degrees(self, x, y):
        return self.hom(x, y).degrees

    def hom_names(self, x, y):
        return self.hom(x, y).names

    def hom_diff(self, x, y):
        return self.hom(x, y).diff

    def basis_index(self, x, y, name) -> int:
        return self.hom(x, y).names.index(name)

    def vec(self, x, y, **coeffs) -> tuple:
        hs = self.hom(x, y)
        v = [self.field.zero] * len(hs.names)
        for nm, c in coeffs.items():
            v[hs.names.index(nm)] = self.field(c)
        return tuple(v)

    def element(self, x, y, name) -> tuple:
        return unit_vec(self.field, self.dim(x, y), self.basis_index(x, y, name))

    def compose(self, x, y, z, g, f):
        n = self.dim(x, z)
        out = [self.field.zero] * n
        table = self.comp.get((x, y, z))
        if not table:
            return tuple(out)
        for i, a in enumerate(g):
            if not a:
                continue
            for j, b in enumerate(f):
                if not b:
                    continue
                row = table.get((i, j))
                if row:
                    ab = a * b
                    for k, c in row.items():
                        out[k] = out[k] + ab * c
        return tuple(out)

    def identity(self, x):
        return unit_vec(self.field, self.dim(x, x), self.units[x])

    def with_field(self, F: FieldSpec) -> "DgCategory":
        """Reduce structure constants into another field."""
        homs = {k: HomSpace(h.names, h.degrees,
                            Matrix(F, h.diff.rows, h.diff.cols,
                                   [[F(a) for a in r] for r in h.diff.data]))
                for k, h in self.homs.items()}
        comp = {k: {ij: {kk: F(c) for kk, c in row.items()} for ij, row in t.items()}
                for k, t in self.comp.items()}
        return DgCategory(F, self.objects, homs, comp, self.units, self.name)

    def __eq__(self, other):
        if not isinstance(other, DgCategory):
            return NotImplemented
        return (self.field == other.field and self.objects == other.objects
                and self.units == other.units
                and _norm_homs(self.homs) == _norm_homs(other.homs)
                and _norm_comp(self.comp) == _norm_comp(other.comp))

    __hash__ = None


def _norm_homs(homs):
    return {k: (h.names, h.degrees, h.diff) for k, h in homs.items() if h.names}


def _norm_comp(comp):
    return {k: {ij: {kk: c for kk, c in row.items() if c} for ij, row in t.items()
                if any(row.values())} for k, t in comp.items() if any(
                    any(r.values()) for r in t.values())}


class CategoryBuilder:
    """Incremental construction of a DgCategory by named basis elements."""

    def __init__(self, field: FieldSpec = QQ, name="category"):
        self.field = field
        self.name = name
        self.objects = []
        self._names = {}
        self._degrees = {}
        self._diff = {}
        self._comp = {}
        self.units = {}

    def add_object(self, x, unit_name=None):
        self.objects.append(x)
        nm = unit_name or f"id_{x}"
        self.add_basis(x, x, nm, 0)
        self.units[x] = self._names[(x, x)].index(nm)
        return self

    def add_basis(self, x, y, name, degree):
        self._names.setdefault((x, y), []).append(name)
        self._degrees.setdefault((x, y), []).append(degree)
        return self

    def set_diff(self, x, y, src, terms: dict):
        self._diff.setdefault((x, y), {})[src] = dict(terms)
        return self

    def set_comp(self, x, y, z, g, f, terms: dict):
        """g∘f = Σ terms, with g in hom(y,z) and f in hom(x,y), all by name."""
        self._comp.setdefault((x, y, z), {})[(g, f)] = dict(terms)
        return self

    def build(self) -> DgCategory:
        F = self.field
        homs = {}
        for key, names in self._names.items():
            n = len(names)
            m = Matrix.zeros(F, n, n)
            for src, terms in self._diff.get(key, {}).items():
                j = names.index(src)
                for tgt, c in terms.items():
                    m.data[names.index(tgt)][j] = F(c)
            homs[key] = HomSpace(tuple(names), tuple(self._degrees[key]), m)
        comp = {}
        for (x, y, z), tab in self._comp.items():
            out = {}
            for (g, f), terms in tab.items():
                i = self._names[(y, z)].index(g)
                j = self._names[(x, y)].index(f)
                out[(i, j)] = {self._names[(x, z)].index(k): F(c) for k, c in terms.items()}
            comp[(x, y, z)] = out
        # identities compose trivially unless overridden
        for x in self.objects:
            ux = self.units[x]
            for y in self.objects:
                for j, nm in enumerate(self._names.get((x, y), [])):
                    comp.setdefault((x, y, y), {}).setdefault((self.units[y], j), {j: F.one})
                    comp.setdefault((x, x, y), {}).setdefault((j, ux), {j: F.one})
        return DgCategory(F, self.objects, homs, comp, self.units, self.name)


# ------------------------------------------------------------ materialize

def _unit_basis(F: FieldSpec, idv: tuple, names: tuple):
    """A basis change making idv a basis vector: (position, to_new, new basis, new names)."""
    nz = [i for i, a in enumerate(idv) if a]
    if not nz:
        raise ValueError("identity is zero")
    k = nz[0]
    if nz == [k] and idv[k] == F.one:
        return k, None, None, names

    def to_new(v):
        w = list(v)
        w[k] = v[k] / idv[k]
        for j in range(len(v)):
            if j != k:
                w[j] = v[j] - idv[j] * w[k]
        return tuple(w)

    basis = [unit_vec(F, len(idv), j) for j in range(len(idv))]
    basis[k] = tuple(idv)
    label = "id"
    while label in names:
        label += "'"
    return k, to_new, basis, tuple(label if j == k else n for j, n in enumerate(names))


def materialize(cat: Category, objects: Sequence, names: Sequence[str] | None = None,
                name="category") -> DgCategory:
    """Freeze a lazy category on finitely many objects into structure constants.

    When an identity is not a basis vector, End(x) is rebased so that it is.
    """
    F = cat.field
    names = list(names) if names is not None else [str(o) for o in objects]
    if len(set(names)) != len(names):
        raise ValueError("object names must be distinct")
    ren = dict(zip(objects, names))
    homs, comp, units, change = {}, {}, {}, {}
    for x in objects:
        k, to_new, basis, hn = _unit_basis(F, tuple(cat.identity(x)), tuple(cat.hom_names(x, x)))
        units[ren[x]] = k
        change[x] = (to_new, basis, hn)

    def basis_of(x, y):
        if x is y or x == y:
            b = change[x][1]
            if b is not None:
                return b
        return cat.basis(x, y)

    def coords(x, y, v):
        if x is y or x == y:
            f = change[x][0]
            if f is not None:
                return f(v)
        return tuple(v)

    for x in objects:
        for y in objects:
            degs = cat.hom_degrees(x, y)
            if not degs:
                continue
            hn = change[x][2] if x == y else tuple(cat.hom_names(x, y))
            diff = cat.hom_diff(x, y)
            if x == y and change[x][0] is not None:
                cols = [coords(x, y, diff.apply(b)) for b in basis_of(x, y)]
                diff = Matrix.from_columns(F, cols, len(degs))
            homs[(ren[x], ren[y])] = HomSpace(hn, tuple(degs), diff)
    for x, y, z in itertools.product(objects, repeat=3):
        if not cat.dim(x, y) or not cat.dim(y, z) or not cat.dim(x, z):
            continue
        tab = {}
        for i, g in enumerate(basis_of(y, z)):
            for j, f in enumerate(basis_of(x, y)):
                v = coords(x, z, cat.compose(x, y, z, g, f))
                row = {k: a for k, a in enumerate(v) if a}
                if row:
                    tab[(i, j)] = row
        if tab:
            comp[(ren[x], ren[y], ren[z])] = tab
    return DgCategory(F, names, homs, comp, units, name)


# ------------------------------------------------------------ validators

def validate_category(cat: Category, objects: Sequence | None = None,
                      leibniz: str = "left", sample: int | None = None,
                      seed: int = 0) -> ValidationReport:
    """Check the dg axioms on all basis elements among the given objects.

    leibniz="left" is d(f∘g) = df∘g + (-1)^{|f|} f∘dg; "right" uses
    (-1)^{|g|} instead, kept only to exhibit that it clashes with
    associativity.  With `sample`, at most that many basis triples are
    checked per object triple, chosen with the given seed.
    """
    objs = list(cat.seed_objects() if objects is None else objects)
    rep = ValidationReport(getattr(cat, "name", type(cat).__name__))
    F = cat.field
    rng = random.Random(seed)

    def pick(items):
        items = list(items)
        if sample is not None and len(items) > sample:
            return rng.sample(items, sample)
        return items

    for x, y in itertools.product(objs, repeat=2):
        degs = cat.hom_degrees(x, y)
        D = cat.hom_diff(x, y)
        if (D.rows, D.cols) != (len(degs), len(degs)):
            rep.add("degree", (x, y), "differential has wrong shape")
            continue
        for i in range(D.rows):
            for j in range(D.cols):
                if D.data[i][j] and degs[i] != degs[j] + 1:
                    rep.add("degree", (x, y, j), "d does not raise degree by one")
        if not (D @ D).is_zero():
            rep.add("d-squared", (x, y))
    for x in objs:
        u = cat.identity(x)
        if cat.degree_of(x, x, u) not in (0, None) or is_zero(u):
            rep.add("unit", (x,), "identity is not a nonzero degree-0 element")
        if not is_zero(cat.d(x, x, u)):
            rep.add("unit", (x,), "d(id) ≠ 0")
    for x, y in itertools.product(objs, repeat=2):
        ux, uy = cat.identity(x), cat.identity(y)
        for j, f in enumerate(cat.basis(x, y)):
            if cat.compose(x, y, y, uy, f) != f:
                rep.add("unit", (x, y, j), "id∘f ≠ f")
            if cat.compose(x, x, y, f, ux) != f:
                rep.add("unit", (x, y, j), "f∘id ≠ f")
    for x, y, z in itertools.product(objs, repeat=3):
        dxy, dyz, dxz = cat.hom_degrees(x, y), cat.hom_degrees(y, z), cat.hom_degrees(x, z)
        pairs = pick(itertools.product(range(len(dyz)), range(len(dxy))))
        for i, j in pairs:
            g = unit_vec(F, len(dyz), i)
            f = unit_vec(F, len(dxy), j)
            gf = cat.compose(x, y, z, g, f)
            dg = cat.degree_of(x, z, gf)
            if dg is not None and dg != dyz[i] + dxy[j]:
                rep.add("composition-degree", (x, y, z, i, j))
            lhs = cat.d(x, z, gf)
            sgn = dyz[i] if leibniz == "left" else dxy[j]
            t1 = cat.compose(x, y, z, cat.d(y, z, g), f)
            t2 = cat.compose(x, y, z, g, cat.d(x, y, f))
            rhs = vadd(t1, t2) if sgn % 2 == 0 else vsub(t1, t2)
            if lhs != rhs:
                rep.add("leibniz", (x, y, z, i, j))
    for x, y, z, w in itertools.product(objs, repeat=4):
        nxy, nyz, nzw = cat.dim(x, y), cat.dim(y, z), cat.dim(z, w)
        if not (nxy and nyz and nzw):
            continue
        for i, j, k in pick(itertools.product(range(nzw), range(nyz), range(nxy))):
            h, g, f = unit_vec(F, nzw, i), unit_vec(F, nyz, j), unit_vec(F, nxy, k)
            a = cat.compose(x, z, w, h, cat.compose(x, y, z, g, f))
            b = cat.compose(x, y, w, cat.compose(y, z, w, h, g), f)
            if a != b:
                rep.add("associativity", (x, y, z, w, i, j, k))
    return rep


# ------------------------------------------------------------ functors

class Functor:
    src: Category
    dst: Category

    def obj(self, x):
        raise NotImplementedError

    def hom(self, x, y, vec) -> tuple:
        raise NotImplementedError

    def hom_matrix(self, x, y) -> Matrix:
        cols = [self.hom(x, y, b) for b in self.src.basis(x, y)]
        return Matrix.from_columns(self.dst.field, cols, self.dst.dim(self.obj(x), self.obj(y)))


class DgFunctor(Functor):
    """Functor given by an object map and one matrix per hom space."""

    def __init__(self, src: Category, dst: Category, obj_map: dict, hom_map: dict,
                 name="functor"):
        self.src, self.dst = src, dst
        self.obj_map = dict(obj_map)
        self.hom_map = dict(hom_map)
        self.name = name

    def obj(self, x):
        return self.obj_map[x]

    def hom(self, x, y, vec):
        m = self.hom_map.get((x, y))
        if m is None:
            return self.dst.zero(self.obj(x), self.obj(y))
        return m.apply(vec)

    def __eq__(self, other):
        if not isinstance(other, DgFunctor):
            return NotImplemented
        norm = lambda h: {k: m for k, m in h.items() if m.rows and m.cols}
        return (self.obj_map == other.obj_map and norm(self.hom_map) == norm(other.hom_map)
                and self.name == other.name)

    __hash__ = None


class IdentityFunctor(Functor):
    def __init__(self, cat: Category):
        self.src = self.dst = cat
        self.name = "id"

    def obj(self, x):
        return x

    def hom(self, x, y, vec):
        return tuple(vec)


class ComposedFunctor(Functor):
    """outer ∘ inner."""

    def __init__(self, outer: Functor, inner: Functor):
        self.outer, self.inner = outer, inner
        self.src, self.dst = inner.src, outer.dst
        self.name = f"{getattr(outer, 'name', '?')}∘{getattr(inner, 'name', '?')}"

    def obj(self, x):
        return self.outer.obj(self.inner.obj(x))

    def hom(self, x, y, vec):
        return self.outer.hom(self.inner.obj(x), self.inner.obj(y), self.inner.hom(x, y, vec))


def materialize_functor(fun: Functor, src: DgCategory, dst_objects: dict | None = None,
                        dst: Category | None = None, name="functor") -> DgFunctor:
    """Freeze a functor on the objects of a concrete source."""
    dst = dst or fun.dst
    om = {x: (dst_objects[fun.obj(x)] if dst_objects else fun.obj(x)) for x in src.objects}
    hm = {}
    for x in src.objects:
        for y in src.objects:
            if src.dim(x, y):
                hm[(x, y)] = fun.hom_matrix(x, y)
    return DgFunctor(src, dst, om, hm, name)


def validate_functor(fun: Functor, objects: Sequence | None = None,
                     sample: int | None = None, seed: int = 0) -> ValidationReport:
    objs = list(fun.src.seed_objects() if objects is None else objects)
    rep = ValidationReport(getattr(fun, "name", type(fun).__name__))
    S, T = fun.src, fun.dst
    rng = random.Random(seed)
    for x, y in itertools.product(objs, repeat=2):
        fx, fy = fun.obj(x), fun.obj(y)
        sd = S.hom_degrees(x, y)
        for j, b in enumerate(S.basis(x, y)):
            img = fun.hom(x, y, b)
            dg = T.degree_of(fx, fy, img)
            if dg is not None and dg != sd[j]:
                rep.add("functor-degree", (x, y, j))
            if T.d(fx, fy, img) != fun.hom(x, y, S.d(x, y, b)):
                rep.add("functor-differential", (x, y, j))
    for x in objs:
        if fun.hom(x, x, S.identity(x)) != T.identity(fun.obj(x)):
            rep.add("functor-unit", (x,))
    for x, y, z in itertools.product(objs, repeat=3):
        pairs = list(itertools.product(range(S.dim(y, z)), range(S.dim(x, y))))
        if sample is not None and len(pairs) > sample:
            pairs = rng.sample(pairs, sample)
        for i, j in pairs:
            g = unit_vec(S.field, S.dim(y, z), i)
            f = unit_vec(S.field, S.dim(x, y), j)
            lhs = fun.hom(x, z, S.compose(x, y, z, g, f))
            rhs = T.compose(fun.obj(x), fun.obj(y), fun.obj(z), fun.hom(y, z, g), fun.hom(x, y, f))
            if lhs != rhs:
                rep.add("functor-composition", (x, y, z, i, j))
    return rep


def chain_map_blocks(fun: Functor, x, y) -> tuple:
    """The map hom(x,y) -> hom(Fx,Fy) as degreewise matrices."""
    S, T = fun.src, fun.dst
    hs, ht = S.hom_complex(x, y), T.hom_complex(fun.obj(x), fun.obj(y))
    blocks = {}
    F = S.field
    for d, ix in hs.blocks.items():
        cols = []
        for i in ix:
            img = fun.hom(x, y, unit_vec(F, len(hs.degrees), i))
            cols.append(ht.restrict(img, d))
        blocks[d] = Matrix.from_columns(F, cols, len(ht.blocks.get(d, [])))
    return hs, ht, blocks


@dataclass
class QuasiFFReport:
    rows: list          # (pair, degree, src_dim, dst_dim, rank)
    failures: list

    @property
    def ok(self):
        return not self.failures

    def lines(self):
        out = []
        for pair, d, a, b, r in self.rows:
            flag = "iso" if a == b == r else "FAIL"
            out.append(f"{pair} degree {d}: {a} -> {b} rank {r} {flag}")
        out.append("quasi-fully-faithful on the given pairs" if self.ok
                   else "not quasi-fully-faithful on the given pairs")
        return out


def quasi_ff_check(fun: Functor, pairs: Iterable) -> QuasiFFReport:
    rows, fails = [], []
    for x, y in pairs:
        hs, ht, blocks = chain_map_blocks(fun, x, y)
        degs = sorted(set(hs.table()) | set(ht.table()))
        for d in degs:
            a = hs.table().get(d, 0)
            b = ht.table().get(d, 0)
            if a and b:
                m = induced_map(hs.complex, ht.complex, blocks, d)
                r = rank(m)
            else:
                r = 0
            rows.append(((x, y), d, a, b, r))
            if not (a == b == r):
                fails.append(((x, y), d))
    return QuasiFFReport(rows, fails)


def postcomposition_blocks(cat: Category, z, a, b, phi) -> dict:
    """Degreewise matrices of hom(z,a) -> hom(z,b), v |-> phi∘v."""
    ha, hb = cat.hom_complex(z, a), cat.hom_complex(z, b)
    F = cat.field
    out = {}
    for d, ix in ha.blocks.items():
        cols = [hb.restrict(cat.compose(z, a, b, phi, unit_vec(F, len(ha.degrees), i)), d)
                for i in ix]
        out[d] = Matrix.from_columns(F, cols, len(hb.blocks.get(d, [])))
    return out


def induced_postcomposition(cat: Category, z, a, b, phi, degree: int) -> Matrix:
    """The map H^degree hom(z,a) -> H^degree hom(z,b) induced by a closed phi."""
    ha, hb = cat.hom_complex(z, a), cat.hom_complex(z, b)
    return induced_map(ha.complex, hb.complex, postcomposition_blocks(cat, z, a, b, phi), degree)


def h_table(cat: Category, objs: Sequence) -> dict:
    """{(x, y): {degree: dim H^degree hom(x, y)}} with zero entries omitted."""
    return {(x, y): cat.h_row(x, y) for x in objs for y in objs}


# ---------------------------------------------------- natural transformations

@dataclass
class NaturalTransformation:
    src: Functor
    dst: Functor
    components: dict        # object -> vector in hom(src(x), dst(x))


def validate_natural_transformation(eta: NaturalTransformation,
                                    objects: Sequence | None = None) -> ValidationReport:
    F, G = eta.src, eta.dst
    T = F.dst
    objs = list(F.src.seed_objects() if objects is None else objects)
    rep = ValidationReport("natural transformation")
    for x in objs:
        c = eta.components[x]
        if T.degree_of(F.obj(x), G.obj(x), c) not in (0, None):
            rep.add("component-degree", (x,))
        if not is_zero(T.d(F.obj(x), G.obj(x), c)):
            rep.add("component-closed", (x,))
    for x, y in itertools.product(objs, repeat=2):
        for j, f in enumerate(F.src.basis(x, y)):
            lhs = T.compose(F.obj(x), G.obj(x), G.obj(y), G.hom(x, y, f), eta.components[x])
            rhs = T.compose(F.obj(x), F.obj(y), G.obj(y), eta.components[y], F.hom(x, y, f))
            if lhs != rhs:
                rep.add("naturality", (x, y, j))
    return rep


# ------------------------------------------------------------ bimodules

class Bimodule:
    """M(a, b) for a in left_cat, b in right_cat.

    Post-composition by right_cat morphisms b -> b' and pre-composition
    by left_cat morphisms a' -> a, as in M(a,b) = hom(F1 a, F2 b).
    """

    left_cat: Category
    right_cat: Category
    field: FieldSpec

    def degrees(self, a, b) -> tuple:
        raise NotImplementedError

    def diff(self, a, b) -> Matrix:
        raise NotImplementedError

    def post(self, a, b, b2, g, m) -> tuple:
        raise NotImplementedError

    def pre(self, a2, a, b, m, f) -> tuple:
        raise NotImplementedError


class FunctorBimodule(Bimodule):
    def __init__(self, f1: Functor, f2: Functor):
        if f1.dst is not f2.dst:
            raise ValueError("functors must share a target")
        self.f1, self.f2 = f1, f2
        self.left_cat, self.right_cat = f1.src, f2.src
        self.target = f1.dst
        self.field = self.target.field

    def degrees(self, a, b):
        return self.target.hom_degrees(self.f1.obj(a), self.f2.obj(b))

    def diff(self, a, b):
        return self.target.hom_diff(self.f1.obj(a), self.f2.obj(b))

    def post(self, a, b, b2, g, m):
        f1, f2 = self.f1, self.f2
        return self.target.compose(f1.obj(a), f2.obj(b), f2.obj(b2), f2.hom(b, b2, g), m)

    def pre(self, a2, a, b, m, f):
        f1, f2 = self.f1, self.f2
        return self.target.compose(f1.obj(a2), f1.obj(a), f2.obj(b), m, f1.hom(a2, a, f))


class DgBimodule(Bimodule):
    """Bimodule given by explicit structure constants.

    post_c[(a, b, b2)][(i, j)] = {k: c}: right_cat basis i of hom(b,b2)
    acting on basis j of M(a,b).  pre_c[(a2, a, b)][(j, i)] = {k: c}:
    basis j of M(a,b) precomposed with left_cat basis i of hom(a2,a).
    """

    def __init__(self, left_cat: DgCategory, right_cat: DgCategory, values: dict,
                 post_c: dict, pre_c: dict, name="bimodule"):
        self.left_cat, self.right_cat = left_cat, right_cat
        self.field = left_cat.field
        self.values = dict(values)
        self.post_c, self.pre_c = post_c, pre_c
        self.name = name

    def _val(self, a, b):
        return self.values.get((a, b), HomSpace((), (), Matrix.zeros(self.field, 0, 0)))

    def degrees(self, a, b):
        return self._val(a, b).degrees

    def diff(self, a, b):
        return self._val(a, b).diff

    def _act(self, table, n, u, v):
        out = [self.field.zero] * n
        for i, x in enumerate(u):
            if x:
                for j, y in enumerate(v):
                    if y:
                        for k, c in table.get((i, j), {}).items():
                            out[k] = out[k] + x * y * c
        return tuple(out)

    def post(self, a, b, b2, g, m):
        return self._act(self.post_c.get((a, b, b2), {}), len(self.degrees(a, b2)), g, m)

    def pre(self, a2, a, b, m, f):
        return self._act(self.pre_c.get((a2, a, b), {}), len(self.degrees(a2, b)), m, f)

    def __eq__(self, other):
        if not isinstance(other, DgBimodule):
            return NotImplemented
        return (self.name == other.name and self.left_cat == other.left_cat
                and self.right_cat == other.right_cat
                and _norm_homs(self.values) == _norm_homs(other.values)
                and _norm_comp(self.post_c) == _norm_comp(other.post_c)
                and _norm_comp(self.pre_c) == _norm_comp(other.pre_c))

    __hash__ = None


def materialize_bimodule(M: Bimodule, left: DgCategory, right: DgCategory,
                         name="bimodule") -> DgBimodule:
    F = M.field
    values, post_c, pre_c = {}, {}, {}
    for a in left.objects:
        for b in right.objects:
            degs = M.degrees(a, b)
            if degs:
                values[(a, b)] = HomSpace(tuple(f"m{i}" for i in range(len(degs))), tuple(degs),
                                          M.diff(a, b))
    for a in left.objects:
        for b, b2 in itertools.product(right.objects, repeat=2):
            tab = {}
            for i, g in enumerate(right.basis(b, b2)):
                for j in range(len(M.degrees(a, b))):
                    v = M.post(a, b, b2, g, unit_vec(F, len(M.degrees(a, b)), j))
                    row = {k: c for k, c in enumerate(v) if c}
                    if row:
                        tab[(i, j)] = row
            if tab:
                post_c[(a, b, b2)] = tab
    for a2, a in itertools.product(left.objects, repeat=2):
        for b in right.objects:
            tab = {}
            for j in range(len(M.degrees(a, b))):
                for i, f in enumerate(left.basis(a2, a)):
                    v = M.pre(a2, a, b, unit_vec(F, len(M.degrees(a, b)), j), f)
                    row = {k: c for k, c in enumerate(v) if c}
                    if row:
                        tab[(j, i)] = row
            if tab:
                pre_c[(a2, a, b)] = tab
    return DgBimodule(left, right, values, post_c, pre_c, name)


def validate_bimodule(M: Bimodule, left_objs: Sequence | None = None,
                      right_objs: Sequence | None = None) -> ValidationReport:
    A1, A2 = M.left_cat, M.right_cat
    lo = list(A1.seed_objects() if left_objs is None else left_objs)
    ro = list(A2.seed_objects() if right_objs is None else right_objs)
    F = M.field
    rep = ValidationReport(getattr(M, "name", "bimodule"))

    def basis(a, b):
        n = len(M.degrees(a, b))
        return [unit_vec(F, n, i) for i in range(n)]

    def dM(a, b, v):
        return M.diff(a, b).apply(v) if v else ()

    def deg(a, b, v):
        return vec_degree(M.degrees(a, b), v)

    for a in lo:
        for b in ro:
            D = M.diff(a, b)
            if not (D @ D).is_zero():
                rep.add("d-squared", (a, b))
            for j, m in enumerate(basis(a, b)):
                if M.post(a, b, b, A2.identity(b), m) != m:
                    rep.add("unit", (a, b, j), "right unit")
                if M.pre(a, a, b, m, A1.identity(a)) != m:
                    rep.add("unit", (a, b, j), "left unit")
    for a in lo:
        for b, b2 in itertools.product(ro, repeat=2):
            for i, g in enumerate(A2.basis(b, b2)):
                for j, m in enumerate(basis(a, b)):
                    lhs = dM(a, b2, M.post(a, b, b2, g, m))
                    t1 = M.post(a, b, b2, A2.d(b, b2, g), m)
                    t2 = M.post(a, b, b2, g, dM(a, b, m))
                    sg = A2.degree_of(b, b2, g)
                    rhs = vadd(t1, t2) if sg % 2 == 0 else vsub(t1, t2)
                    if lhs != rhs:
                        rep.add("leibniz", (a, b, b2, i, j), "post-composition")
    for a2, a in itertools.product(lo, repeat=2):
        for b in ro:
            for j, m in enumerate(basis(a, b)):
                sm = deg(a, b, m)
                for i, f in enumerate(A1.basis(a2, a)):
                    lhs = dM(a2, b, M.pre(a2, a, b, m, f))
                    t1 = M.pre(a2, a, b, dM(a, b, m), f)
                    t2 = M.pre(a2, a, b, m, A1.d(a2, a, f))
                    rhs = vadd(t1, t2) if sm % 2 == 0 else vsub(t1, t2)
                    if lhs != rhs:
                        rep.add("leibniz", (a2, a, b, j, i), "pre-composition")
    for a2, a in itertools.product(lo, repeat=2):
        for b, b2 in itertools.product(ro, repeat=2):
            for g in A2.basis(b, b2):
                for m in basis(a, b):
                    for f in A1.basis(a2, a):
                        x = M.pre(a2, a, b2, M.post(a, b, b2, g, m), f)
                        y = M.post(a2, b, b2, g, M.pre(a2, a, b, m, f))
                        if x != y:
                            rep.add("bimodule-commutation", (a2, a, b, b2))
    for a in lo:
        for b, b2, b3 in itertools.product(ro, repeat=3):
            for h in A2.basis(b2, b3):
                for g in A2.basis(b, b2):
                    for m in basis(a, b):
                        x = M.post(a, b2, b3, h, M.post(a, b, b2, g, m))
                        y = M.post(a, b, b3, A2.compose(b, b2, b3, h, g), m)
                        if x != y:
                            rep.add("associativity", (a, b, b2, b3), "post-composition")
    for a3, a2, a in itertools.product(lo, repeat=3):
        for b in ro:
            for m in basis(a, b):
                for f in A1.basis(a2, a):
                    for e in A1.basis(a3, a2):
                        x = M.pre(a3, a2, b, M.pre(a2, a, b, m, f), e)
                        y = M.pre(a3, a, b, m, A1.compose(a3, a2, a, f, e))
                        if x != y:
                            rep.add("associativity", (a3, a2, a, b), "pre-composition")
    return rep


# ------------------------------------------------------------ opposite / products

def opposite(cat: DgCategory) -> DgCategory:
    """hom_op(x,y) = hom(y,x); g ∘op f = (-1)^{|f||g|} f ∘ g."""
    F = cat.field
    homs = {(y, x): h for (x, y), h in cat.homs.items()}
    comp = {}
    for (x, y, z), tab in cat.comp.items():
        dzy = cat.hom_degrees(x, y)   # op hom(y,x) basis
        dyz = cat.hom_degrees(y, z)
        out = {}
        for (i, j), row in tab.items():
            # e_i in hom(y,z), e_j in hom(x,y); in the opposite this is e_j ∘op e_i
            s = -F.one if (dyz[i] * dzy[j]) % 2 else F.one
            out[(j, i)] = {k: s * c for k, c in row.items()}
        comp[(z, y, x)] = out
    return DgCategory(F, cat.objects, homs, comp, cat.units, f"{cat.name}^op")


def product(c1: DgCategory, c2: DgCategory) -> DgCategory:
    """Tensor product: hom((a,b),(a',b')) = hom(a,a') ⊗ hom(b,b').

    (f⊗g)∘(f'⊗g') = (-1)^{|g||f'|} (f∘f')⊗(g∘g'),
    d(f⊗g) = df⊗g + (-1)^{|f|} f⊗dg.
    """
    F = c1.field
    objs = [(a, b) for a in c1.objects for b in c2.objects]
    name = {o: f"{o[0]}⊗{o[1]}" for o in objs}
    homs = {}
    for (a, b), (a2, b2) in itertools.product(objs, repeat=2):
        h1, h2 = c1.hom(a, a2), c2.hom(b, b2)
        n1, n2 = len(h1.names), len(h2.names)
        if not (n1 and n2):
            continue
        names = tuple(f"{p}⊗{q}" for p in h1.names for q in h2.names)
        degs = tuple(p + q for p in h1.degrees for q in h2.degrees)
        D = Matrix.zeros(F, n1 * n2, n1 * n2)
        for i in range(n1):
            for j in range(n2):
                col = i * n2 + j
                for k in range(n1):
                    c = h1.diff.data[k][i]
                    if c:
                        D.data[k * n2 + j][col] += c
                s = -F.one if h1.degrees[i] % 2 else F.one
                for k in range(n2):
                    c = h2.diff.data[k][j]
                    if c:
                        D.data[i * n2 + k][col] += s * c
        homs[(name[(a, b)], name[(a2, b2)])] = HomSpace(names, degs, D)
    comp = {}
    for x, y, z in itertools.product(objs, repeat=3):
        t1 = c1.comp.get((x[0], y[0], z[0]), {})
        t2 = c2.comp.get((x[1], y[1], z[1]), {})
        if not t1 or not t2:
            continue
        n2_yz = c2.dim(y[1], z[1])
        n2_xy = c2.dim(x[1], y[1])
        n2_xz = c2.dim(x[1], z[1])
        d2_yz = c2.hom_degrees(y[1], z[1])
        d1_xy = c1.hom_degrees(x[0], y[0])
        out = {}
        for (i1, j1), r1 in t1.items():
            for (i2, j2), r2 in t2.items():
                s = -F.one if (d2_yz[i2] * d1_xy[j1]) % 2 else F.one
                row = {}
                for k1, a in r1.items():
                    for k2, b in r2.items():
                        row[k1 * n2_xz + k2] = s * a * b
                out[(i1 * n2_yz + i2, j1 * n2_xy + j2)] = row
        comp[(name[x], name[y], name[z])] = out
    units = {name[(a, b)]: c1.units[a] * c2.dim(b, b) + c2.units[b] for a, b in objs}
    return DgCategory(F, [name[o] for o in objs], homs, comp, units, f"{c1.name}⊗{c2.name}")


class CartesianProduct(Category):
    """Objects are pairs; hom((a,b),(a',b')) = hom(a,a') ⊕ hom(b,b')."""

    def __init__(self, c1: Category, c2: Category, seeds: Sequence = ()):
        self.c1, self.c2 = c1, c2
        self.field = c1.field
        self.objects = list(seeds)
        self.name = f"{getattr(c1, 'name', 'c1')}×{getattr(c2, 'name', 'c2')}"

    def _split(self, x, y, v):
        n = self.c1.dim(x[0], y[0])
        return v[:n], v[n:]

    def hom_degrees(self, x, y):
        return self.c1.hom_degrees(x[0], y[0]) + self.c2.hom_degrees(x[1], y[1])

    def hom_names(self, x, y):
        return tuple("1." + n for n in self.c1.hom_names(x[0], y[0])) + tuple(
            "2." + n for n in self.c2.hom_names(x[1], y[1]))

    def hom_diff(self, x, y):
        return block_diag(self.field, [self.c1.hom_diff(x[0], y[0]), self.c2.hom_diff(x[1], y[1])])

    def compose(self, x, y, z, g, f):
        g1, g2 = self._split(y, z, g)
        f1, f2 = self._split(x, y, f)
        return (self.c1.compose(x[0], y[0], z[0], g1, f1)
                + self.c2.compose(x[1], y[1], z[1], g2, f2))

    def identity(self, x):
        return self.c1.identity(x[0]) + self.c2.identity(x[1])


class Projection(Functor):
    def __init__(self, prod: CartesianProduct, which: int):
        self.src = prod
        self.dst = prod.c1 if which == 0 else prod.c2
        self.which = which
        self.name = f"pr{which + 1}"

    def obj(self, x):
        return x[self.which]

    def hom(self, x, y, vec):
        a, b = self.src._split(x, y, vec)
        return a if self.which == 0 else b


class ProductFunctor(Functor):
    """F×G between cartesian products."""

    def __init__(self, f: Functor, g: Functor, src: CartesianProduct | None = None,
                 dst: CartesianProduct | None = None):
        self.f, self.g = f, g
        self.src = src or CartesianProduct(f.src, g.src)
        self.dst = dst or CartesianProduct(f.dst, g.dst)
        self.name = f"{getattr(f, 'name', 'F')}×{getattr(g, 'name', 'G')}"

    def obj(self, x):
        return (self.f.obj(x[0]), self.g.obj(x[1]))

    def hom(self, x, y, vec):
        a, b = self.src._split(x, y, vec)
        return self.f.hom(x[0], y[0], a) + self.g.hom(x[1], y[1], b)


def block_diag(F: FieldSpec, mats: Sequence[Matrix]) -> Matrix:
    n = sum(m.rows for m in mats)
    k = sum(m.cols for m in mats)
    out = Matrix.zeros(F, n, k)
    r = c = 0
    for m in mats:
        for i in range(m.rows):
            out.data[r + i][c:c + m.cols] = m.data[i]
        r += m.rows
        c += m.cols
    return out


def transport(cat: DgCategory, changes: dict) -> DgCategory:
    """Rewrite structure constants in new bases.

    changes[(x, y)] = invertible matrix P whose columns express the new
    basis in the old one; it must preserve degrees.  Units are kept as
    basis elements by requiring P to fix them.
    """
    from .exactla import solve_matrix
    F = cat.field
    homs, Pinv = {}, {}
    for key, h in cat.homs.items():
        P = changes.get(key, Matrix.identity(F, len(h.names)))
        Q = solve_matrix(P, Matrix.identity(F, P.rows))
        if Q is None:
            raise ValueError(f"change of basis on {key} is not invertible")
        Pinv[key] = (P, Q)
        homs[key] = HomSpace(h.names, h.degrees, Q @ h.diff @ P)
    comp = {}
    for (x, y, z) in cat.comp:
        if (y, z) not in Pinv or (x, y) not in Pinv or (x, z) not in Pinv:
            continue
        Pg, _ = Pinv[(y, z)]
        Pf, _ = Pinv[(x, y)]
        _, Q = Pinv[(x, z)]
        tab = {}
        for i, g in enumerate(Pg.columns()):
            for j, f in enumerate(Pf.columns()):
                v = Q.apply(cat.compose(x, y, z, g, f))
                row = {k: c for k, c in enumerate(v) if c}
                if row:
                    tab[(i, j)] = row
        comp[(x, y, z)] = tab
    return DgCategory(F, cat.objects, homs, comp, cat.units, cat.name)


class PointFunctor(Functor):
    """The functor from the one-object category k sending e to `obj`."""

    def __init__(self, point: Category, target: Category, obj, name=None):
        self.src, self.dst = point, target
        self.target_obj = obj
        self.name = name or f"at {obj!r}"

    def obj(self, x):
        return self.target_obj

    def hom(self, x, y, vec):
        c = vec[0] if vec else self.dst.field.zero
        return vscale(c, self.dst.identity(self.target_obj))
