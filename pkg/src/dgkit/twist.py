"""Twisted complexes over a dg category.

A twisted complex is a formal sum of shifted objects a_i[d_i] with a
strictly upper triangular Maurer-Cartan matrix m.  Conventions used
throughout:

* mc[(i, j)] with i < j is an element of hom(a_i, a_j) of base degree
  1 + d_j - d_i.
* A morphism X -> Y has entries g[i, j] in hom(a_j, b_i) (row = target
  summand, column = source summand).  An entry of base degree p sits in
  Tw-degree p - e_i + d_j, where e_i, d_j are the target/source shifts.
* Composition is the plain matrix product of entries.
* The entrywise differential is (d_Tw g)[i, j] = (-1)^{e_i} d(g[i, j]),
  the unique sign choice making plain composition obey the Leibniz rule.
* The hom differential is  D g = d_Tw g + N g - (-1)^k g M  for g of
  Tw-degree k, where M, N are the source and target MC matrices.
  Maurer-Cartan means d_Tw m + m m = 0.
* shift(x, n) lowers every d_i by n and multiplies m by (-1)^n; then
  hom(shift(x, n), y) has the same differential as hom(x, y) with all
  degrees lowered by n.  In bracket notation shift(x, n) = x[-n].
* cone(f: X -> Y) = X ⊕ shift(Y, 1) with f in the off-diagonal block,
  i.e. a ⊕ b[-1] with m = (0 f; 0 0) for base objects.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Sequence

from .dgcore import (Category, Functor, ValidationReport, is_zero, unit_vec, vadd, vsub,
                     vec_degree, zero_vec)
from .exactla import Matrix, rank
from .dgcore import induced_postcomposition


class McViolation(ValueError):
    pass


class NotClosed(ValueError):
    pass


class WrongDegree(ValueError):
    pass


@dataclass(frozen=True)
class TwObject:
    summands: tuple                     # ((object, shift), ...)
    mc: tuple = ()                      # (((i, j), vector), ...) sorted, nonzero only
    base: Category | None = dc_field(default=None, compare=False, hash=False, repr=False)

    @classmethod
    def make(cls, base: Category, summands: Sequence, mc: dict | None = None) -> "TwObject":
        items = []
        for (i, j), v in sorted((mc or {}).items()):
            v = tuple(v)
            if not is_zero(v):
                items.append(((i, j), v))
        return cls(tuple((a, int(s)) for a, s in summands), tuple(items), base)

    @property
    def size(self) -> int:
        return len(self.summands)

    def mc_dict(self) -> dict:
        return dict(self.mc)

    def mc_entry(self, i, j) -> tuple:
        v = self.mc_dict().get((i, j))
        if v is None:
            a, b = self.summands[i][0], self.summands[j][0]
            return self.base.zero(a, b)
        return v

    def __repr__(self):
        parts = " ⊕ ".join(f"{a}[{s}]" for a, s in self.summands) or "0"
        return f"Tw({parts}{', m' if self.mc else ''})"


def embed(base: Category, a, shift: int = 0) -> TwObject:
    """The single-summand twisted complex a[shift]."""
    return TwObject.make(base, [(a, shift)])


def zero_object(base: Category) -> TwObject:
    return TwObject.make(base, [])


@dataclass(frozen=True)
class TwMorphism:
    src: TwObject
    dst: TwObject
    vec: tuple

    @property
    def degree(self):
        return tw_category(self.src.base).degree_of(self.src, self.dst, self.vec)


_TW_CACHE: dict = {}


def tw_category(base: Category) -> "TwCategory":
    key = id(base)
    hit = _TW_CACHE.get(key)
    if hit is None or hit.base is not base:
        hit = TwCategory(base)
        _TW_CACHE[key] = hit
    return hit


class TwCategory(Category):
    """The category of twisted complexes over `base`, computed on demand."""

    def __init__(self, base: Category, seeds: Sequence = ()):
        self.base = base
        self.field = base.field
        self.objects = list(seeds)
        self.name = f"Tw({getattr(base, 'name', 'base')})"
        self._layout = {}
        self._diff = {}

    # layout of hom(X, Y): blocks (i, j) -> (offset, n, base degrees)
    def layout(self, X: TwObject, Y: TwObject):
        key = (X, Y)
        lay = self._layout.get(key)
        if lay is None:
            blocks, degs, names = {}, [], []
            off = 0
            for i, (b, e) in enumerate(Y.summands):
                for j, (a, dd) in enumerate(X.summands):
                    bd = self.base.hom_degrees(a, b)
                    bn = self.base.hom_names(a, b)
                    if not bd:
                        continue
                    blocks[(i, j)] = (off, len(bd))
                    degs.extend(p - e + dd for p in bd)
                    names.extend(f"[{i},{j}]{nm}" for nm in bn)
                    off += len(bd)
            lay = (blocks, tuple(degs), tuple(names), off)
            self._layout[key] = lay
        return lay

    def hom_degrees(self, X, Y):
        return self.layout(X, Y)[1]

    def hom_names(self, X, Y):
        return self.layout(X, Y)[2]

    def entries(self, X, Y, vec) -> dict:
        """Nonzero blocks {(i, j): base vector} of a morphism X -> Y."""
        blocks = self.layout(X, Y)[0]
        out = {}
        for ij, (off, n) in blocks.items():
            v = tuple(vec[off:off + n])
            if not is_zero(v):
                out[ij] = v
        return out

    def assemble(self, X, Y, entries: dict) -> tuple:
        blocks, _, _, total = self.layout(X, Y)
        out = [self.field.zero] * total
        for ij, v in entries.items():
            if ij not in blocks:
                if is_zero(v):
                    continue
                raise ValueError(f"no hom space for block {ij}")
            off, n = blocks[ij]
            for t in range(n):
                if v[t]:
                    out[off + t] = out[off + t] + v[t]
        return tuple(out)

    def _mul(self, X, Y, Z, fe: dict, ge: dict) -> dict:
        """Entrywise product of blocks of f: Y -> Z and g: X -> Y."""
        base = self.base
        out = {}
        by_i = {}
        for (i, j), v in ge.items():
            by_i.setdefault(i, []).append((j, v))
        for (k, i), fv in fe.items():
            for j, gv in by_i.get(i, ()):
                a, b, c = X.summands[j][0], Y.summands[i][0], Z.summands[k][0]
                w = base.compose(a, b, c, fv, gv)
                if (k, j) in out:
                    out[(k, j)] = vadd(out[(k, j)], w)
                else:
                    out[(k, j)] = w
        return out

    def compose(self, X, Y, Z, g, f):
        return self.assemble(X, Z, self._mul(X, Y, Z, self.entries(Y, Z, g), self.entries(X, Y, f)))

    def identity(self, X):
        return self.assemble(X, X, {(i, i): self.base.identity(a)
                                    for i, (a, _) in enumerate(X.summands)})

    def mc_matrix(self, X) -> dict:
        """MC as morphism blocks {(target, source): vector}."""
        return {(j, i): v for (i, j), v in X.mc}

    def d_tw(self, X, Y, entries: dict) -> dict:
        out = {}
        for (i, j), v in entries.items():
            a, b = X.summands[j][0], Y.summands[i][0]
            w = self.base.d(a, b, v)
            if Y.summands[i][1] % 2:
                w = tuple(-c for c in w)
            if not is_zero(w):
                out[(i, j)] = w
        return out

    def hom_diff(self, X, Y):
        key = (X, Y)
        D = self._diff.get(key)
        if D is None:
            blocks, degs, _, total = self.layout(X, Y)
            M, N = self.mc_matrix(X), self.mc_matrix(Y)
            cols = []
            F = self.field
            for t in range(total):
                e = unit_vec(F, total, t)
                ent = self.entries(X, Y, e)
                out = self.assemble(X, Y, self.d_tw(X, Y, ent))
                if N:
                    out = vadd(out, self.assemble(X, Y, self._mul(X, Y, Y, N, ent)))
                if M:
                    fm = self.assemble(X, Y, self._mul(X, X, Y, ent, M))
                    out = vsub(out, fm) if degs[t] % 2 == 0 else vadd(out, fm)
                cols.append(out)
            D = Matrix.from_columns(F, cols, total) if total else Matrix.zeros(F, 0, 0)
            self._diff[key] = D
        return D

    def morphism(self, X, Y, entries: dict) -> tuple:
        return self.assemble(X, Y, {ij: tuple(self.field(c) for c in v) for ij, v in entries.items()})


# ------------------------------------------------------------------ checks

def mc_violations(x: TwObject) -> list[str]:
    base = x.base
    out = []
    n = x.size
    for (i, j), v in x.mc:
        if not (0 <= i < j < n):
            out.append(f"entry ({i},{j}) is not strictly upper triangular")
            continue
        a, da = x.summands[i]
        b, db = x.summands[j]
        if len(v) != base.dim(a, b):
            out.append(f"entry ({i},{j}) has wrong length")
            continue
        deg = vec_degree(base.hom_degrees(a, b), v)
        if deg is not None and deg != 1 + db - da:
            out.append(f"entry ({i},{j}) has base degree {deg}, expected {1 + db - da}")
    if out:
        return out
    tw = tw_category(base)
    M = tw.mc_matrix(x)
    lhs = tw.d_tw(x, x, M)
    sq = tw._mul(x, x, x, M, M)
    for ij in set(lhs) | set(sq):
        a = lhs.get(ij)
        b = sq.get(ij)
        s = b if a is None else (a if b is None else vadd(a, b))
        if not is_zero(s):
            out.append(f"dm + m² ≠ 0 at {ij}")
    return out


def mc_check(x: TwObject) -> bool:
    return not mc_violations(x)


def require_mc(*xs):
    for x in xs:
        bad = mc_violations(x)
        if bad:
            raise McViolation(f"{x!r}: {bad[0]}")


def tw_hom(x: TwObject, y: TwObject):
    """The hom complex as a FinComplex (d² = 0 is checked)."""
    require_mc(x, y)
    gh = tw_category(x.base).hom_complex(x, y)
    gh.complex.check()
    return gh.complex


def shift(x: TwObject, n: int) -> TwObject:
    """x[-n]: shifts lowered by n, MC scaled by (-1)^n."""
    s = -1 if n % 2 else 1
    F = x.base.field
    return TwObject.make(x.base, [(a, d - n) for a, d in x.summands],
                         {ij: tuple(F(s) * c for c in v) for ij, v in x.mc})


def bracket(x: TwObject, n: int) -> TwObject:
    """x[n] in the usual notation, i.e. shift(x, -n)."""
    return shift(x, -n)


def direct_sum(xs: Sequence[TwObject]) -> TwObject:
    base = xs[0].base
    summ, mc, off = [], {}, 0
    for x in xs:
        summ.extend(x.summands)
        for (i, j), v in x.mc:
            mc[(i + off, j + off)] = v
        off += x.size
    return TwObject.make(base, summ, mc)


def cone(f: TwMorphism) -> TwObject:
    """X ⊕ Y[-1] with f in the off-diagonal MC block."""
    X, Y = f.src, f.dst
    require_mc(X, Y)
    tw = tw_category(X.base)
    deg = tw.degree_of(X, Y, f.vec)
    if deg not in (0, None):
        raise WrongDegree(f"cone needs a degree-0 morphism, got degree {deg}")
    if not is_zero(tw.d(X, Y, f.vec)):
        raise NotClosed("cone needs a closed morphism")
    Ys = shift(Y, 1)
    n = X.size
    mc = dict(X.mc)
    for (i, j), v in Ys.mc:
        mc[(i + n, j + n)] = v
    for (i, j), v in tw.entries(X, Y, f.vec).items():
        mc[(j, i + n)] = v
    return TwObject.make(X.base, list(X.summands) + list(Ys.summands), mc)


def cone_maps(f: TwMorphism) -> dict:
    """Structure maps of the triangle cone(f) -> X -> Y -> cone(f)[1].

    Returns closed degree-0 morphisms 'p': cone -> X and
    'delta': Y -> shift(cone, -1), together with the objects.
    """
    X, Y = f.src, f.dst
    C = cone(f)
    C1 = shift(C, -1)
    tw = tw_category(X.base)
    n = X.size
    p = tw.assemble(C, X, {(i, i): X.base.identity(a) for i, (a, _) in enumerate(X.summands)})
    delta = tw.assemble(Y, C1, {(i + n, i): X.base.identity(b)
                                for i, (b, _) in enumerate(Y.summands)})
    return {"cone": C, "cone1": C1, "p": p, "delta": delta}


# ------------------------------------------------------------------ functors

def extend_object(fun: Functor, x: TwObject, target: Category | None = None) -> TwObject:
    dst = target or fun.dst
    summ = [(fun.obj(a), d) for a, d in x.summands]
    mc = {(i, j): fun.hom(x.summands[i][0], x.summands[j][0], v) for (i, j), v in x.mc}
    return TwObject.make(dst, summ, mc)


def extend_functor(fun: Functor, x: TwObject) -> TwObject:
    require_mc(x)
    out = extend_object(fun, x)
    require_mc(out)
    return out


class ExtendedFunctor(Functor):
    """F^Tw: Tw(src) -> Tw(dst), applying F to summands and entries."""

    def __init__(self, fun: Functor):
        self.fun = fun
        self.src = tw_category(fun.src)
        self.dst = tw_category(fun.dst)
        self.name = f"{getattr(fun, 'name', 'F')}^Tw"

    def obj(self, x):
        return extend_object(self.fun, x, self.fun.dst)

    def hom(self, x, y, vec):
        fx, fy = self.obj(x), self.obj(y)
        ent = self.src.entries(x, y, vec)
        out = {(i, j): self.fun.hom(x.summands[j][0], y.summands[i][0], v) for (i, j), v in ent.items()}
        return self.dst.assemble(fx, fy, out)


class EmbedFunctor(Functor):
    """C -> Tw C, a |-> a[0]."""

    def __init__(self, base: Category):
        self.src = base
        self.dst = tw_category(base)
        self.name = "embed"

    def obj(self, x):
        return embed(self.src, x)

    def hom(self, x, y, vec):
        return self.dst.assemble(self.obj(x), self.obj(y), {(0, 0): tuple(vec)} if vec else {})


class ShiftFunctor(Functor):
    """x |-> shift(x, n) on Tw C; a morphism of degree k picks up (-1)^{nk}."""

    def __init__(self, tw: TwCategory, n: int):
        self.src = self.dst = tw
        self.n = n
        self.name = f"shift{n}"

    def obj(self, x):
        return shift(x, self.n)

    def hom(self, x, y, vec):
        if self.n % 2 == 0:
            return tuple(vec)
        degs = self.src.hom_degrees(x, y)
        return tuple(-c if d % 2 else c for c, d in zip(vec, degs))


def as_tw_functor(fun: Functor) -> Functor:
    """View a functor into C as a functor into Tw C (composition with embed)."""
    from .dgcore import ComposedFunctor
    if isinstance(fun.dst, TwCategory):
        return fun
    return ComposedFunctor(EmbedFunctor(fun.dst), fun)


# ------------------------------------------------------------------ exactness

def postcomposition_rank(cat: Category, z, a, b, phi, degree: int) -> int:
    """Rank of H^degree hom(z,a) -> H^degree hom(z,b), v |-> phi∘v."""
    m = induced_postcomposition(cat, z, a, b, phi, degree)
    return rank(m) if m.rows and m.cols else 0


def triangle_exactness(f: TwMorphism, z: TwObject) -> list[str]:
    """Check exactness of the cohomology sequence of hom(z, -) on the triangle of f.

    Returns a list of failures (empty when exact in every degree).
    """
    X, Y = f.src, f.dst
    cm = cone_maps(f)
    C, C1 = cm["cone"], cm["cone1"]
    tw = tw_category(X.base)
    tabs = {k: tw.h_row(z, o) for k, o in (("C", C), ("X", X), ("Y", Y))}
    degs = set()
    for t in tabs.values():
        degs |= set(t)
    if not degs:
        return []
    lo, hi = min(degs) - 1, max(degs) + 1
    fails = []
    for i in range(lo, hi + 1):
        rp = postcomposition_rank(tw, z, C, X, cm["p"], i)
        rf = postcomposition_rank(tw, z, X, Y, f.vec, i)
        rd = postcomposition_rank(tw, z, Y, C1, cm["delta"], i)
        rp1 = postcomposition_rank(tw, z, C, X, cm["p"], i + 1)
        if rp + rf != tabs["X"].get(i, 0):
            fails.append(f"not exact at hom(z, X) in degree {i}")
        if rf + rd != tabs["Y"].get(i, 0):
            fails.append(f"not exact at hom(z, Y) in degree {i}")
        if rd + rp1 != tabs["C"].get(i + 1, 0):
            fails.append(f"not exact at hom(z, cone) in degree {i + 1}")
    return fails


def validate_tw_object(x: TwObject) -> ValidationReport:
    rep = ValidationReport(repr(x))
    for msg in mc_violations(x):
        rep.add("maurer-cartan", (), msg)
    if rep.ok:
        try:
            tw_hom(x, x)
        except ValueError as exc:
            rep.add("d-squared", (), str(exc))
    return rep
