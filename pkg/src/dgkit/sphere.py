"""Spherical functors from the point category, their twists and cotwists.

A functor k -> Tw C is determined by one twisted complex S.  For c in
Tw C let V = hom(S, c) with basis v_k of degree p_k.  Then

    V ⊗ S = ⊕_k shift(S, p_k),  ev = (v_k)_k : V ⊗ S -> c,

with (-1)^{p_k} m_S on the diagonal and c_{lk}·id from copy k to copy l
whenever d v_k = Σ c_{lk} v_l.  The twist is the mapping cone of ev,
T(c) = shift(cone(ev), -1), so that T(S) ≅ S[1-n] for n-spherical S.

Dually, with W = hom(c, S) and w_k of degree p_k,
W^∨ ⊗ S = ⊕_k shift(S, -p_k) ordered by decreasing degree, and the
inverse twist is T'(c) = cone(coev: c -> W^∨ ⊗ S).
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Sequence

from .dgcore import Category, ComposedFunctor, Functor, Matrix, PointFunctor, is_zero, split_by_degree
from .exactla import FinComplex, cohomology_table
from .glue import ConeFunctor, GluedCategory, GluedObject, GluingDatum
from .holim import IsoCertificate, Unknown, iso_check
from .twist import (ShiftFunctor, TwCategory, TwObject, direct_sum, mc_check, require_mc, shift,
                    tw_category, zero_object)


class ObjectFunctor(PointFunctor):
    """k -> Tw C sending e to the twisted complex S."""

    def __init__(self, point: Category, S: TwObject, name=None):
        require_mc(S)
        super().__init__(point, tw_category(S.base), S, name or f"at {S!r}")
        self.S = S
        self.base = S.base


def _ordered_basis(tw: TwCategory, X, Y, decreasing=False):
    """Hom basis indices sorted by degree (stable)."""
    degs = tw.hom_degrees(X, Y)
    idx = sorted(range(len(degs)), key=lambda i: (-degs[i] if decreasing else degs[i], i))
    return idx, degs


def _copies(S: TwObject, shifts: Sequence[int]) -> tuple:
    """Summand list and diagonal MC of ⊕ shift(S, s) over the given shifts."""
    return direct_sum([shift(S, s) for s in shifts]) if shifts else zero_object(S.base)


class _TensorData:
    """Cached V ⊗ S (or W^∨ ⊗ S) together with its structure map."""

    def __init__(self, obj, mor, order, degs):
        self.obj, self.mor, self.order, self.degs = obj, mor, order, degs


class TwistData:
    def __init__(self, F: ObjectFunctor):
        self.F = F
        self.S = F.S
        self.tw = tw_category(F.base)
        self._ev = {}
        self._coev = {}

    def _identity_blocks(self, src_copy, dst_copy):
        """Entries of the identity of S placed between two copies of S."""
        S = self.S
        n = S.size
        base = self.tw.base
        return {(dst_copy * n + i, src_copy * n + i): base.identity(a)
                for i, (a, _) in enumerate(S.summands)}

    def evaluation(self, c: TwObject) -> _TensorData:
        hit = self._ev.get(c)
        if hit is not None:
            return hit
        tw, S = self.tw, self.S
        order, degs = _ordered_basis(tw, S, c)
        pos = {b: k for k, b in enumerate(order)}
        shifts = [degs[b] for b in order]
        VS = _copies(S, shifts)
        D = tw.hom_diff(S, c)
        n = S.size
        mc = dict(VS.mc)
        for k, b in enumerate(order):
            col = D.column(b)
            for bl, coef in enumerate(col):
                if coef:
                    l = pos[bl]
                    for (tgt, src), v in self._identity_blocks(k, l).items():
                        key = (src, tgt)
                        w = tuple(coef * x for x in v)
                        mc[key] = tuple(p + q for p, q in zip(mc[key], w)) if key in mc else w
        VS = TwObject.make(S.base, VS.summands, mc)
        ent = {}
        F = tw.field
        for k, b in enumerate(order):
            e = [F.zero] * len(degs)
            e[b] = F.one
            for (i, j), v in tw.entries(S, c, tuple(e)).items():
                ent[(i, k * n + j)] = v
        ev = tw.assemble(VS, c, ent)
        out = _TensorData(VS, ev, order, degs)
        self._ev[c] = out
        return out

    def coevaluation(self, c: TwObject) -> _TensorData:
        hit = self._coev.get(c)
        if hit is not None:
            return hit
        tw, S = self.tw, self.S
        order, degs = _ordered_basis(tw, c, S, decreasing=True)
        pos = {b: k for k, b in enumerate(order)}
        shifts = [-degs[b] for b in order]
        WS = _copies(S, shifts)
        D = tw.hom_diff(c, S)
        n = S.size
        F = tw.field
        mc = dict(WS.mc)
        for k, b in enumerate(order):
            sign = -F.one if degs[b] % 2 == 0 else F.one
            col = D.column(b)
            for bl, coef in enumerate(col):
                if coef:
                    l = pos[bl]
                    # block from copy l to copy k
                    for (tgt, src), v in self._identity_blocks(l, k).items():
                        key = (src, tgt)
                        w = tuple(sign * coef * x for x in v)
                        mc[key] = tuple(p + q for p, q in zip(mc[key], w)) if key in mc else w
        WS = TwObject.make(S.base, WS.summands, mc)
        ent = {}
        for k, b in enumerate(order):
            e = [F.zero] * len(degs)
            e[b] = F.one
            for (i, j), v in tw.entries(c, S, tuple(e)).items():
                ent[(k * n + i, j)] = v
        coev = tw.assemble(c, WS, ent)
        out = _TensorData(WS, coev, order, degs)
        self._coev[c] = out
        return out


class _EvaluationFunctor(Functor):
    """c |-> (V⊗S, c, ev) into the glued category Tw C ×_{id,id} Tw C."""

    def __init__(self, data: TwistData, glued: GluedCategory):
        self.data = data
        self.src = data.tw
        self.dst = glued
        self.name = "ev"

    def obj(self, c):
        t = self.data.evaluation(c)
        return GluedObject(t.obj, c, t.mor)

    def hom(self, c, c2, vec):
        d = self.data
        tw = d.tw
        t1, t2 = d.evaluation(c), d.evaluation(c2)
        S = d.S
        n = S.size
        F = tw.field
        pos2 = {b: k for k, b in enumerate(t2.order)}
        ent = {}
        for k, b in enumerate(t1.order):
            e = [F.zero] * len(t1.degs)
            e[b] = F.one
            img = tw.compose(S, c, c2, vec, tuple(e))
            for bl, coef in enumerate(img):
                if coef:
                    l = pos2[bl]
                    for (tgt, src), v in d._identity_blocks(k, l).items():
                        w = tuple(coef * x for x in v)
                        ent[(tgt, src)] = tuple(p + q for p, q in zip(ent[(tgt, src)], w)) \
                            if (tgt, src) in ent else w
        r = tw.assemble(t1.obj, t2.obj, ent)
        x, y = self.obj(c), self.obj(c2)
        return r + tuple(vec) + (F.zero,) * self.dst.parts(x, y)[2]


class _CoevaluationFunctor(Functor):
    """c |-> (c, W^∨⊗S, coev)."""

    def __init__(self, data: TwistData, glued: GluedCategory):
        self.data = data
        self.src = data.tw
        self.dst = glued
        self.name = "coev"

    def obj(self, c):
        t = self.data.coevaluation(c)
        return GluedObject(c, t.obj, t.mor)

    def hom(self, c, c2, vec):
        d = self.data
        tw = d.tw
        t1, t2 = d.coevaluation(c), d.coevaluation(c2)
        S = d.S
        F = tw.field
        pos1 = {b: k for k, b in enumerate(t1.order)}
        ent = {}
        for l, b in enumerate(t2.order):
            e = [F.zero] * len(t2.degs)
            e[b] = F.one
            img = tw.compose(c, c2, S, tuple(e), vec)     # w'_l ∘ g in hom(c, S)
            for bk, coef in enumerate(img):
                if coef:
                    k = pos1[bk]
                    for (tgt, src), v in d._identity_blocks(k, l).items():
                        w = tuple(coef * x for x in v)
                        ent[(tgt, src)] = tuple(p + q for p, q in zip(ent[(tgt, src)], w)) \
                            if (tgt, src) in ent else w
        r = tw.assemble(t1.obj, t2.obj, ent)
        x, y = self.obj(c), self.obj(c2)
        return tuple(vec) + r + (F.zero,) * self.dst.parts(x, y)[2]


def _a2(tw: TwCategory) -> GluedCategory:
    from .dgcore import IdentityFunctor
    ident = IdentityFunctor(tw)
    return GluedCategory(GluingDatum(tw, tw, ident, ident), (), name="A2")


class TwistFunctor(ComposedFunctor):
    """T_S on Tw C: c |-> shift(cone(ev_c), -1)."""

    def __init__(self, F: ObjectFunctor):
        self.data = TwistData(F)
        A2 = _a2(self.data.tw)
        inner = ComposedFunctor(ConeFunctor(A2), _EvaluationFunctor(self.data, A2))
        super().__init__(ShiftFunctor(self.data.tw, -1), inner)
        self.name = f"T[{F.S!r}]"


class DualTwistFunctor(ComposedFunctor):
    """T'_S on Tw C: c |-> cone(coev_c), a quasi-inverse of T_S."""

    def __init__(self, F: ObjectFunctor):
        self.data = TwistData(F)
        A2 = _a2(self.data.tw)
        super().__init__(ConeFunctor(A2), _CoevaluationFunctor(self.data, A2))
        self.name = f"T'[{F.S!r}]"


def twist_eval(F: ObjectFunctor, c: TwObject) -> TwObject:
    require_mc(c)
    out = TwistFunctor(F).obj(c)
    require_mc(out)
    return out


def dual_twist_eval(F: ObjectFunctor, c: TwObject) -> TwObject:
    require_mc(c)
    return DualTwistFunctor(F).obj(c)


def cotwist_complex(F: ObjectFunctor) -> FinComplex:
    """cone(k -> End(S))[-1] as a complex.

    With cone(f: A -> B)^i = A^{i+1} ⊕ B^i and X[-1]^i = X^{i-1}, degree i
    of the result is k^i ⊕ End(S)^{i-1}; the unit sends k^0 into End^0.
    """
    tw = tw_category(F.base)
    S = F.S
    gh = tw.hom_complex(S, S)
    End = gh.complex
    Fd = tw.field
    unit = gh.restrict(tw.identity(S), 0)
    degs = sorted({0} | {d + 1 for d in End.dims})

    def k(i):
        return 1 if i == 0 else 0

    dims = {i: k(i) + End.dim(i - 1) for i in degs}
    diff = {}
    for i in degs:
        rows, cols = dims.get(i + 1, 0), dims[i]
        if not rows or not cols:
            continue
        m = Matrix.zeros(Fd, rows, cols)
        if k(i):
            for r, u in enumerate(unit):
                m.data[k(i + 1) + r][0] = u
        B = End.d(i - 1)
        for r in range(B.rows):
            for c in range(B.cols):
                m.data[k(i + 1) + r][k(i) + c] = -B.data[r][c]
        diff[i] = m
    out = FinComplex(Fd, {i: n for i, n in dims.items() if n}, diff)
    out.check()
    return out


def cotwist_table(F: ObjectFunctor) -> dict:
    return cohomology_table(cotwist_complex(F))


@dataclass
class SphericalReport:
    end_table: dict
    cy_degree: int | None
    twist_on_S: object
    preserves_tables: bool
    failures: list = dc_field(default_factory=list)

    @property
    def verdict(self) -> str:
        return "pass" if not self.failures else "fail"

    def lines(self):
        from .glue import fmt_table
        out = [f"End(S) table: {fmt_table(self.end_table)}",
               f"spherical degree: {self.cy_degree if self.cy_degree is not None else 'none'}",
               f"T(S) vs S[1-n]: {'certified' if isinstance(self.twist_on_S, IsoCertificate) else 'not certified'}",
               f"twist preserves H-tables on test set: {self.preserves_tables}",
               f"verdict: {self.verdict}"]
        out.extend(f"  reason: {r}" for r in self.failures)
        return out


def spherical_test(F: ObjectFunctor, test_objects: Sequence[TwObject] = ()) -> SphericalReport:
    tw = tw_category(F.base)
    S = F.S
    end = tw.h_row(S, S)
    n = None
    fails = []
    if len(end) == 2 and end.get(0) == 1:
        (k, v), = [(d, m) for d, m in end.items() if d != 0]
        if k >= 1 and v == 1:
            n = k
    if n is None:
        fails.append("End(S) is not k ⊕ k[-n] with n >= 1")
        return SphericalReport(end, None, Unknown("skipped"), False, fails)
    T = TwistFunctor(F)
    TS = T.obj(S)
    target = shift(S, n - 1)
    cert = iso_check(tw, TS, target)
    if not isinstance(cert, IsoCertificate):
        fails.append("T(S) is not certified isomorphic to S[1-n]")
    objs = list(test_objects) or [S]
    ok = True
    images = {x: T.obj(x) for x in objs}
    for x in objs:
        for y in objs:
            if tw.h_row(images[x], images[y]) != tw.h_row(x, y):
                ok = False
                fails.append(f"H-table of ({x!r}, {y!r}) changes under the twist")
    return SphericalReport(end, n, cert, ok, fails)


class PointTwFunctor(Functor):
    """Tw(k) -> Tw C induced by e |-> S: e[d] goes to S[d] and a scalar entry
    c·id_e to c times the identity of S between the corresponding copies."""

    def __init__(self, F: ObjectFunctor):
        self.F = F
        self.S = F.S
        self.src = tw_category(F.src)
        self.dst = tw_category(F.base)
        self.name = f"{F.name}^Tw"

    def obj(self, x: TwObject) -> TwObject:
        S = self.S
        n = S.size
        copies = direct_sum([shift(S, -d) for _, d in x.summands]) if x.summands else zero_object(S.base)
        mc = dict(copies.mc)
        base = self.dst.base
        for (i, j), v in x.mc:
            c = v[0]
            for t, (a, _) in enumerate(S.summands):
                mc[(i * n + t, j * n + t)] = tuple(c * w for w in base.identity(a))
        return TwObject.make(S.base, copies.summands, mc)

    def hom(self, x, y, vec):
        S = self.S
        n = S.size
        base = self.dst.base
        out = {}
        for (i, j), v in self.src.entries(x, y, vec).items():
            c = v[0]
            for t, (a, _) in enumerate(S.summands):
                out[(i * n + t, j * n + t)] = tuple(c * w for w in base.identity(a))
        return self.dst.assemble(self.obj(x), self.obj(y), out)
