"""Perverse schobers on ribbon-graph skeleta.

A skeleton is a ribbon graph whose vertices list their half-edges in
counterclockwise order.  An edge has two half-edges, or one when its far
end lies on the boundary of the surface.  Marked points are univalent
vertices carrying a functor k -> Tw C given by a twisted complex.

An interior vertex of valency n+1 carries A_n(C); `slots[v]` lists its
half-edges in the order that receives f_1, ..., f_{n+1}, and the functor
on half-edge h is φ_h·f_i with φ_h = transitions.get(h, id).

Monodromy along a cycle that traverses edges from half-edge h_out to
half-edge h_in applies φ_{h_out} and then φ_{h_in}⁻¹ at every step.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field, replace
from typing import Sequence

from .dgcore import (CartesianProduct, Category, ComposedFunctor, IdentityFunctor,
                     NaturalTransformation, ProductFunctor, ValidationReport,
                     validate_natural_transformation)
from .glue import GluedObject, OracleReport, iterated_glue
from .holim import (EqualizerObject, IsoCertificate, Unknown, build_a_n, certify_iso,
                    certify_structure_map, ho_fiber, iso_check)
from .noncomm import (Autoequivalence, PairFunctor, compose_word, identity_auto, twist_auto)
from .sphere import ObjectFunctor, PointTwFunctor, TwistFunctor, spherical_test
from .twist import TwObject, cone, embed, shift, tw_category, zero_object, TwMorphism


class BadCycle(ValueError):
    pass


class UnsupportedSkeleton(ValueError):
    pass


class UnsupportedGeneralFunctor(ValueError):
    pass


class BadIndex(ValueError):
    pass


TRIVIAL_CERTIFIED = "TRIVIAL-CERTIFIED"
CONSISTENT = "CONSISTENT"
NONTRIVIAL = "NONTRIVIAL"
UNDETERMINED = "UNDETERMINED"
_RANK = {TRIVIAL_CERTIFIED: 0, CONSISTENT: 1, UNDETERMINED: 2, NONTRIVIAL: 3}


# ------------------------------------------------------------ graphs

@dataclass(frozen=True)
class Cycle:
    """A closed walk given by traversals (h_out, h_in) of edges."""

    steps: tuple

    def __add__(self, other: "Cycle") -> "Cycle":
        return Cycle(self.steps + other.steps)

    def reverse(self) -> "Cycle":
        return Cycle(tuple((b, a) for a, b in reversed(self.steps)))

    def __repr__(self):
        return "Cycle(" + " ".join(f"{a}>{b}" for a, b in self.steps) + ")"


@dataclass
class RibbonGraph:
    vertices: dict                  # vertex -> tuple of half-edges, counterclockwise
    edges: dict                     # edge -> (h1, h2) or (h1,) for a boundary attachment
    marked: tuple = ()
    cycles: dict = dc_field(default_factory=dict)     # name -> Cycle (in K°)
    boundary: tuple = ()            # names of cycles, one per boundary component

    def half_edges(self):
        return [h for hs in self.vertices.values() for h in hs]

    def vertex_of(self, h):
        for v, hs in self.vertices.items():
            if h in hs:
                return v
        raise KeyError(h)

    def edge_of(self, h):
        for e, hs in self.edges.items():
            if h in hs:
                return e
        raise KeyError(h)

    def other(self, h):
        e = self.edge_of(h)
        hs = self.edges[e]
        if len(hs) == 1:
            return None
        return hs[1] if hs[0] == h else hs[0]

    def valency(self, v):
        return len(self.vertices[v])

    def cycle(self, path: Sequence) -> Cycle:
        """From [v1, e1, v2, ..., v1]; a loop edge written "-e" is traversed backwards."""
        if len(path) < 3 or len(path) % 2 == 0 or path[0] != path[-1]:
            raise BadCycle("a cycle alternates vertices and edges and is closed")
        steps = []
        for k in range(0, len(path) - 2, 2):
            v, e, w = path[k], path[k + 1], path[k + 2]
            back = e.startswith("-")
            e = e[1:] if back else e
            if e not in self.edges:
                raise BadCycle(f"unknown edge {e}")
            hs = self.edges[e]
            if len(hs) != 2:
                raise BadCycle(f"edge {e} ends on the boundary")
            cand = [(a, b) for a, b in (hs, hs[::-1])
                    if self.vertex_of(a) == v and self.vertex_of(b) == w]
            if not cand:
                raise BadCycle(f"edge {e} does not join {v} and {w}")
            steps.append(cand[-1] if back else cand[0])
        return Cycle(tuple(steps))

    def check_cycle(self, c: Cycle):
        if not c.steps:
            raise BadCycle("empty cycle")
        halves = set(self.half_edges())
        for a, b in c.steps:
            if a not in halves or b not in halves or self.other(a) != b:
                raise BadCycle(f"{a} > {b} is not an edge traversal")
        for (_, b), (a, _) in zip(c.steps, c.steps[1:] + c.steps[:1]):
            if self.vertex_of(b) != self.vertex_of(a):
                raise BadCycle("consecutive steps do not meet")


def graph_report(g: RibbonGraph, rep: ValidationReport | None = None) -> ValidationReport:
    rep = rep or ValidationReport("ribbon graph")
    seen = {}
    for v, hs in g.vertices.items():
        for h in hs:
            if h in seen:
                rep.add("(1) half-edge appears once", (h,), f"at {seen[h]} and {v}")
            seen[h] = v
        n = len(hs)
        if n == 2:
            rep.add("(1) no bivalent vertices", (v,))
        if n == 0:
            rep.add("(1) no isolated vertices", (v,))
        if n == 1 and v not in g.marked:
            rep.add("(1) univalent vertices are marked", (v,))
    for p in g.marked:
        if p not in g.vertices or len(g.vertices[p]) != 1:
            rep.add("(1) marked points are univalent", (p,))
    owners = {}
    for e, hs in g.edges.items():
        if len(hs) not in (1, 2):
            rep.add("(1) edge shape", (e,))
        for h in hs:
            if h not in seen:
                rep.add("(1) edge half-edges exist", (e, h))
            if h in owners:
                rep.add("(1) half-edge on one edge", (h,), f"{owners[h]} and {e}")
            owners[h] = e
    for h in seen:
        if h not in owners:
            rep.add("(1) half-edge belongs to an edge", (h,))
    return rep


# ------------------------------------------------------------ schober data

@dataclass(frozen=True)
class Flagged:
    """A marked functor accepted without a spherical test."""
    functor: ObjectFunctor


@dataclass
class SchoberDatum:
    graph: RibbonGraph
    fiber: Category
    marked_functors: dict = dc_field(default_factory=dict)    # p -> ObjectFunctor | Flagged
    transitions: dict = dc_field(default_factory=dict)        # half-edge -> Autoequivalence
    slots: dict = dc_field(default_factory=dict)              # vertex -> half-edges in f-order
    relations: tuple = ()                                     # words [(cycle, ±1)] expected trivial
    test_objects: tuple = ()
    name: str = "schober"
    circled: dict = dc_field(default_factory=dict)            # p -> functor removed by k_circle

    @property
    def tw(self):
        return tw_category(self.fiber)

    def functor_of(self, p) -> ObjectFunctor:
        f = self.marked_functors[p]
        return f.functor if isinstance(f, Flagged) else f

    def phi(self, h) -> Autoequivalence:
        return self.transitions.get(h) or identity_auto(self.fiber)

    def slot_order(self, v) -> tuple:
        return tuple(self.slots.get(v, self.graph.vertices[v]))

    def slot_index(self, h) -> int:
        """i with F_{v,h} = φ_h·f_i."""
        v = self.graph.vertex_of(h)
        return self.slot_order(v).index(h) + 1

    def tests(self) -> list:
        if self.test_objects:
            return list(self.test_objects)
        out = [embed(self.fiber, a) for a in self.fiber.seed_objects()]
        for p in sorted(self.marked_functors):
            S = self.functor_of(p).S
            if S not in out:
                out.append(S)
        for F in self.circled.values():
            if F.S not in out:
                out.append(F.S)
        return out


def interior_vertices(s: SchoberDatum):
    return [v for v, hs in s.graph.vertices.items() if v not in s.graph.marked and len(hs) >= 3]


def validate_schober(s: SchoberDatum, certify: bool = True) -> ValidationReport:
    g = s.graph
    rep = graph_report(g, ValidationReport(s.name))
    if not rep.ok:
        return rep
    for p in g.marked:
        F = s.marked_functors.get(p)
        if F is None:
            rep.add("(2) marked point carries a functor", (p,))
            continue
        if isinstance(F, Flagged):
            continue
        if F.base is not s.fiber:
            rep.add("(2) marked functor lands in the fiber", (p,))
            continue
        r = spherical_test(F)
        if r.verdict != "pass":
            rep.add("(2) spherical test", (p,), "; ".join(r.failures))
    for p in s.marked_functors:
        if p not in g.marked:
            rep.add("(2) functor at an unmarked vertex", (p,))
    for v in interior_vertices(s):
        order = s.slot_order(v)
        if sorted(order) != sorted(g.vertices[v]):
            rep.add("(3) slots are the half-edges of the vertex", (v,))
    halves = set(g.half_edges())
    tests = s.tests()
    for h, a in s.transitions.items():
        if h not in halves:
            rep.add("(3) transition on an existing half-edge", (h,))
            continue
        if g.vertex_of(h) in g.marked:
            rep.add("(3) transitions live at interior vertices", (h,))
        if a.base is not s.fiber:
            rep.add("(3) transition acts on the fiber", (h,))
            continue
        if certify:
            try:
                a.certify(tests)
            except ValueError as exc:
                rep.add("(3) transition is invertible", (h,), str(exc))
    if not g.marked:
        for nm, c in g.cycles.items():
            try:
                g.check_cycle(c)
            except BadCycle as exc:
                rep.add("(3) stored cycle is valid", (nm,), str(exc))
        for nm in g.boundary:
            if nm not in g.cycles:
                rep.add("(3) boundary cycle is stored", (nm,))
        for k, word in enumerate(s.relations):
            c = Cycle(())
            for nm, e in word:
                c = c + (g.cycles[nm] if e > 0 else g.cycles[nm].reverse())
            if monodromy(s, c, tests).verdict == NONTRIVIAL:
                rep.add("(3) monodromy respects stored relations", (k,))
    return rep


def flagged_notes(s: SchoberDatum) -> list:
    return [f"{p}: UNVERIFIED (assume-spherical)" for p, F in sorted(s.marked_functors.items())
            if isinstance(F, Flagged)]


# ------------------------------------------------------------ K°

def k_circle(s: SchoberDatum) -> SchoberDatum:
    """Replace each marked point p by a trivalent vertex with a loop l_p.

    Slots at p are (l_p.1, l_p.2, old half-edge) so that the loop carries
    T_{F_p}·f_1 and f_2 and the old edge carries f_3.
    """
    g = s.graph
    if not g.marked:
        return s
    vertices = dict(g.vertices)
    edges = dict(g.edges)
    slots = dict(s.slots)
    trans = dict(s.transitions)
    circled = dict(s.circled)
    for p in g.marked:
        F = s.marked_functors.get(p)
        if F is None or isinstance(F, Flagged) and not isinstance(F.functor, ObjectFunctor):
            raise UnsupportedGeneralFunctor(f"marked point {p} has no object-based functor")
        F = F.functor if isinstance(F, Flagged) else F
        (h,) = g.vertices[p]
        a, b = f"l_{p}.1", f"l_{p}.2"
        vertices[p] = (a, b, h)
        edges[f"l_{p}"] = (a, b)
        slots[p] = (a, b, h)
        trans[a] = twist_auto(F)
        circled[p] = F
    cycles = dict(g.cycles)
    for p in g.marked:
        cycles.setdefault(f"loop:{p}", Cycle(((f"l_{p}.1", f"l_{p}.2"),)))
    graph = RibbonGraph(vertices, edges, (), cycles, g.boundary)
    return SchoberDatum(graph, s.fiber, {}, trans, slots, s.relations, s.test_objects,
                        s.name + "°", circled)


# ------------------------------------------------------------ monodromy

@dataclass
class MonodromyReport:
    cycle: Cycle
    word: list                      # [(half-edge, ±1)] in application order
    functor: Autoequivalence
    rows: list                      # (test object, iso verdict, table ok, obstruction)
    transformation_ok: bool | None
    verdict: str
    notes: list = dc_field(default_factory=list)

    def describe(self) -> str:
        parts = [f"{'' if e > 0 else 'inv '}φ[{h}]" for h, e in self.word]
        return " then ".join(parts) if parts else "id"

    def lines(self):
        out = [f"cycle {self.cycle!r}: {self.verdict}", f"  word: {self.describe()}"]
        for x, iso, tab, obs in self.rows:
            out.append(f"  {x!r}: iso={iso} tables={'ok' if tab else 'changed'}"
                       + (" obstruction" if obs else ""))
        out.extend(f"  note: {n}" for n in self.notes)
        return out


def monodromy_word(s: SchoberDatum, c: Cycle) -> list:
    s.graph.check_cycle(c)
    word = []
    for a, b in c.steps:
        word.append((a, 1))
        word.append((b, -1))
    return word


def monodromy_functor(s: SchoberDatum, c: Cycle) -> Autoequivalence:
    word = monodromy_word(s, c)
    return compose_word(s.fiber, [(s.phi(h), e) for h, e in word if h in s.transitions])


def monodromy(s: SchoberDatum, c: Cycle, test_objects: Sequence | None = None,
              transformation: dict | None = None) -> MonodromyReport:
    """Compose the transitions along c and grade how close the result is to the identity."""
    word = monodromy_word(s, c)
    mon = compose_word(s.fiber, [(s.phi(h), e) for h, e in word if h in s.transitions])
    tw = s.tw
    tests = list(test_objects) if test_objects is not None else s.tests()
    rows, notes = [], []
    obstruction = False
    all_iso = True
    images = {x: mon.obj(x) for x in tests}
    for x in tests:
        mx = images[x]
        obs = tw.h_row(x, mx) != tw.h_row(x, x)
        tab = all(tw.h_row(mx, images[y]) == tw.h_row(x, y) for y in tests)
        if obs or not tab:
            iso = "no"
        else:
            iso = "certified" if isinstance(iso_check(tw, mx, x), IsoCertificate) else "unknown"
        obstruction |= obs or not tab
        all_iso &= iso == "certified"
        rows.append((x, iso, tab, obs))
    tr_ok = None
    if transformation is None and not obstruction and mon.identity_on(tests):
        transformation = {x: tw.identity(x) for x in tests}
        notes.append("identity transformation (monodromy is the identity on data)")
    if transformation is not None and not obstruction:
        eta = NaturalTransformation(mon.phi, IdentityFunctor(tw), transformation)
        ok = validate_natural_transformation(eta, tests).ok
        for x in tests:
            if ok and certify_iso(tw, images[x], x, transformation[x]) is None:
                ok = False
        tr_ok = ok
    if obstruction:
        verdict = NONTRIVIAL
    elif tr_ok:
        verdict = TRIVIAL_CERTIFIED
    elif all_iso:
        verdict = CONSISTENT
    else:
        verdict = UNDETERMINED
    return MonodromyReport(c, word, mon, rows, tr_ok, verdict, notes)


def same_functor_data(f: Autoequivalence, g: Autoequivalence, tests: Sequence) -> bool:
    """Exact equality of object images and of the action on every basis morphism."""
    tw = f.tw
    for x in tests:
        if f.obj(x) != g.obj(x):
            return False
    for x in tests:
        for y in tests:
            for v in tw.basis(x, y):
                if tuple(f.hom(x, y, v)) != tuple(g.hom(x, y, v)):
                    return False
    return True


@dataclass
class BoundaryReport:
    rows: list          # (name, MonodromyReport)
    notes: list

    @property
    def verdict(self) -> str:
        if not self.rows:
            return TRIVIAL_CERTIFIED
        return max((r.verdict for _, r in self.rows), key=_RANK.__getitem__)

    def verdicts(self) -> dict:
        return {n: r.verdict for n, r in self.rows}

    def lines(self):
        out = [f"boundary triviality: {self.verdict}"]
        for n, r in self.rows:
            out.append(f"  {n}: {r.verdict} ({r.describe()})")
        out.extend(f"  note: {n}" for n in self.notes)
        return out


def boundary_triviality(s: SchoberDatum, test_objects: Sequence | None = None) -> BoundaryReport:
    t = k_circle(s)
    rows = [(nm, monodromy(t, t.graph.cycles[nm], test_objects)) for nm in t.graph.boundary]
    return BoundaryReport(rows, flagged_notes(s))


# ------------------------------------------------------------ global sections

def disc_data(s: SchoberDatum):
    """(central vertex, marked points in counterclockwise slot order, boundary half-edge)."""
    g = s.graph
    inner = interior_vertices(s)
    if not inner and len(g.marked) == 1 and not s.circled:
        p = g.marked[0]
        if g.other(g.vertices[p][0]) is None:
            return None, [p], g.vertices[p][0]
    if len(inner) != 1 or s.circled:
        raise UnsupportedSkeleton("global sections need a disc skeleton with one central vertex")
    c = inner[0]
    order = s.slot_order(c)
    pts = []
    for h in order[:-1]:
        o = g.other(h)
        if o is None or g.vertex_of(o) not in g.marked:
            raise UnsupportedSkeleton("the first n slots must lead to marked points")
        pts.append(g.vertex_of(o))
    last = order[-1]
    if g.other(last) is not None:
        raise UnsupportedSkeleton("the last slot must be the boundary edge")
    if len(pts) != len(g.marked):
        raise UnsupportedSkeleton("every marked point must hang off the central vertex")
    return c, pts, last


def section_pieces(s: SchoberDatum):
    c, pts, last = disc_data(s)
    order = s.slot_order(c) if c is not None else (last,)
    out = []
    for h, p in zip(order, pts):
        F = s.functor_of(p)
        fun = PointTwFunctor(F)
        phi = s.phi(h)
        if phi.desc != ("id",):
            fun = ComposedFunctor(phi.phi, fun)
        out.append((fun.src, fun))
    return out


def point_generators(s: SchoberDatum, k: int):
    """P1 = e in the first piece, P_j = e[1] in the j-th piece."""
    from .glue import directed_generators
    c, pts, _ = disc_data(s)
    F = s.functor_of(pts[0])
    return directed_generators(F.src, k)


def global_sections(s: SchoberDatum, seeds: Sequence | None = None):
    """Iterated gluing of (Tw k, F_p) in counterclockwise order; returns (category, s_∞)."""
    pieces = section_pieces(s)
    k = len(pieces)
    if seeds is None:
        seeds = point_generators(s, k) if k > 1 else []
    return iterated_glue(pieces, seeds, name="Γ")


def _pieces_of(x, k):
    """Split a generator of the k-fold glue into (x_1, ..., x_k) and structure maps."""
    if k == 1:
        return [x], []
    if k == 2:
        return [x.a, x.b], [x.mu]
    inner, mus = _pieces_of(x.a, k - 1) if x.a is not None else ([None] * (k - 1), [()] * (k - 2))
    return inner + [x.b], mus + [x.mu]


class DiscFiber:
    """The literal homotopy fiber product A_k(C) ×^h_{C^k} ∏ Tw(k) for k in {2, 3}."""

    def __init__(self, s: SchoberDatum):
        pieces = section_pieces(s)
        self.k = k = len(pieces)
        if k not in (2, 3):
            raise UnsupportedSkeleton("the fiber-product route is built for k in {2, 3}")
        self.s = s
        self.pieces = pieces
        self.tower = build_a_n(s.fiber, k)
        tw = self.tower.tw
        self.tw = tw
        fs = self.tower.functors
        if k == 2:
            P = CartesianProduct(tw, tw)
            self.left = PairFunctor(fs[0], fs[1], P)
            self.right = ProductFunctor(pieces[0][1], pieces[1][1], dst=P)
        else:
            P12 = CartesianProduct(tw, tw)
            P = CartesianProduct(P12, tw)
            self.left = PairFunctor(PairFunctor(fs[0], fs[1], P12), fs[2], P)
            inner = ProductFunctor(pieces[0][1], pieces[1][1], dst=P12)
            self.right = ProductFunctor(inner, pieces[2][1], dst=P)
        self.P = P
        self.category = ho_fiber(self.left, self.right, [], name=f"A{k} fiber")
        self.boundary = fs[k]

    def _ptuple(self, xs):
        zs = [x if x is not None else zero_object(pc[0].base) for x, pc in zip(xs, self.pieces)]
        return (zs[0], zs[1]) if self.k == 2 else ((zs[0], zs[1]), zs[2])

    def lift(self, x) -> EqualizerObject:
        """Q(x): the fiber-product object matching a glued object x."""
        xs, mus = _pieces_of(x, self.k)
        tw = self.tw
        F = [pc[1] for pc in self.pieces]
        imgs = [F[i].obj(xs[i]) if xs[i] is not None else zero_object(self.s.fiber) for i in range(self.k)]
        xg = GluedObject(imgs[0], imgs[1], tuple(mus[0]) if mus[0] else tw.zero(imgs[0], imgs[1]))
        if self.k == 2:
            a = xg
        else:
            cg = cone(TwMorphism(imgs[0], imgs[1], xg.mu))
            xh = GluedObject(cg, imgs[2], tuple(mus[1]) if mus[1] else tw.zero(cg, imgs[2]))
            a = EqualizerObject((xg, xh), tuple(tw.identity(cg)),
                                certify_structure_map(tw, cg, cg, tw.identity(cg)))
        b = self._ptuple(xs)
        s_, t_ = self.left.obj(a), self.right.obj(b)
        mu = self.P.identity(s_)
        if s_ != t_:
            raise UnsupportedSkeleton("generator images do not agree as data")
        from .holim import fiber_object
        y = fiber_object(self.left, self.right, a, b, mu)
        if y not in self.category.objects:
            self.category.objects.append(y)
        return y

    def s_infinity(self, y: EqualizerObject) -> TwObject:
        return self.boundary.obj(y.a[0])


def glsect_oracle(s: SchoberDatum, gens: Sequence | None = None) -> OracleReport:
    """Iterated glue vs the literal fiber product on corresponding generators,
    and s_∞∘Q vs the cone functor objectwise."""
    G, c_fun = global_sections(s, gens)
    k = len(section_pieces(s))
    gens = list(G.objects) if gens is None else list(gens)
    if k == 1:
        # no gluing: Γ is the single piece and s_∞ is its functor
        rows = []
        F = s.functor_of(disc_data(s)[1][0])
        gens = gens or [embed(F.src, o) for o in F.src.seed_objects()]
        for i, x in enumerate(gens):
            u, v = c_fun.obj(x), PointTwFunctor(F).obj(x)
            rows.append((f"s_inf(P{i + 1})", s.tw.h_row(u, u), s.tw.h_row(v, v),
                         isinstance(iso_check(s.tw, u, v), IsoCertificate)))
        return OracleReport("global sections k=1", rows, [])
    D = DiscFiber(s)
    lifts = [D.lift(x) for x in gens]
    rows = []
    for i, x in enumerate(gens):
        for j, y in enumerate(gens):
            a, b = G.h_row(x, y), D.category.h_row(lifts[i], lifts[j])
            rows.append((f"(P{i + 1},P{j + 1})", a, b, a == b))
    tw = D.tw
    for i, x in enumerate(gens):
        u, v = D.s_infinity(lifts[i]), c_fun.obj(x)
        cert = iso_check(tw, u, v)
        ok = isinstance(cert, IsoCertificate)
        rows.append((f"s_inf(Q P{i + 1}) vs c(P{i + 1})", tw.h_row(u, u), tw.h_row(v, v), ok))
    return OracleReport(f"global sections k={k}", rows, [])


# ------------------------------------------------------------ braid moves

def marked_order(s: SchoberDatum) -> list:
    return disc_data(s)[1]


def braid_mutate(s: SchoberDatum, i: int, reduce: bool = True) -> SchoberDatum:
    """σ_i (1-based): F_i' = F_{i+1}, F_{i+1}' = T_{F_i}∘F_i, i.e. the object T_{S_i}(S_i).

    With `reduce`, the twisted complex T_{S_i}(S_i) is replaced by a shift of
    S_i whenever an H⁰-isomorphism to it is certified.
    """
    pts = marked_order(s)
    if not 1 <= i < len(pts):
        raise BadIndex(f"mutation index {i} out of range 1..{len(pts) - 1}")
    p, q = pts[i - 1], pts[i]
    Fp = s.functor_of(p)
    if not isinstance(Fp, ObjectFunctor):
        raise UnsupportedGeneralFunctor("mutation needs object-based functors")
    new_obj = TwistFunctor(Fp).obj(Fp.S)
    if reduce:
        new_obj = smaller_model(s.tw, new_obj, Fp.S)
    marked = dict(s.marked_functors)
    marked[p] = s.marked_functors[q]
    marked[q] = ObjectFunctor(Fp.src, new_obj)
    return replace(s, marked_functors=marked, name=f"{s.name}.s{i}")


def smaller_model(tw, x: TwObject, S: TwObject, bound: int = 8) -> TwObject:
    """A shift of S certified isomorphic to x, or x itself."""
    tx = tw.h_row(x, x)
    if tx != tw.h_row(S, S):
        return x
    for m in sorted(range(-bound, bound + 1), key=abs):
        y = shift(S, m)
        if tw.h_row(x, y) == tx and isinstance(iso_check(tw, x, y), IsoCertificate):
            return y
    return x


def mutation_readings_differ(s: SchoberDatum, i: int) -> bool:
    """Whether T_{S_i}(S_i) and T_{S_i}(S_{i+1}) give non-isomorphic objects."""
    pts = marked_order(s)
    if not 1 <= i < len(pts):
        raise BadIndex(f"mutation index {i} out of range 1..{len(pts) - 1}")
    Fp, Fq = s.functor_of(pts[i - 1]), s.functor_of(pts[i])
    T = TwistFunctor(Fp)
    a, b = T.obj(Fp.S), T.obj(Fq.S)
    return not isinstance(iso_check(s.tw, a, b), IsoCertificate)


def section_tables(s: SchoberDatum) -> list:
    """H-table matrix of the generators of global sections, row-major."""
    G, _ = global_sections(s)
    gens = G.objects if len(section_pieces(s)) > 1 else []
    if not gens:
        F = s.functor_of(marked_order(s)[0])
        e = embed(F.src, "e")
        return [[G.h_row(e, e)]]
    return [[G.h_row(x, y) for y in gens] for x in gens]


def _regrade(t: dict, k: int) -> dict:
    return {d + k: n for d, n in t.items()}


def match_up_to_regrading(a: list, b: list, bound: int = 6):
    """Shifts s with b[i][j] = a[i][j] shifted by s_j - s_i, or None."""
    n = len(a)
    if len(b) != n:
        return None
    for s in itertools.product(range(-bound, bound + 1), repeat=n - 1):
        s = (0,) + s
        if all(_regrade(a[i][j], s[j] - s[i]) == b[i][j] for i in range(n) for j in range(n)):
            return s
    return None


def mutation_report(s: SchoberDatum, word: Sequence[int], other: Sequence[int] | None = None
                    ) -> OracleReport:
    """Compare generator tables of s after the braid word (and optionally a second
    word) up to regrading each generator separately."""
    t0 = section_tables(s)
    s1 = s
    notes = []
    for i in word:
        if mutation_readings_differ(s1, i):
            notes.append(f"σ{i}: T(S_i) and T(S_{{i+1}}) readings differ on this fixture")
        s1 = braid_mutate(s1, i)
    t1 = section_tables(s1)
    rows = []
    if other is None:
        base, lab = t0, "original"
    else:
        s2 = s
        for i in other:
            s2 = braid_mutate(s2, i)
        base, lab = section_tables(s2), "σ" + "".join(map(str, other))
    sh = match_up_to_regrading(base, t1)
    n = len(base)
    for i in range(n):
        for j in range(n):
            k = 0 if sh is None else sh[j] - sh[i]
            rows.append((f"(P{i + 1},P{j + 1}) {lab} vs σ{''.join(map(str, word))}",
                         _regrade(base[i][j], k), t1[i][j], sh is not None))
    if sh is not None and any(sh):
        notes.append(f"generator regrading {list(sh)}")
    return OracleReport("braid mutation tables", rows, notes)


# ------------------------------------------------------------ templates

def skeleton_K_k(c: Category, functors: Sequence[ObjectFunctor], name=None) -> SchoberDatum:
    """Disc with k marked points p1..pk on a central vertex and one boundary edge.
    For k = 1 the marked point is joined to the boundary directly."""
    k = len(functors)
    if k < 1:
        raise UnsupportedSkeleton("a disc skeleton needs at least one marked point")
    if k == 1:
        g = RibbonGraph({"p1": ("q1.p",)}, {"q1": ("q1.p",)}, ("p1",),
                        {"C1": Cycle((("l_p1.1", "l_p1.2"),))}, ("C1",))
        return SchoberDatum(g, functors[0].base, {"p1": functors[0]}, {}, {}, (), (), name or "K1")
    vertices = {"c": tuple(f"q{i}.c" for i in range(1, k + 1)) + ("qinf.c",)}
    edges = {"qinf": ("qinf.c",)}
    marked = []
    for i in range(1, k + 1):
        vertices[f"p{i}"] = (f"q{i}.p",)
        edges[f"q{i}"] = (f"q{i}.c", f"q{i}.p")
        marked.append(f"p{i}")
    cycles = {}
    for i in range(1, k + 1):
        cycles[f"C{i}"] = Cycle(((f"q{i}.c", f"q{i}.p"), (f"l_p{i}.1", f"l_p{i}.2"),
                                 (f"q{i}.p", f"q{i}.c")))
    cinf = Cycle(())
    for i in range(1, k + 1):
        cinf = cinf + cycles[f"C{i}"]
    cycles["Cinf"] = cinf
    boundary = tuple(f"C{i}" for i in range(1, k + 1)) + ("Cinf",)
    g = RibbonGraph(vertices, edges, tuple(marked), cycles, boundary)
    mf = {f"p{i}": F for i, F in enumerate(functors, start=1)}
    return SchoberDatum(g, functors[0].base, mf, {}, {"c": vertices["c"]}, (), (),
                        name or f"K{k}")


def skeleton_K_p(c: Category, phi: Autoequivalence, name=None) -> SchoberDatum:
    """One trivalent vertex v with loop e_c (f1, Φ·f2) and boundary edge e_o (f3)."""
    vertices = {"v": ("ec.1", "ec.2", "eo.v")}
    edges = {"ec": ("ec.1", "ec.2"), "eo": ("eo.v",)}
    cycles = {"meridian": Cycle((("ec.1", "ec.2"),)),
              "meridian-rev": Cycle((("ec.2", "ec.1"),))}
    g = RibbonGraph(vertices, edges, (), cycles, ("meridian", "meridian-rev"))
    trans = {} if phi.desc == ("id",) else {"ec.2": phi}
    return SchoberDatum(g, c, {}, trans, {"v": vertices["v"]}, (), (), name or "K_p")


def skeleton_K_phi(c: Category, phi: Autoequivalence, name=None) -> SchoberDatum:
    """Vertices v1, v2 joined by h1 (f1 at both ends) and h2 (Φ·f2 at v1, f2 at v2);
    g1, g2 carry f3 out to the two boundary circles."""
    vertices = {"v1": ("h1.1", "h2.1", "g1.1"), "v2": ("h1.2", "h2.2", "g2.2")}
    edges = {"h1": ("h1.1", "h1.2"), "h2": ("h2.1", "h2.2"), "g1": ("g1.1",), "g2": ("g2.2",)}
    mer = Cycle((("h1.1", "h1.2"), ("h2.2", "h2.1")))
    cycles = {"meridian": mer, "meridian-rev": mer.reverse()}
    g = RibbonGraph(vertices, edges, (), cycles, ("meridian", "meridian-rev"))
    trans = {} if phi.desc == ("id",) else {"h2.1": phi}
    return SchoberDatum(g, c, {}, trans, dict(vertices), (), (), name or "K_phi")


def skeleton_chain(n: int, c: Category, phis: Sequence[Autoequivalence],
                   ends: tuple | None = None, name=None) -> SchoberDatum:
    """n-1 copies of K_phi glued along their outer edges g_1..g_n.

    Link j has vertices v1j, v2j and edges f1j, f2j with slots
    F_{v1j,f1j} = Φ_j·f2, F_{v1j,f2j} = F_{v2j,f2j} = f1, F_{v2j,f1j} = f2 and
    f3 on the g-edges.  With `ends = (left functors, right functors)` the
    outer edges g_1, g_n end in disc skeleta with those marked points.
    """
    links = n - 1
    if links < 0 or len(phis) != links:
        raise UnsupportedSkeleton("skeleton_chain(n) needs n >= 1 and n - 1 autoequivalences")
    if links == 0 and ends is None:
        raise UnsupportedSkeleton("a chain with no links needs end data")
    vertices, edges, slots, trans, cycles = {}, {}, {}, {}, {}
    for j in range(1, links + 1):
        v1, v2 = f"v1_{j}", f"v2_{j}"
        gl = f"g{j}.{v1}"
        gr = f"g{j + 1}.{v2}"
        vertices[v1] = (f"f1_{j}.1", f"f2_{j}.1", gl)
        vertices[v2] = (f"f1_{j}.2", f"f2_{j}.2", gr)
        edges[f"f1_{j}"] = (f"f1_{j}.1", f"f1_{j}.2")
        edges[f"f2_{j}"] = (f"f2_{j}.1", f"f2_{j}.2")
        slots[v1] = (f"f2_{j}.1", f"f1_{j}.1", gl)
        slots[v2] = (f"f2_{j}.2", f"f1_{j}.2", gr)
        if phis[j - 1].desc != ("id",):
            trans[f"f1_{j}.1"] = phis[j - 1]
        cycles[f"L{j}"] = Cycle(((f"f1_{j}.1", f"f1_{j}.2"), (f"f2_{j}.2", f"f2_{j}.1")))
    for j in range(1, links):
        a, b = f"g{j + 1}.v2_{j}", f"g{j + 1}.v1_{j + 1}"
        edges[f"g{j + 1}"] = (a, b)
    for j in range(1, links):
        a, b = f"g{j + 1}.v2_{j}", f"g{j + 1}.v1_{j + 1}"
        back = Cycle(((f"f2_{j}.2", f"f2_{j}.1"), (f"f1_{j}.1", f"f1_{j}.2")))
        cycles[f"I{j}"] = Cycle(((a, b),)) + cycles[f"L{j + 1}"] + Cycle(((b, a),)) + back
    boundary = []
    marked, mf = [], {}
    left = f"g1.v1_1" if links else "g1.L"
    right = f"g{n}.v2_{links}" if links else "g1.R"
    if ends is None:
        edges["g1"] = (left,)
        edges[f"g{n}"] = (right,)
        boundary = ["L1"] + [f"I{j}" for j in range(1, links)] + [f"L{links}-rev"]
        cycles[f"L{links}-rev"] = cycles[f"L{links}"].reverse()
    else:
        lf, rf = ends
        if len(lf) < 2 or len(rf) < 2:
            raise UnsupportedSkeleton("each end disc needs at least two marked points "
                                      "(one would leave a bivalent vertex)")
        for side, fs, attach, gname in (("L", lf, left, "g1"), ("R", rf, right, f"g{n}")):
            cv = f"c{side}"
            hs = tuple(f"q{side}{i}.c" for i in range(1, len(fs) + 1)) + (f"{gname}.{cv}",)
            vertices[cv] = hs
            slots[cv] = hs
            for i, F in enumerate(fs, start=1):
                p = f"p{side}{i}"
                vertices[p] = (f"q{side}{i}.p",)
                edges[f"q{side}{i}"] = (f"q{side}{i}.c", f"q{side}{i}.p")
                marked.append(p)
                mf[p] = F
                cycles[f"C{side}{i}"] = Cycle(((f"q{side}{i}.c", f"q{side}{i}.p"),
                                               (f"l_{p}.1", f"l_{p}.2"),
                                               (f"q{side}{i}.p", f"q{side}{i}.c")))
            if links:
                edges[gname] = (f"{gname}.{cv}", attach)
        if not links:
            edges["g1"] = ("g1.cL", "g1.cR")
        for side, fs, gname in (("L", lf, "g1"), ("R", rf, f"g{n}")):
            cv = f"c{side}"
            tot = Cycle(())
            for i in range(1, len(fs) + 1):
                tot = tot + cycles[f"C{side}{i}"]
            if links:
                j = 1 if side == "L" else links
                a = f"{gname}.{cv}"
                b = edges[gname][1]
                loop = cycles[f"L{j}"] if side == "L" else Cycle(
                    ((f"f1_{j}.2", f"f1_{j}.1"), (f"f2_{j}.1", f"f2_{j}.2")))
                tot = tot + Cycle(((a, b),)) + loop + Cycle(((b, a),))
            cycles[f"outer{side}"] = tot
        boundary = ["outerL"] + [f"I{j}" for j in range(1, links)] + ["outerR"]
    g = RibbonGraph(vertices, edges, tuple(marked), cycles, tuple(boundary))
    return SchoberDatum(g, c, mf, trans, slots, (), (), name or f"chain{n}")
