"""Shipped example categories and schober fixtures."""

from __future__ import annotations

import itertools
from typing import Sequence

from .dgcore import CategoryBuilder, DgCategory, HomSpace
from .exactla import FieldSpec, Matrix, QQ, rref


class BadParam(ValueError):
    pass


class InfiniteHom(ValueError):
    pass


def make_point(field: FieldSpec = QQ) -> DgCategory:
    """One object e with End(e) = k·id."""
    return CategoryBuilder(field, name="point").add_object("e", "id").build()


def make_sphere_algebra(n: int, field: FieldSpec = QQ) -> DgCategory:
    """One object S with End(S) = k·id ⊕ k·eps, |eps| = n, eps² = 0, d = 0."""
    if not isinstance(n, int) or n < 2:
        raise BadParam(f"sphere algebra needs n >= 2, got {n!r}")
    b = CategoryBuilder(field, name=f"sphere{n}")
    b.add_object("S", "id").add_basis("S", "S", "eps", n)
    return b.build()


def make_quiver_path_category(objects: Sequence[str], arrows: Sequence[tuple],
                              relations: Sequence[dict] = (), differential: dict | None = None,
                              field: FieldSpec = QQ, name="quiver") -> DgCategory:
    """Path category of a graded quiver modulo homogeneous relations.

    arrows: (name, src, dst, degree).  A path is a tuple of arrow names
    in traversal order, so ("a", "b") means b∘a.  relations and the
    values of `differential` are dicts {path: coefficient}; the
    differential is extended to paths by the Leibniz rule.
    """
    F = field
    differential = differential or {}
    arr = {a[0]: (a[1], a[2], a[3]) for a in arrows}
    if len(arr) != len(arrows):
        raise BadParam("duplicate arrow names")
    for nm, (s, t, _) in arr.items():
        if s not in objects or t not in objects:
            raise BadParam(f"arrow {nm} has unknown endpoint")

    # acyclicity: paths must be finite in number
    out_edges = {o: [nm for nm, (s, _, _) in arr.items() if s == o] for o in objects}
    state = {}

    def visit(o):
        state[o] = 1
        for nm in out_edges[o]:
            t = arr[nm][1]
            if state.get(t) == 1:
                raise InfiniteHom(f"oriented cycle through {t}: path spaces are infinite")
            if t not in state:
                visit(t)
        state[o] = 2

    for o in objects:
        if o not in state:
            visit(o)

    paths = {(x, y): [] for x in objects for y in objects}
    for x in objects:
        paths[(x, x)].append(())
        frontier = [((), x)]
        while frontier:
            nxt = []
            for p, end in frontier:
                for nm in out_edges[end]:
                    q = p + (nm,)
                    t = arr[nm][1]
                    paths[(x, t)].append(q)
                    nxt.append((q, t))
            frontier = nxt

    def src_of(p, default):
        return arr[p[0]][0] if p else default

    def pdeg(p):
        return sum(arr[a][2] for a in p)

    # ideal spanned by q·r·p
    ideal = {k: [] for k in paths}
    for r in relations:
        r = {tuple(p): c for p, c in r.items()}
        ends = set()
        for p in r:
            if not p:
                raise BadParam("relations may not involve identities")
            ends.add((arr[p[0]][0], arr[p[-1]][1]))
        if len(ends) != 1:
            raise BadParam("relation mixes endpoints")
        if len({pdeg(p) for p in r}) != 1:
            raise BadParam("relation is not homogeneous")
        s, t = ends.pop()
        for x in objects:
            for y in objects:
                for u in paths[(x, s)]:
                    for v in paths[(t, y)]:
                        ideal[(x, y)].append({u + p + v: c for p, c in r.items()})

    normal = {}
    basis = {}
    for key, ps in paths.items():
        order = sorted(ps, key=lambda p: (-len(p), p))  # pivots fall on long paths
        idx = {p: i for i, p in enumerate(order)}
        rows = []
        for vec in ideal[key]:
            row = [F.zero] * len(order)
            for p, c in vec.items():
                row[idx[p]] += F(c)
            rows.append(row)
        if rows:
            R, piv = rref(Matrix.from_rows(F, rows, len(order)))
        else:
            R, piv = None, []
        pivset = set(piv)
        keep = sorted((p for i, p in enumerate(order) if i not in pivset), key=lambda p: (len(p), p))
        basis[key] = keep
        kidx = {p: i for i, p in enumerate(keep)}
        nf = {}
        for p in keep:
            nf[p] = {kidx[p]: F.one}
        for r_i, c in enumerate(piv):
            nf[order[c]] = {kidx[order[j]]: -R.data[r_i][j] for j in range(len(order))
                            if j not in pivset and R.data[r_i][j]}
        normal[key] = nf

    def reduce(x, y, combo):
        out = {}
        for p, c in combo.items():
            for k, a in normal[(x, y)][p].items():
                out[k] = out.get(k, F.zero) + c * a
        return {k: a for k, a in out.items() if a}

    def d_path(p):
        out = {}
        for i, a in enumerate(p):
            sign = -1 if sum(arr[b][2] for b in p[i + 1:]) % 2 else 1
            for q, c in differential.get(a, {}).items():
                q = tuple(q)
                if q and (arr[q[0]][0], arr[q[-1]][1]) != arr[a][:2]:
                    raise BadParam(f"d({a}) has wrong endpoints")
                if pdeg(q) != arr[a][2] + 1:
                    raise BadParam(f"d({a}) has wrong degree")
                full = p[:i] + q + p[i + 1:]
                out[full] = out.get(full, F.zero) + F(sign) * F(c)
        return out

    homs, comp, units = {}, {}, {}
    name_of = lambda x, p: ".".join(p) if p else f"id_{x}"
    for (x, y), keep in basis.items():
        if not keep:
            continue
        n = len(keep)
        D = Matrix.zeros(F, n, n)
        for j, p in enumerate(keep):
            for k, a in reduce(x, y, d_path(p)).items():
                D.data[k][j] = a
        homs[(x, y)] = HomSpace(tuple(name_of(x, p) for p in keep),
                                tuple(pdeg(p) for p in keep), D)
        for vec in ideal[(x, y)]:
            dv = {}
            for p, c in vec.items():
                for q, a in d_path(p).items():
                    dv[q] = dv.get(q, F.zero) + F(c) * a
            if reduce(x, y, dv):
                raise BadParam("differential does not preserve the relation ideal")
    for x in objects:
        units[x] = basis[(x, x)].index(())
    for x, y, z in itertools.product(objects, repeat=3):
        tab = {}
        for i, g in enumerate(basis[(y, z)]):
            for j, f in enumerate(basis[(x, y)]):
                row = reduce(x, z, {f + g: F.one})
                if row:
                    tab[(i, j)] = row
        if tab:
            comp[(x, y, z)] = tab
    return DgCategory(F, list(objects), homs, comp, units, name)


def make_a2_quiver(field: FieldSpec = QQ) -> DgCategory:
    return make_quiver_path_category(["P1", "P2"], [("a", "P1", "P2", 0)], field=field, name="a2")


def make_kronecker(field: FieldSpec = QQ) -> DgCategory:
    return make_quiver_path_category(["P1", "P2"], [("x", "P1", "P2", 0), ("y", "P1", "P2", 0)],
                                     field=field, name="kronecker")


def make_dg_a3_quiver(field: FieldSpec = QQ) -> DgCategory:
    """A3 with arrows a, b of degree 0, c of degree -1 and d(c) = b∘a.

    The composite b∘a becomes exact, so hom(P1, P3) is acyclic.
    """
    return make_quiver_path_category(
        ["P1", "P2", "P3"],
        [("a", "P1", "P2", 0), ("b", "P2", "P3", 0), ("c", "P1", "P3", -1)],
        differential={"c": {("a", "b"): 1}}, field=field, name="dga3")


def category_instances(field: FieldSpec = QQ) -> dict:
    return {
        "point": make_point(field),
        "sphere2": make_sphere_algebra(2, field),
        "sphere3": make_sphere_algebra(3, field),
        "a2": make_a2_quiver(field),
        "kronecker": make_kronecker(field),
        "dga3": make_dg_a3_quiver(field),
    }


def make_fixture_schobers(field: FieldSpec = QQ) -> dict:
    """Named schober fixtures over the point and the 2-sphere algebra."""
    from .noncomm import identity_auto, shift_auto, twist_auto
    from .schober import skeleton_K_k, skeleton_K_p, skeleton_K_phi, skeleton_chain
    from .sphere import ObjectFunctor
    from .twist import embed
    P, C = make_point(field), make_sphere_algebra(2, field)
    F = ObjectFunctor(P, embed(C, "S"))
    T = twist_auto(F)
    return {
        "k2-sphere": skeleton_K_k(C, [F, F], name="k2-sphere"),
        "k3-sphere": skeleton_K_k(C, [F, F, F], name="k3-sphere"),
        "kp-point": skeleton_K_p(P, shift_auto(P, 1), name="kp-point"),
        "kp-sphere": skeleton_K_p(C, shift_auto(C, 1), name="kp-sphere"),
        "kphi-point": skeleton_K_phi(P, identity_auto(P), name="kphi-point"),
        "kphi-sphere": skeleton_K_phi(C, T, name="kphi-sphere"),
        "chain-sphere": make_chain_fixture(C, T, name="chain-sphere"),
    }


def make_chain_fixture(c: DgCategory, phi, name="chain") -> "SchoberDatum":
    """Three links with transitions Φ, Φ⁻¹, Φ."""
    from .schober import skeleton_chain
    return skeleton_chain(4, c, [phi, phi.inverse(), phi], name=name)


def make_point_to_sphere(field: FieldSpec = QQ):
    """The dg functor point -> sphere2 sending e to S."""
    from .dgcore import DgFunctor
    P, C = make_point(field), make_sphere_algebra(2, field)
    m = Matrix(field, 2, 1, [[field.one], [field.zero]])
    return DgFunctor(P, C, {"e": "S"}, {("e", "e"): m}, name="point-to-sphere2")


def fixture_matrix(field: FieldSpec = QQ) -> dict:
    """Every shipped document by file name, in a fixed order."""
    from .dgcore import FunctorBimodule, materialize_bimodule
    from .glue import directed_vs_glued_oracle
    from .twist import TwMorphism, TwObject, cone, embed
    out = dict(category_instances(field))
    f = make_point_to_sphere(field)
    out["point-to-sphere2"] = f
    out["bimodule-point-sphere2"] = materialize_bimodule(FunctorBimodule(f, f), f.src, f.src,
                                                         name="hom-S-S")
    C = f.dst
    eps = C.element("S", "S", "eps")
    out["cone-eps"] = cone(TwMorphism(embed(C, "S"), embed(C, "S", 2), eps))
    P = f.src
    out["ext-point"] = TwObject.make(P, [("e", 0), ("e", -1)], {(0, 1): P.identity("e")})
    out.update(make_fixture_schobers(field))
    out["report-directed-point"] = directed_vs_glued_oracle(P, ["e", "e", "e"])
    return out
