"""Text archive format and the `dgkit` command line.

Every document starts with a header line and a kind line:

    dgkit-archive 1
    kind category

followed by whitespace-separated records, one per line.  Nested
categories are wrapped in `begin category <role>` ... `end category`.
Scalars are written canonically (p/q in lowest terms over Q, a residue
in [0, p) over F_p).  Unknown records are rejected.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from typing import Sequence

from . import holim
from .dgcore import (DgBimodule, DgCategory, DgFunctor, HomSpace, ValidationReport,
                     materialize, validate_bimodule, validate_category, validate_functor)
from .exactla import FieldSpec, Matrix, field_from_name
from .glue import (GluedObject, GluingDatum, OracleReport, directed_category,
                   directed_vs_glued_oracle, fmt_table, glue)
from .noncomm import (Autoequivalence, dual_twist_auto, identity_auto, segal_equalizer_oracle,
                      shift_auto, twist_auto, _point)
from .schober import (BadCycle, BadIndex, Cycle, Flagged, RibbonGraph, SchoberDatum,
                      UnsupportedGeneralFunctor, UnsupportedSkeleton, boundary_triviality,
                      braid_mutate, glsect_oracle, k_circle, monodromy, mutation_report,
                      section_tables, validate_schober)
from .sphere import ObjectFunctor
from .twist import (NotClosed, TwMorphism, TwObject, WrongDegree, cone, embed, mc_check,
                    tw_category, validate_tw_object)

FORMAT_VERSION = 1
HEADER = "dgkit-archive"
KINDS = ("category", "functor", "bimodule", "tw-object", "schober", "report")


class ParseError(ValueError):
    def __init__(self, line: int, field: str, msg: str):
        where = f"line {line}" if line else "command line"
        super().__init__(f"{where}: field {field}: {msg}")
        self.line, self.field = line, field


class SchemaVersionError(ValueError):
    pass


@dataclass(frozen=True)
class ArchivedReport:
    title: str
    ok: bool
    lines: tuple


# ------------------------------------------------------------ writing

def _tok(s) -> str:
    s = str(s)
    if not s or any(c.isspace() for c in s):
        raise ValueError(f"name {s!r} is empty or contains whitespace")
    return s


def _category_lines(c: DgCategory) -> list:
    F = c.field
    out = [f"name {_tok(c.name)}", f"field {F.name()}"]
    for x in c.objects:
        out.append(f"object {_tok(x)} {_tok(c.hom(x, x).names[c.units[x]])}")
    pairs = [(x, y) for x in c.objects for y in c.objects if c.hom(x, y).names]
    for x, y in pairs:
        h = c.hom(x, y)
        for nm, d in zip(h.names, h.degrees):
            out.append(f"basis {x} {y} {_tok(nm)} {d}")
    for x, y in pairs:
        h = c.hom(x, y)
        for j, src in enumerate(h.names):
            for i, tgt in enumerate(h.names):
                a = h.diff.data[i][j]
                if a:
                    out.append(f"diff {x} {y} {src} {tgt} {F.format(a)}")
    for x in c.objects:
        for y in c.objects:
            for z in c.objects:
                tab = c.comp.get((x, y, z))
                if not tab:
                    continue
                gn, fn, hn = c.hom(y, z).names, c.hom(x, y).names, c.hom(x, z).names
                for (i, j) in sorted(tab):
                    for k, a in sorted(tab[(i, j)].items()):
                        if a:
                            out.append(f"comp {x} {y} {z} {gn[i]} {fn[j]} {hn[k]} {F.format(a)}")
    return out


def _block(role: str, c: DgCategory) -> list:
    return [f"begin category {role}"] + _category_lines(c) + ["end category"]


def _functor_lines(f: DgFunctor) -> list:
    F = f.dst.field
    out = [f"name {_tok(f.name)}"] + _block("src", f.src) + _block("dst", f.dst)
    for x in f.src.objects:
        out.append(f"object {x} {_tok(f.obj_map[x])}")
    for x in f.src.objects:
        for y in f.src.objects:
            m = f.hom_map.get((x, y))
            if m is None:
                continue
            sn = f.src.hom(x, y).names
            tn = f.dst.hom(f.obj(x), f.obj(y)).names
            for j, s in enumerate(sn):
                for i, t in enumerate(tn):
                    if m.data[i][j]:
                        out.append(f"hom {x} {y} {s} {t} {F.format(m.data[i][j])}")
    return out


def _bimodule_lines(M: DgBimodule) -> list:
    F = M.field
    L, R = M.left_cat, M.right_cat
    out = [f"name {_tok(M.name)}"] + _block("left", L) + _block("right", R)
    pairs = [(a, b) for a in L.objects for b in R.objects if M.degrees(a, b)]
    for a, b in pairs:
        v = M.values[(a, b)]
        for nm, d in zip(v.names, v.degrees):
            out.append(f"value {a} {b} {_tok(nm)} {d}")
    for a, b in pairs:
        v = M.values[(a, b)]
        for j, s in enumerate(v.names):
            for i, t in enumerate(v.names):
                if v.diff.data[i][j]:
                    out.append(f"mdiff {a} {b} {s} {t} {F.format(v.diff.data[i][j])}")
    vn = lambda a, b: M.values[(a, b)].names if (a, b) in M.values else ()
    for (a, b, b2), tab in sorted(M.post_c.items(), key=lambda kv: _key_order(kv[0], (L, R, R))):
        for (i, j), row in sorted(tab.items()):
            for k, c in sorted(row.items()):
                if c:
                    out.append(f"post {a} {b} {b2} {R.hom(b, b2).names[i]} {vn(a, b)[j]} "
                               f"{vn(a, b2)[k]} {F.format(c)}")
    for (a2, a, b), tab in sorted(M.pre_c.items(), key=lambda kv: _key_order(kv[0], (L, L, R))):
        for (j, i), row in sorted(tab.items()):
            for k, c in sorted(row.items()):
                if c:
                    out.append(f"pre {a2} {a} {b} {vn(a, b)[j]} {L.hom(a2, a).names[i]} "
                               f"{vn(a2, b)[k]} {F.format(c)}")
    return out


def _key_order(key, cats):
    return tuple(c.objects.index(k) for k, c in zip(key, cats))


def _tw_lines(label: str, x: TwObject) -> list:
    c = x.base
    F = c.field
    out = ["tw " + " ".join([_tok(label)] + [f"{_tok(a)}:{s}" for a, s in x.summands])]
    for (i, j), v in x.mc:
        names = c.hom(x.summands[i][0], x.summands[j][0]).names
        for k, a in enumerate(v):
            if a:
                out.append(f"tw-mc {label} {i} {j} {names[k]} {F.format(a)}")
    return out


def _desc_tokens(a: Autoequivalence, names: dict) -> list:
    k = a.desc[0]
    if k == "id":
        return ["id"]
    if k == "shift":
        return ["shift", str(a.desc[1])]
    if k in ("twist", "dual-twist"):
        return [k, names[a.desc[1]]]
    if k == "compose":
        return ["compose"] + _desc_tokens(a.desc[1], names) + _desc_tokens(a.desc[2], names)
    raise ValueError(f"autoequivalence {a.name} has no text form")


def _desc_objects(a: Autoequivalence, acc: list):
    k = a.desc[0]
    if k in ("twist", "dual-twist") and a.desc[1] not in acc:
        acc.append(a.desc[1])
    elif k == "compose":
        _desc_objects(a.desc[1], acc)
        _desc_objects(a.desc[2], acc)


def _schober_lines(s: SchoberDatum) -> list:
    g = s.graph
    out = [f"name {_tok(s.name)}"] + _block("fiber", s.fiber)
    objs = []
    for p in sorted(s.marked_functors):
        S = s.functor_of(p).S
        if S not in objs:
            objs.append(S)
    for p in sorted(s.circled):
        if s.circled[p].S not in objs:
            objs.append(s.circled[p].S)
    for h in sorted(s.transitions):
        _desc_objects(s.transitions[h], objs)
    for x in s.test_objects:
        if x not in objs:
            objs.append(x)
    names = {x: f"X{i + 1}" for i, x in enumerate(objs)}
    for x in objs:
        out.extend(_tw_lines(names[x], x))
    for v, hs in g.vertices.items():
        out.append("vertex " + " ".join([_tok(v)] + [_tok(h) for h in hs]))
    for e, hs in g.edges.items():
        out.append("edge " + " ".join([_tok(e)] + list(hs)))
    out.append("marked" + "".join(f" {p}" for p in g.marked))
    for nm, c in g.cycles.items():
        for a, b in c.steps:
            if ">" in a or ">" in b:
                raise ValueError("half-edge names may not contain '>'")
        out.append("cycle " + " ".join([_tok(nm)] + [f"{a}>{b}" for a, b in c.steps]))
    out.append("boundary" + "".join(f" {b}" for b in g.boundary))
    for v, hs in s.slots.items():
        out.append("slots " + " ".join([v] + list(hs)))
    for p in sorted(s.marked_functors):
        F = s.marked_functors[p]
        tag = "flagged" if isinstance(F, Flagged) else "functor"
        out.append(f"{tag} {p} {names[s.functor_of(p).S]}")
    for p in sorted(s.circled):
        out.append(f"circled {p} {names[s.circled[p].S]}")
    for h in sorted(s.transitions):
        out.append(" ".join(["transition", h] + _desc_tokens(s.transitions[h], names)))
    for word in s.relations:
        out.append("relation " + " ".join(f"{nm}:{'+1' if e > 0 else '-1'}" for nm, e in word))
    for x in s.test_objects:
        out.append(f"test {names[x]}")
    return out


def _report_parts(x):
    if isinstance(x, ArchivedReport):
        return x.title, x.ok, list(x.lines)
    lines = list(x.lines())
    ok = getattr(x, "ok", None)
    if ok is None:
        ok = getattr(x, "verdict", "") != "NONTRIVIAL"
    return (lines[0] if lines else "report"), bool(ok), lines[1:]


def kind_of(x) -> str:
    if isinstance(x, DgCategory):
        return "category"
    if isinstance(x, DgFunctor):
        return "functor"
    if isinstance(x, DgBimodule):
        return "bimodule"
    if isinstance(x, TwObject):
        return "tw-object"
    if isinstance(x, SchoberDatum):
        return "schober"
    if isinstance(x, ArchivedReport) or hasattr(x, "lines"):
        return "report"
    raise TypeError(f"cannot serialize {type(x).__name__}")


def serialize(x) -> str:
    kind = kind_of(x)
    head = [f"{HEADER} {FORMAT_VERSION}", f"kind {kind}"]
    if kind == "category":
        body = _category_lines(x)
    elif kind == "functor":
        body = _functor_lines(x)
    elif kind == "bimodule":
        body = _bimodule_lines(x)
    elif kind == "tw-object":
        if not isinstance(x.base, DgCategory):
            raise TypeError("only twisted complexes over a finite category can be written")
        body = _block("base", x.base) + _tw_lines("X", x)
    elif kind == "schober":
        body = _schober_lines(x)
    else:
        title, ok, lines = _report_parts(x)
        body = [f"title {title}", f"status {'PASS' if ok else 'FAIL'}"]
        body += [f"line {ln}" for ln in lines]
    return "\n".join(head + body) + "\n"


# ------------------------------------------------------------ reading

class _Lines:
    def __init__(self, text: str):
        if "\r" in text:
            raise ParseError(1, "line-ending", "only LF line endings are accepted")
        raw = text.split("\n")
        if raw and raw[-1] == "":
            raw.pop()
        self.items = [(i + 1, ln) for i, ln in enumerate(raw)]
        self.pos = 0

    def peek(self):
        return self.items[self.pos] if self.pos < len(self.items) else None

    def next(self):
        item = self.peek()
        if item is None:
            n = self.items[-1][0] + 1 if self.items else 1
            raise ParseError(n, "eof", "unexpected end of document")
        self.pos += 1
        return item


def _int(n, field, s) -> int:
    try:
        if s.strip() != s or str(int(s)) != s:
            raise ValueError
        return int(s)
    except ValueError:
        raise ParseError(n, field, f"expected an integer, got {s!r}") from None


def _scalar(n, F: FieldSpec, s):
    try:
        return F.parse(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(n, "coefficient", str(exc)) from None


def _arity(n, rec, toks, k, at_least=False):
    if (len(toks) < k) if at_least else (len(toks) != k):
        raise ParseError(n, rec, f"expected {k}{'+' if at_least else ''} fields, got {len(toks)}")


def _read_category(L: _Lines, closing: str | None) -> DgCategory:
    name, field = None, None
    objects, units = [], {}
    names, degrees, diffs, comps = {}, {}, [], []
    while True:
        item = L.peek()
        if item is None:
            if closing is not None:
                L.next()
            break
        n, line = item
        toks = line.split(" ")
        rec = toks[0]
        if closing is not None and line == closing:
            L.next()
            break
        if rec in ("begin", "end") or rec not in ("name", "field", "object", "basis", "diff", "comp"):
            if closing is None:
                break
            raise ParseError(n, rec, "unknown record in category")
        L.next()
        if rec == "name":
            _arity(n, rec, toks, 2)
            name = toks[1]
        elif rec == "field":
            _arity(n, rec, toks, 2)
            try:
                field = field_from_name(toks[1])
            except ValueError as exc:
                raise ParseError(n, "field", str(exc)) from None
        elif rec == "object":
            _arity(n, rec, toks, 3)
            if toks[1] in units:
                raise ParseError(n, "object", f"duplicate object {toks[1]}")
            objects.append(toks[1])
            units[toks[1]] = (n, toks[2])
        elif rec == "basis":
            _arity(n, rec, toks, 5)
            x, y, nm = toks[1:4]
            for o in (x, y):
                if o not in units:
                    raise ParseError(n, "object", f"unknown object {o}")
            if nm in names.get((x, y), []):
                raise ParseError(n, "basis", f"duplicate basis name {nm}")
            names.setdefault((x, y), []).append(nm)
            degrees.setdefault((x, y), []).append(_int(n, "degree", toks[4]))
        elif rec == "diff":
            _arity(n, rec, toks, 6)
            diffs.append((n, toks[1:]))
        else:
            _arity(n, rec, toks, 8)
            comps.append((n, toks[1:]))
    if name is None or field is None:
        raise ParseError(L.items[-1][0] if L.items else 1, "name" if name is None else "field",
                         "missing in category")

    def idx(n, x, y, nm, what):
        try:
            return names[(x, y)].index(nm)
        except (KeyError, ValueError):
            raise ParseError(n, what, f"unknown basis element {nm} of hom({x},{y})") from None

    homs = {}
    for key, nms in names.items():
        homs[key] = HomSpace(tuple(nms), tuple(degrees[key]), Matrix.zeros(field, len(nms), len(nms)))
    for n, (x, y, src, tgt, c) in diffs:
        j, i = idx(n, x, y, src, "diff"), idx(n, x, y, tgt, "diff")
        homs[(x, y)].diff.data[i][j] = _scalar(n, field, c)
    comp = {}
    for n, (x, y, z, g, f, h, c) in comps:
        i, j, k = idx(n, y, z, g, "comp"), idx(n, x, y, f, "comp"), idx(n, x, z, h, "comp")
        comp.setdefault((x, y, z), {}).setdefault((i, j), {})[k] = _scalar(n, field, c)
    unit_idx = {}
    for x, (n, u) in units.items():
        unit_idx[x] = idx(n, x, x, u, "object")
    return DgCategory(field, objects, homs, comp, unit_idx, name)


def _expect(L: _Lines, text: str):
    n, line = L.next()
    if line != text:
        raise ParseError(n, text.split(" ")[0], f"expected {text!r}, got {line!r}")


def _nested(L: _Lines, role: str) -> DgCategory:
    _expect(L, f"begin category {role}")
    return _read_category(L, "end category")


def _records(L: _Lines, allowed: dict):
    while L.peek() is not None:
        n, line = L.next()
        toks = line.split(" ")
        rec = toks[0]
        if rec not in allowed:
            raise ParseError(n, rec, "unknown record")
        k, at_least = allowed[rec]
        _arity(n, rec, toks, k, at_least)
        yield n, rec, toks


def _name_line(L: _Lines) -> str:
    n, line = L.next()
    toks = line.split(" ")
    if toks[0] != "name" or len(toks) != 2:
        raise ParseError(n, "name", "expected a name record")
    return toks[1]


def _read_functor(L: _Lines) -> DgFunctor:
    name = _name_line(L)
    src, dst = _nested(L, "src"), _nested(L, "dst")
    obj_map, entries = {}, []
    for n, rec, toks in _records(L, {"object": (3, False), "hom": (6, False)}):
        if rec == "object":
            if toks[1] not in src.objects or toks[2] not in dst.objects:
                raise ParseError(n, "object", "unknown object")
            obj_map[toks[1]] = toks[2]
        else:
            entries.append((n, toks[1:]))
    for x in src.objects:
        if x not in obj_map:
            raise ParseError(L.items[-1][0], "object", f"no image for {x}")
    F = dst.field
    hom_map = {}
    for x in src.objects:
        for y in src.objects:
            if src.hom(x, y).names:
                hom_map[(x, y)] = Matrix.zeros(F, dst.dim(obj_map[x], obj_map[y]), src.dim(x, y))
    for n, (x, y, s, t, c) in entries:
        try:
            j = src.hom(x, y).names.index(s)
            i = dst.hom(obj_map[x], obj_map[y]).names.index(t)
        except (KeyError, ValueError):
            raise ParseError(n, "hom", "unknown basis element") from None
        hom_map[(x, y)].data[i][j] = _scalar(n, F, c)
    return DgFunctor(src, dst, obj_map, hom_map, name)


def _read_bimodule(L: _Lines) -> DgBimodule:
    name = _name_line(L)
    left, right = _nested(L, "left"), _nested(L, "right")
    F = left.field
    vnames, vdeg, diffs, posts, pres = {}, {}, [], [], []
    for n, rec, toks in _records(L, {"value": (5, False), "mdiff": (6, False),
                                     "post": (8, False), "pre": (8, False)}):
        if rec == "value":
            a, b = toks[1], toks[2]
            if a not in left.objects or b not in right.objects:
                raise ParseError(n, "value", "unknown object")
            vnames.setdefault((a, b), []).append(toks[3])
            vdeg.setdefault((a, b), []).append(_int(n, "degree", toks[4]))
        elif rec == "mdiff":
            diffs.append((n, toks[1:]))
        elif rec == "post":
            posts.append((n, toks[1:]))
        else:
            pres.append((n, toks[1:]))

    def vi(n, a, b, nm):
        try:
            return vnames[(a, b)].index(nm)
        except (KeyError, ValueError):
            raise ParseError(n, "value", f"unknown element {nm} of M({a},{b})") from None

    def hi(n, c, x, y, nm):
        try:
            return c.hom(x, y).names.index(nm)
        except ValueError:
            raise ParseError(n, "hom", f"unknown basis element {nm}") from None

    values = {k: HomSpace(tuple(v), tuple(vdeg[k]), Matrix.zeros(F, len(v), len(v)))
              for k, v in vnames.items()}
    for n, (a, b, s, t, c) in diffs:
        values[(a, b)].diff.data[vi(n, a, b, t)][vi(n, a, b, s)] = _scalar(n, F, c)
    post_c, pre_c = {}, {}
    for n, (a, b, b2, g, m, k, c) in posts:
        key = (hi(n, right, b, b2, g), vi(n, a, b, m))
        post_c.setdefault((a, b, b2), {}).setdefault(key, {})[vi(n, a, b2, k)] = _scalar(n, F, c)
    for n, (a2, a, b, m, f, k, c) in pres:
        key = (vi(n, a, b, m), hi(n, left, a2, a, f))
        pre_c.setdefault((a2, a, b), {}).setdefault(key, {})[vi(n, a2, b, k)] = _scalar(n, F, c)
    return DgBimodule(left, right, values, post_c, pre_c, name)


def _read_tw(n, toks, base: DgCategory, tws: dict):
    label = toks[1]
    if label in tws:
        raise ParseError(n, "tw", f"duplicate twisted complex {label}")
    summands = []
    for t in toks[2:]:
        obj, sep, sh = t.rpartition(":")
        if not sep or obj not in base.objects:
            raise ParseError(n, "summand", f"bad summand {t!r}")
        summands.append((obj, _int(n, "shift", sh)))
    tws[label] = (summands, {})


def _read_tw_mc(n, toks, base: DgCategory, tws: dict):
    label = toks[1]
    if label not in tws:
        raise ParseError(n, "tw-mc", f"unknown twisted complex {label}")
    summands, mc = tws[label]
    i, j = _int(n, "row", toks[2]), _int(n, "column", toks[3])
    if not (0 <= i < j < len(summands)):
        raise ParseError(n, "tw-mc", "entry must be strictly upper triangular")
    a, b = summands[i][0], summands[j][0]
    names = base.hom(a, b).names
    if toks[4] not in names:
        raise ParseError(n, "tw-mc", f"unknown basis element {toks[4]}")
    v = mc.setdefault((i, j), [base.field.zero] * len(names))
    v[names.index(toks[4])] = _scalar(n, base.field, toks[5])


def _finish_tw(base, tws: dict) -> dict:
    return {k: TwObject.make(base, s, {ij: tuple(v) for ij, v in mc.items()})
            for k, (s, mc) in tws.items()}


def _read_tw_object(L: _Lines) -> TwObject:
    base = _nested(L, "base")
    tws = {}
    for n, rec, toks in _records(L, {"tw": (2, True), "tw-mc": (6, False)}):
        (_read_tw if rec == "tw" else _read_tw_mc)(n, toks, base, tws)
    if list(tws) != ["X"]:
        raise ParseError(L.items[-1][0], "tw", "a tw-object document holds exactly one complex X")
    return _finish_tw(base, tws)["X"]


def _parse_desc(n, toks: list, base, objs: dict) -> Autoequivalence:
    if not toks:
        raise ParseError(n, "transition", "truncated description")
    k = toks.pop(0)
    if k == "id":
        return identity_auto(base)
    if k == "shift":
        if not toks:
            raise ParseError(n, "transition", "shift needs an amount")
        return shift_auto(base, _int(n, "shift", toks.pop(0)))
    if k in ("twist", "dual-twist"):
        if not toks or toks[0] not in objs:
            raise ParseError(n, "transition", "twist needs a defined object")
        F = ObjectFunctor(_point(base), objs[toks.pop(0)])
        return twist_auto(F) if k == "twist" else dual_twist_auto(F)
    if k == "compose":
        first = _parse_desc(n, toks, base, objs)
        second = _parse_desc(n, toks, base, objs)
        return first.then(second)
    raise ParseError(n, "transition", f"unknown autoequivalence {k!r}")


def _read_schober(L: _Lines) -> SchoberDatum:
    name = _name_line(L)
    fiber = _nested(L, "fiber")
    tws = {}
    vertices, edges, cycles, slots = {}, {}, {}, {}
    marked, boundary, later = (), (), []
    seen = set()
    allowed = {"tw": (2, True), "tw-mc": (6, False), "vertex": (2, True), "edge": (3, True),
               "marked": (1, True), "cycle": (2, True), "boundary": (1, True),
               "slots": (2, True), "functor": (3, False), "flagged": (3, False),
               "circled": (3, False), "transition": (3, True), "relation": (2, True),
               "test": (2, False)}
    for n, rec, toks in _records(L, allowed):
        if rec == "tw":
            _read_tw(n, toks, fiber, tws)
        elif rec == "tw-mc":
            _read_tw_mc(n, toks, fiber, tws)
        elif rec == "vertex":
            vertices[toks[1]] = tuple(toks[2:])
        elif rec == "edge":
            if len(toks) > 4:
                raise ParseError(n, "edge", "an edge has one or two half-edges")
            edges[toks[1]] = tuple(toks[2:])
        elif rec in ("marked", "boundary"):
            if rec in seen:
                raise ParseError(n, rec, "given twice")
            seen.add(rec)
            if rec == "marked":
                marked = tuple(toks[1:])
            else:
                boundary = tuple(toks[1:])
        elif rec == "cycle":
            steps = []
            for t in toks[2:]:
                a, sep, b = t.partition(">")
                if not sep or not a or not b:
                    raise ParseError(n, "cycle", f"bad step {t!r}")
                steps.append((a, b))
            cycles[toks[1]] = Cycle(tuple(steps))
        elif rec == "slots":
            slots[toks[1]] = tuple(toks[2:])
        else:
            later.append((n, rec, toks))
    objs = _finish_tw(fiber, tws)
    point = _point(fiber)
    marked_f, circled, trans, relations, tests = {}, {}, {}, [], []

    def obj(n, label):
        if label not in objs:
            raise ParseError(n, "object", f"unknown twisted complex {label}")
        return objs[label]

    for n, rec, toks in later:
        if rec in ("functor", "flagged"):
            F = ObjectFunctor(point, obj(n, toks[2]))
            marked_f[toks[1]] = F if rec == "functor" else Flagged(F)
        elif rec == "circled":
            circled[toks[1]] = ObjectFunctor(point, obj(n, toks[2]))
        elif rec == "transition":
            rest = toks[2:]
            trans[toks[1]] = _parse_desc(n, rest, fiber, objs)
            if rest:
                raise ParseError(n, "transition", "trailing tokens")
        elif rec == "relation":
            word = []
            for t in toks[1:]:
                nm, sep, e = t.rpartition(":")
                if not sep or e not in ("+1", "-1"):
                    raise ParseError(n, "relation", f"bad letter {t!r}")
                word.append((nm, 1 if e == "+1" else -1))
            relations.append(tuple(word))
        else:
            tests.append(obj(n, toks[1]))
    graph = RibbonGraph(vertices, edges, marked, cycles, boundary)
    return SchoberDatum(graph, fiber, marked_f, trans, slots, tuple(relations), tuple(tests),
                        name, circled)


def _read_report(L: _Lines) -> ArchivedReport:
    n, line = L.next()
    if not line.startswith("title "):
        raise ParseError(n, "title", "expected a title record")
    title = line[6:]
    n, line = L.next()
    if line not in ("status PASS", "status FAIL"):
        raise ParseError(n, "status", "expected status PASS or FAIL")
    ok = line == "status PASS"
    lines = []
    while L.peek() is not None:
        n, line = L.next()
        if not line.startswith("line "):
            raise ParseError(n, line.split(" ")[0], "unknown record")
        lines.append(line[5:])
    return ArchivedReport(title, ok, tuple(lines))


def parse(text: str):
    L = _Lines(text)
    n, line = L.next()
    toks = line.split(" ")
    if len(toks) != 2 or toks[0] != HEADER:
        raise ParseError(n, "header", f"expected '{HEADER} <version>'")
    if toks[1] != str(FORMAT_VERSION):
        raise SchemaVersionError(f"format version {toks[1]} is not supported "
                                 f"(this reader understands {FORMAT_VERSION})")
    n, line = L.next()
    toks = line.split(" ")
    if len(toks) != 2 or toks[0] != "kind" or toks[1] not in KINDS:
        raise ParseError(n, "kind", f"expected one of {', '.join(KINDS)}")
    kind = toks[1]
    if kind == "category":
        out = _read_category(L, None)
        if L.peek() is not None:
            m, ln = L.peek()
            raise ParseError(m, ln.split(" ")[0], "unknown record")
        return out
    reader = {"functor": _read_functor, "bimodule": _read_bimodule,
              "tw-object": _read_tw_object, "schober": _read_schober, "report": _read_report}
    return reader[kind](L)


def load(path: str):
    with open(path, encoding="utf-8", newline="") as fh:
        return parse(fh.read())


def dump(x, path: str):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize(x))


# ------------------------------------------------------------ command helpers

class MathFailure(Exception):
    """Exit status 1."""


def _expect_kind(x, *kinds):
    k = kind_of(x)
    if k not in kinds:
        raise ParseError(2, "kind", f"expected {' or '.join(kinds)}, got {k}")
    return x


def _tw_obj(c: DgCategory, text: str) -> TwObject:
    """`X` or `X[n]` for an object of c."""
    name, shift = text, 0
    if text.endswith("]") and "[" in text:
        name, _, rest = text.partition("[")
        try:
            shift = int(rest[:-1])
        except ValueError:
            raise ParseError(0, "object", f"bad shift in {text!r}") from None
    if name not in c.objects:
        raise ParseError(0, "object", f"unknown object {name!r}")
    return embed(c, name, shift)


def _vector(c, names: Sequence[str], text: str) -> tuple:
    """'0' or '_', 'a', '2*a+-1/3*b' over the given basis names."""
    F = c.field
    v = [F.zero] * len(names)
    if text.strip() in ("0", "_"):
        return tuple(v)
    # entries of a single-block twisted hom may be named without the [i,j] prefix
    short = {}
    for n in names:
        if n.startswith("[") and "]" in n:
            short.setdefault(n.partition("]")[2], []).append(n)
    for term in text.split("+"):
        coef, sep, nm = term.rpartition("*")
        if nm not in names and len(short.get(nm, ())) == 1:
            nm = short[nm][0]
        if nm not in names:
            raise ParseError(0, "morphism", f"unknown basis element {nm!r}")
        try:
            a = F.parse(coef) if sep else F.one
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(0, "morphism", str(exc)) from None
        i = names.index(nm)
        v[i] = v[i] + a
    return tuple(v)


def _split_list(text: str) -> list:
    return [t for t in text.split(",") if t] if text else []


def _out(lines):
    for ln in lines:
        print(ln)


def _write_or_print(x, path):
    if path:
        dump(x, path)
    else:
        sys.stdout.write(serialize(x))


def _safe_names(objs, render) -> list:
    names, used = [], {}
    for o in objs:
        nm = "".join("_" if ch.isspace() else ch for ch in render(o))
        k = used.get(nm, 0)
        used[nm] = k + 1
        names.append(nm if not k else f"{nm}#{k}")
    return names


# ------------------------------------------------------------ commands

def cmd_validate(a):
    x = load(a.file)
    k = kind_of(x)
    if k == "category":
        rep = validate_category(x)
    elif k == "functor":
        rep = validate_functor(x)
    elif k == "bimodule":
        rep = validate_bimodule(x)
    elif k == "tw-object":
        rep = validate_tw_object(x)
    elif k == "schober":
        rep = validate_schober(x)
    else:
        _out([x.title, f"status {'PASS' if x.ok else 'FAIL'}"] + list(x.lines))
        return 0 if x.ok else 1
    _out(rep.lines())
    return 0 if rep.ok else 1


def cmd_cohom(a):
    c = _expect_kind(load(a.cat), "category")
    tw = tw_category(c)
    srcs = [a.src] if a.src else list(c.objects)
    dsts = [a.dst] if a.dst else list(c.objects)
    for s in srcs:
        for d in dsts:
            t = tw.h_row(_tw_obj(c, s), _tw_obj(c, d))
            print(f"H*({s},{d}) = {fmt_table(t)}")
    return 0


def _glued_seeds(datum, text):
    T = datum.target
    out = []
    for item in [t for t in text.split(";") if t]:
        parts = item.split(",")
        if len(parts) != 3:
            raise ParseError(0, "objects", f"expected a,b,mu in {item!r}")
        a = None if parts[0] == "_" else parts[0]
        b = None if parts[1] == "_" else parts[1]
        if a is not None and a not in datum.a1.objects or b is not None and b not in datum.a2.objects:
            raise ParseError(0, "objects", f"unknown object in {item!r}")
        A, B = datum.F1(a), datum.F2(b)
        out.append(GluedObject(a, b, _vector(T, T.hom_names(A, B), parts[2])))
    return out


def cmd_glue(a):
    A = _expect_kind(load(a.A), "category")
    B = _expect_kind(load(a.B), "category")
    f1 = _expect_kind(load(a.f1), "functor")
    f2 = _expect_kind(load(a.f2), "functor")
    if f1.src != A or f2.src != B or f1.dst != f2.dst:
        raise MathFailure("functors do not match the categories or do not share a target")
    f1.src, f2.src, f2.dst = A, B, f1.dst
    datum = GluingDatum(A, B, f1, f2)
    try:
        seeds = _glued_seeds(datum, a.objects)
        G = glue(datum, seeds, name="glued")
    except (NotClosed, WrongDegree, ValueError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise MathFailure(str(exc)) from None
    names = _safe_names(seeds, lambda x: f"({x.a or '0'},{x.b or '0'})")
    _write_or_print(materialize(G, seeds, names, name=a.name), a.o)
    return 0


def cmd_directed(a):
    c = _expect_kind(load(a.cat), "category")
    u = _split_list(a.objects)
    for x in u:
        if x not in c.objects:
            raise ParseError(0, "objects", f"unknown object {x!r}")
    _write_or_print(directed_category(c, u, name=a.name), a.o)
    return 0


def cmd_tw(a):
    if a.tw_cmd == "check":
        x = _expect_kind(load(a.file), "tw-object")
        rep = validate_tw_object(x)
        _out(rep.lines())
        _out([f"mc_check: {mc_check(x)}"])
        return 0 if rep.ok else 1
    c = _expect_kind(load(a.cat), "category")
    src_t, sep, rest = a.morphism.partition("->")
    dst_t, sep2, terms = rest.partition(":")
    if not sep or not sep2:
        raise ParseError(0, "morphism", "expected X->Y:terms")
    X, Y = _tw_obj(c, src_t), _tw_obj(c, dst_t)
    vec = _vector(c, c.hom(X.summands[0][0], Y.summands[0][0]).names, terms)
    try:
        x = cone(TwMorphism(X, Y, vec))
    except (NotClosed, WrongDegree) as exc:
        raise MathFailure(str(exc)) from None
    _write_or_print(x, a.o)
    return 0


def cmd_holim(a):
    if a.holim_cmd == "iso":
        c = _expect_kind(load(a.cat), "category")
        tw = tw_category(c)
        x, y = _tw_obj(c, a.x), _tw_obj(c, a.y)
        cert = holim.iso_check(tw, x, y)
        if isinstance(cert, holim.IsoCertificate):
            print(f"{a.x} ≅ {a.y}: certified")
            return 0
        print(f"{a.x} vs {a.y}: not certified ({cert.note})")
        return 1
    f1 = _expect_kind(load(a.f1), "functor")
    f2 = _expect_kind(load(a.f2), "functor")
    if f1.dst != f2.dst:
        raise MathFailure("functors do not share a target")
    f2.dst = f1.dst
    if a.holim_cmd == "equalizer" and f1.src != f2.src:
        raise MathFailure("equalizer functors need a common source")
    if a.holim_cmd == "equalizer":
        f2.src = f1.src
    T = f1.dst
    objs, labels = [], []
    try:
        for item in [t for t in a.objects.split(";") if t]:
            parts = item.split(",")
            if a.holim_cmd == "equalizer":
                if len(parts) != 2 or parts[0] not in f1.src.objects:
                    raise ParseError(0, "objects", f"expected a,mu in {item!r}")
                x = parts[0]
                mu = _vector(T, T.hom_names(f1.obj(x), f2.obj(x)), parts[1])
                objs.append(holim.equalizer_object(f1, f2, x, mu))
                labels.append(x)
            else:
                if len(parts) != 3 or parts[0] not in f1.src.objects or parts[1] not in f2.src.objects:
                    raise ParseError(0, "objects", f"expected a,b,mu in {item!r}")
                mu = _vector(T, T.hom_names(f1.obj(parts[0]), f2.obj(parts[1])), parts[2])
                objs.append(holim.fiber_object(f1, f2, parts[0], parts[1], mu))
                labels.append(f"({parts[0]},{parts[1]})")
        if a.holim_cmd == "equalizer":
            cat = holim.ho_equalizer(f1, f2, objs, name=a.name)
        else:
            cat = holim.ho_fiber(f1, f2, objs, name=a.name)
    except holim.BadCertificate as exc:
        raise MathFailure(str(exc)) from None
    _write_or_print(materialize(cat, objs, _safe_names(labels, str), name=a.name), a.o)
    return 0


def cmd_schober(a):
    s = _expect_kind(load(a.file), "schober")
    c = a.schober_cmd
    if c == "validate":
        rep = validate_schober(s)
        _out(rep.lines())
        return 0 if rep.ok else 1
    if c == "sections":
        tabs = section_tables(s)
        for i, row in enumerate(tabs):
            for j, t in enumerate(row):
                print(f"H*(P{i + 1},P{j + 1}) = {fmt_table(t)}")
        return 0
    if c == "monodromy":
        t = k_circle(s)
        names = [a.cycle] if a.cycle else list(t.graph.cycles)
        for nm in names:
            if nm not in t.graph.cycles:
                raise MathFailure(f"unknown cycle {nm!r}")
            _out([f"{nm}:"] + monodromy(t, t.graph.cycles[nm]).lines())
        return 0
    if c == "mutate":
        word = [int(w) for w in _split_list(a.index)]
        if not word:
            raise ParseError(0, "index", "give at least one index")
        other = [int(w) for w in _split_list(a.against)] if a.against else None
        rep = mutation_report(s, word, other)
        _out(rep.lines())
        if a.o:
            t = s
            for i in word:
                t = braid_mutate(t, i)
            dump(t, a.o)
        return 0 if rep.ok else 1
    rep = boundary_triviality(s)
    _out(rep.lines())
    return 0


def cmd_oracle(a):
    x = load(a.file)
    if a.oracle_cmd == "glsect":
        rep = glsect_oracle(_expect_kind(x, "schober"))
    elif a.oracle_cmd == "directed-vs-glued":
        c = _expect_kind(x, "category")
        u = _split_list(a.objects) or list(c.objects)
        for o in u:
            if o not in c.objects:
                raise ParseError(0, "objects", f"unknown object {o!r}")
        rep = directed_vs_glued_oracle(c, u)
    else:
        c = _expect_kind(x, "category")
        phi = identity_auto(c) if not a.shift else shift_auto(c, a.shift)
        u = _split_list(a.objects) or list(c.objects)
        rep = segal_equalizer_oracle(c, phi, u)
    _out(rep.lines())
    return 0 if rep.ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dgkit", description="Finite dg categories, gluing and schobers.")
    p.add_argument("--seed", type=int, default=0, help="seed for isomorphism search (default 0)")
    sub = p.add_subparsers(dest="cmd", required=True)

    v = sub.add_parser("validate", help="run the validator for the document's kind")
    v.add_argument("file")
    v.set_defaults(run=cmd_validate)

    h = sub.add_parser("cohom", help="print cohomology tables of hom complexes")
    h.add_argument("cat")
    h.add_argument("--src")
    h.add_argument("--dst")
    h.set_defaults(run=cmd_cohom)

    g = sub.add_parser("glue", help="glue two categories along functors into a common target")
    g.add_argument("A")
    g.add_argument("B")
    g.add_argument("--f1", required=True)
    g.add_argument("--f2", required=True)
    g.add_argument("--objects", required=True, help="'a,b,mu;...' with _ for zero")
    g.add_argument("--name", default="glued")
    g.add_argument("-o")
    g.set_defaults(run=cmd_glue)

    d = sub.add_parser("directed", help="directed category on an ordered object list")
    d.add_argument("cat")
    d.add_argument("--objects", required=True)
    d.add_argument("--name", default="directed")
    d.add_argument("-o")
    d.set_defaults(run=cmd_directed)

    t = sub.add_parser("tw", help="twisted complexes")
    ts = t.add_subparsers(dest="tw_cmd", required=True)
    tc = ts.add_parser("cone")
    tc.add_argument("cat")
    tc.add_argument("--morphism", required=True, help="X->Y:terms, e.g. S->S[2]:eps")
    tc.add_argument("-o")
    tk = ts.add_parser("check")
    tk.add_argument("file")
    t.set_defaults(run=cmd_tw)

    hl = sub.add_parser("holim", help="homotopy equalizers, fiber products, isomorphisms")
    hs = hl.add_subparsers(dest="holim_cmd", required=True)
    for nm in ("equalizer", "fiber"):
        q = hs.add_parser(nm)
        q.add_argument("--f1", required=True)
        q.add_argument("--f2", required=True)
        q.add_argument("--objects", required=True,
                       help="'a,mu;...' (equalizer) or 'a,b,mu;...' (fiber)")
        q.add_argument("--name", default=nm)
        q.add_argument("-o")
    qi = hs.add_parser("iso")
    qi.add_argument("cat")
    qi.add_argument("--x", required=True)
    qi.add_argument("--y", required=True)
    hl.set_defaults(run=cmd_holim)

    s = sub.add_parser("schober", help="perverse schober operations")
    ss = s.add_subparsers(dest="schober_cmd", required=True)
    for nm in ("validate", "sections", "monodromy", "mutate", "boundary"):
        q = ss.add_parser(nm)
        q.add_argument("file")
        if nm == "monodromy":
            q.add_argument("--cycle")
        if nm == "mutate":
            q.add_argument("--index", required=True, help="braid word, e.g. 1 or 1,2,1")
            q.add_argument("--against", help="second braid word to compare with")
            q.add_argument("-o")
    s.set_defaults(run=cmd_schober)

    o = sub.add_parser("oracle", help="cross-check suites")
    os_ = o.add_subparsers(dest="oracle_cmd", required=True)
    for nm in ("directed-vs-glued", "glsect", "segal"):
        q = os_.add_parser(nm)
        q.add_argument("file")
        if nm != "glsect":
            q.add_argument("--objects")
        if nm == "segal":
            q.add_argument("--shift", type=int, default=0, help="use x |-> x[n] as the autoequivalence")
    o.set_defaults(run=cmd_oracle)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    holim.SEARCH_SEED = args.seed
    try:
        return args.run(args)
    except (OSError, ParseError, SchemaVersionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (MathFailure, BadIndex, BadCycle, UnsupportedSkeleton, UnsupportedGeneralFunctor,
            holim.BadCertificate) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
