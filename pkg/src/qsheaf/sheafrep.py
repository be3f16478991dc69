"""Quiver representations of quasi-coherent sheaves on projective space.

The quiver has one vertex per nonempty subset v of {0..n} (the chart where
the coordinates indexed by v are invertible) and a generating edge v -> w
whenever w = v + {k}.  A representation assigns a finitely presented module
over the chart ring to each vertex and a generator-image matrix to each
generating edge.  The representation presents a quasi-coherent sheaf exactly
when every edge map becomes an isomorphism after extending scalars, which is
decided here by exact Groebner spans.

Matrix convention throughout: row i of a map is the image of source
generator i, so vectors act on the left and composition is the usual
matrix product taken left to right.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .charts import (
    ChartHom,
    ChartRing,
    FPModule,
    chart_hom,
    ideal_block,
    is_homogeneous,
    make_chart_ring,
    span_contains,
    span_gb,
    x_ring,
)
from .exactpoly import (
    Field,
    Poly,
    PolyRing,
    TrackedBasis,
    module_kernel,
    vec_add,
    vec_is_zero,
    vec_mul_poly,
    vec_sub,
    vec_zero,
)

Vertex = frozenset
Edge = tuple


def vertex_key(v: Vertex):
    return (len(v), tuple(sorted(v)))


def fmt_vertex(v: Vertex) -> str:
    return "{" + ",".join(str(i) for i in sorted(v)) + "}"


def fmt_edge(e: Edge) -> str:
    return fmt_vertex(e[0]) + "->" + fmt_vertex(e[1])


def mat_apply(vec, rows, ring: PolyRing, width: int):
    """Left action of a row vector on a generator-image matrix."""
    out = vec_zero(ring, width)
    for coeff, row in zip(vec, rows):
        if not coeff.is_zero():
            out = vec_add(out, vec_mul_poly(row, coeff))
    return out


def mat_mul(a, b, ring: PolyRing, width: int):
    return tuple(mat_apply(row, b, ring, width) for row in a)


def mat_identity(ring: PolyRing, size: int):
    rows = []
    for i in range(size):
        row = [ring.zero()] * size
        row[i] = ring.one()
        rows.append(tuple(row))
    return tuple(rows)


class ProjQuiver:
    """Chart poset of P^n (or a closed subscheme) with cached ring data."""

    def __init__(self, fld: Field, n: int, ideal_gens=()):
        if n < 1 or n > 4:
            raise ValueError("ambient dimension must be between 1 and 4")
        self.field = fld
        self.n = n
        self.xring = x_ring(fld, n)
        gens = tuple(g for g in ideal_gens if not g.is_zero())
        for g in gens:
            if g.ring is not self.xring and g.ring.names != self.xring.names:
                raise ValueError("subscheme generators must live in the x ring")
            if not is_homogeneous(g):
                raise ValueError("subscheme generators must be homogeneous")
        self.ideal_gens = gens
        points = range(n + 1)
        verts = []
        for mask in range(1, 1 << (n + 1)):
            verts.append(frozenset(i for i in points if mask >> i & 1))
        self.vertices = tuple(sorted(verts, key=vertex_key))
        edges = []
        for v in self.vertices:
            for k in sorted(set(points) - v):
                edges.append((v, v | {k}))
        self.edges = tuple(sorted(edges, key=lambda e: (vertex_key(e[0]), vertex_key(e[1]))))
        self._charts = {}
        self._homs = {}

    def chart(self, v: Vertex) -> ChartRing:
        v = frozenset(v)
        if v not in self._charts:
            self._charts[v] = make_chart_ring(self.field, self.n, v, self.ideal_gens)
        return self._charts[v]

    def hom(self, v: Vertex, w: Vertex) -> ChartHom:
        key = (frozenset(v), frozenset(w))
        if key not in self._homs:
            self._homs[key] = chart_hom(self.chart(key[0]), self.chart(key[1]))
        return self._homs[key]


def build_proj_quiver(fld: Field, n: int, ideal_gens=()) -> ProjQuiver:
    return ProjQuiver(fld, n, ideal_gens)


@dataclass(frozen=True)
class GradedData:
    """Graded presentation a representation was sheafified from."""

    degrees: tuple
    rows: tuple


@dataclass(frozen=True)
class SheafRep:
    quiver: ProjQuiver
    modules: dict
    edge_maps: dict
    graded: Optional[GradedData] = None

    def module(self, v) -> FPModule:
        return self.modules[frozenset(v)]

    def edge(self, v, w):
        return self.edge_maps[(frozenset(v), frozenset(w))]

    def replaced_edge(self, edge, rows) -> "SheafRep":
        key = (frozenset(edge[0]), frozenset(edge[1]))
        if key not in self.edge_maps:
            raise KeyError(fmt_edge(key))
        new_maps = dict(self.edge_maps)
        new_maps[key] = tuple(tuple(r) for r in rows)
        return SheafRep(self.quiver, self.modules, new_maps, None)

    def replaced_module(self, v, module: FPModule) -> "SheafRep":
        new_mods = dict(self.modules)
        new_mods[frozenset(v)] = module
        return SheafRep(self.quiver, new_mods, self.edge_maps, None)


def make_sheaf_rep(quiver: ProjQuiver, modules, edge_maps, graded=None) -> SheafRep:
    """Assemble a representation, validating shapes and ring membership."""
    mods = {}
    for v in quiver.vertices:
        if v not in modules:
            raise ValueError("missing module at vertex " + fmt_vertex(v))
        m = modules[v]
        if m.chart is not quiver.chart(v):
            raise ValueError("module at " + fmt_vertex(v) + " built over a foreign chart")
        mods[v] = m
    maps = {}
    for e in quiver.edges:
        if e not in edge_maps:
            raise ValueError("missing edge map " + fmt_edge(e))
        rows = tuple(tuple(r) for r in edge_maps[e])
        src, tgt = mods[e[0]], mods[e[1]]
        if len(rows) != src.gens:
            raise ValueError("edge " + fmt_edge(e) + ": expected " + str(src.gens) + " rows")
        ring = quiver.chart(e[1]).ring
        for row in rows:
            if len(row) != tgt.gens:
                raise ValueError("edge " + fmt_edge(e) + ": expected " + str(tgt.gens) + " columns")
            for p in row:
                if p.ring is not ring:
                    raise ValueError("edge " + fmt_edge(e) + ": entry in wrong ring")
        maps[e] = rows
    return SheafRep(quiver, mods, maps, graded)


def graded_sheaf(quiver: ProjQuiver, degrees, rows=()) -> SheafRep:
    """Sheafify coker(relations) of a free graded module with the given
    generator twists: generator j of degree d_j corresponds on a chart with
    pivot p to the section e_j / x_p^{d_j}."""
    degrees = tuple(int(d) for d in degrees)
    xr = quiver.xring
    frozen_rows = []
    for row in rows:
        row = tuple(row)
        if len(row) != len(degrees):
            raise ValueError("relation row width does not match generator count")
        total = None
        for g, d in zip(row, degrees):
            if g.is_zero():
                continue
            if not is_homogeneous(g):
                raise ValueError("relation entries must be homogeneous")
            here = g.degree() + d
            if total is None:
                total = here
            elif total != here:
                raise ValueError("relation row is not homogeneous for the given degrees")
        frozen_rows.append(row)
    modules = {}
    for v in quiver.vertices:
        chart = quiver.chart(v)
        rel = tuple(tuple(chart.dehomogenize(g) for g in row) for row in frozen_rows)
        modules[v] = FPModule(chart, len(degrees), rel)
    edge_maps = {}
    for (v, w) in quiver.edges:
        chart = quiver.chart(w)
        p, q = min(v), min(w)
        rows_vw = []
        for j, d in enumerate(degrees):
            row = [chart.ring.zero()] * len(degrees)
            if p == q or d == 0:
                entry = chart.ring.one()
            elif d > 0:
                entry = chart.u(p) ** d
            else:
                entry = chart.z(p) ** (-d)
            row[j] = entry
            rows_vw.append(tuple(row))
        edge_maps[(v, w)] = tuple(rows_vw)
    return SheafRep(quiver, modules, edge_maps, GradedData(degrees, tuple(frozen_rows)))


def structure_sheaf(quiver: ProjQuiver) -> SheafRep:
    return graded_sheaf(quiver, (0,))


def twist(quiver: ProjQuiver, k: int) -> SheafRep:
    """Line bundle O(k): the graded module with one generator of degree -k."""
    return graded_sheaf(quiver, (-k,))


@dataclass(frozen=True)
class EdgeVerdict:
    edge: Edge
    well_defined: bool
    surjective: bool
    injective: bool

    @property
    def ok(self) -> bool:
        return self.well_defined and self.surjective and self.injective


@dataclass(frozen=True)
class QCReport:
    ok: bool
    edges: tuple
    squares_ok: bool
    findings: tuple

    def edge_verdict(self, edge) -> EdgeVerdict:
        key = (frozenset(edge[0]), frozenset(edge[1]))
        for ev in self.edges:
            if ev.edge == key:
                return ev
        raise KeyError(fmt_edge(key))


def _edge_verdict(rep: SheafRep, e: Edge) -> EdgeVerdict:
    v, w = e
    hom = rep.quiver.hom(v, w)
    src, tgt = rep.modules[v], rep.modules[w]
    chart = rep.quiver.chart(w)
    rows = rep.edge_maps[e]
    loc_rel = tuple(hom.apply_vec(r) for r in src.relations)
    tgt_gb = tgt.relation_gb()
    well = all(
        span_contains(chart, tgt_gb, mat_apply(r, rows, chart.ring, tgt.gens))
        for r in loc_rel
    )
    image_gb = span_gb(chart, list(rows) + list(tgt.relations), tgt.gens)
    surj = all(
        span_contains(chart, image_gb, _unit(chart.ring, tgt.gens, j))
        for j in range(tgt.gens)
    )
    ker = module_kernel(
        list(rows),
        list(tgt.relations) + ideal_block(chart, tgt.gens),
        chart.ring,
        tgt.gens,
    )
    src_gb = span_gb(chart, loc_rel, src.gens)
    inj = all(span_contains(chart, src_gb, k) for k in ker)
    return EdgeVerdict(e, well, surj, inj)


def _unit(ring: PolyRing, width: int, j: int):
    row = [ring.zero()] * width
    row[j] = ring.one()
    return tuple(row)


def _squares_agree(rep: SheafRep) -> tuple:
    """Composites of generating edges around each square, compared modulo
    the target relation span."""
    findings = []
    points = set(range(rep.quiver.n + 1))
    for v in rep.quiver.vertices:
        extra = sorted(points - v)
        for a_i in range(len(extra)):
            for b_i in range(a_i + 1, len(extra)):
                k, l = extra[a_i], extra[b_i]
                w = v | {k, l}
                chart = rep.quiver.chart(w)
                tgt = rep.modules[w]
                gb = tgt.relation_gb()
                comps = []
                for mid in (v | {k}, v | {l}):
                    a_rows = rep.edge_maps[(v, mid)]
                    hom = rep.quiver.hom(mid, w)
                    a_loc = tuple(hom.apply_vec(r) for r in a_rows)
                    b_rows = rep.edge_maps[(mid, w)]
                    comps.append(mat_mul(a_loc, b_rows, chart.ring, tgt.gens))
                for r1, r2 in zip(comps[0], comps[1]):
                    if not span_contains(chart, gb, vec_sub(r1, r2)):
                        findings.append(
                            "square at "
                            + fmt_vertex(v)
                            + " adding {"
                            + str(k)
                            + ","
                            + str(l)
                            + "}: path composites disagree"
                        )
                        break
    return tuple(findings)


def is_quasi_coherent(rep: SheafRep) -> QCReport:
    verdicts = []
    findings = []
    for e in rep.quiver.edges:
        ev = _edge_verdict(rep, e)
        verdicts.append(ev)
        if not ev.well_defined:
            findings.append("edge " + fmt_edge(e) + ": relations not preserved")
        if not ev.surjective:
            findings.append("edge " + fmt_edge(e) + ": extension of scalars not surjective")
        if not ev.injective:
            findings.append("edge " + fmt_edge(e) + ": extension of scalars not injective")
    square_findings = _squares_agree(rep)
    findings.extend(square_findings)
    ok = all(ev.ok for ev in verdicts) and not square_findings
    return QCReport(ok, tuple(verdicts), not square_findings, tuple(findings))


@dataclass(frozen=True)
class SheafMap:
    source: SheafRep
    target: SheafRep
    rows: dict

    def vertex_rows(self, v):
        return self.rows[frozenset(v)]


def make_sheaf_map(source: SheafRep, target: SheafRep, rows) -> SheafMap:
    if source.quiver is not target.quiver:
        raise ValueError("map endpoints live on different quivers")
    fixed = {}
    for v in source.quiver.vertices:
        if v not in rows:
            raise ValueError("missing map rows at vertex " + fmt_vertex(v))
        mat = tuple(tuple(r) for r in rows[v])
        if len(mat) != source.modules[v].gens:
            raise ValueError("map at " + fmt_vertex(v) + ": wrong row count")
        for row in mat:
            if len(row) != target.modules[v].gens:
                raise ValueError("map at " + fmt_vertex(v) + ": wrong column count")
        fixed[v] = mat
    return SheafMap(source, target, fixed)


def identity_map(rep: SheafRep) -> SheafMap:
    rows = {
        v: mat_identity(rep.quiver.chart(v).ring, rep.modules[v].gens)
        for v in rep.quiver.vertices
    }
    return SheafMap(rep, rep, rows)


def map_commutes(f: SheafMap) -> tuple:
    """Edges where the map fails to intertwine the two representations."""
    bad = []
    for (v, w) in f.source.quiver.edges:
        hom = f.source.quiver.hom(v, w)
        chart = f.source.quiver.chart(w)
        tgt = f.target.modules[w]
        gb = tgt.relation_gb()
        left = mat_mul(
            tuple(hom.apply_vec(r) for r in f.rows[v]),
            f.target.edge_maps[(v, w)],
            chart.ring,
            tgt.gens,
        )
        right = mat_mul(f.source.edge_maps[(v, w)], f.rows[w], chart.ring, tgt.gens)
        for r1, r2 in zip(left, right):
            if not span_contains(chart, gb, vec_sub(r1, r2)):
                bad.append((v, w))
                break
    return tuple(bad)


def map_is_well_defined(f: SheafMap) -> bool:
    for v in f.source.quiver.vertices:
        chart = f.source.quiver.chart(v)
        tgt = f.target.modules[v]
        gb = tgt.relation_gb()
        for rel in f.source.modules[v].relations:
            img = mat_apply(rel, f.rows[v], chart.ring, tgt.gens)
            if not span_contains(chart, gb, img):
                return False
    return True


def map_is_surjective(f: SheafMap) -> bool:
    for v in f.source.quiver.vertices:
        chart = f.source.quiver.chart(v)
        tgt = f.target.modules[v]
        gb = span_gb(chart, list(f.rows[v]) + list(tgt.relations), tgt.gens)
        for j in range(tgt.gens):
            if not span_contains(chart, gb, _unit(chart.ring, tgt.gens, j)):
                return False
    return True


def map_is_injective(f: SheafMap) -> bool:
    for v in f.source.quiver.vertices:
        chart = f.source.quiver.chart(v)
        src, tgt = f.source.modules[v], f.target.modules[v]
        ker = module_kernel(
            list(f.rows[v]),
            list(tgt.relations) + ideal_block(chart, tgt.gens),
            chart.ring,
            tgt.gens,
        )
        gb = src.relation_gb()
        for k in ker:
            if not span_contains(chart, gb, k):
                return False
    return True


def map_is_iso(f: SheafMap) -> bool:
    return map_is_surjective(f) and map_is_injective(f)


def rep_is_zero(rep: SheafRep) -> bool:
    return all(rep.modules[v].is_zero_module() for v in rep.quiver.vertices)


def _chart_nonzero_rows(chart, rows):
    """Entrywise chart normal forms, dropping rows that are zero in the
    quotient ring (they present the zero element, or a relation already
    implied by the chart's own defining ideal)."""
    out = []
    for row in rows:
        nf_row = tuple(chart.nf(e) for e in row)
        if not vec_is_zero(nf_row):
            out.append(nf_row)
    return tuple(out)


def _prune_generators(chart, rows, ambient_rel, width):
    """Drop generators lying in the span of the remaining ones (modulo the
    ambient relations), keeping the earliest representatives."""
    rows = list(rows)
    changed = True
    while changed:
        changed = False
        for i in range(len(rows) - 1, -1, -1):
            others = rows[:i] + rows[i + 1 :]
            gb = span_gb(chart, others + list(ambient_rel), width)
            if span_contains(chart, gb, rows[i]):
                rows.pop(i)
                changed = True
                break
    return tuple(rows)


def kernel(f: SheafMap):
    """Kernel representation with its inclusion into the source.

    Vertexwise the kernel generators are a generating set of solutions of
    c . f = 0 modulo target relations; edge maps are produced by lifting
    pushed-forward kernel generators over the kernel generators at the far
    vertex, which succeeds whenever the map intertwines the edges."""
    quiver = f.source.quiver
    ker_rows = {}
    ker_mods = {}
    for v in quiver.vertices:
        chart = quiver.chart(v)
        src, tgt = f.source.modules[v], f.target.modules[v]
        rows = _chart_nonzero_rows(
            chart,
            module_kernel(
                list(f.rows[v]),
                list(tgt.relations) + ideal_block(chart, tgt.gens),
                chart.ring,
                tgt.gens,
            ),
        )
        rows = _prune_generators(chart, rows, src.relations, src.gens)
        rel = _chart_nonzero_rows(
            chart,
            module_kernel(
                list(rows),
                list(src.relations) + ideal_block(chart, src.gens),
                chart.ring,
                src.gens,
            ),
        )
        ker_rows[v] = rows
        ker_mods[v] = FPModule(chart, len(rows), rel)
    edge_maps = {}
    for (v, w) in quiver.edges:
        hom = quiver.hom(v, w)
        chart = quiver.chart(w)
        src_w = f.source.modules[w]
        basis_rows = (
            list(ker_rows[w])
            + list(src_w.relations)
            + ideal_block(chart, src_w.gens)
        )
        tracked = TrackedBasis(basis_rows, chart.ring, src_w.gens)
        rows_vw = []
        for kv in ker_rows[v]:
            pushed = mat_apply(
                hom.apply_vec(kv), f.source.edge_maps[(v, w)], chart.ring, src_w.gens
            )
            coeffs = tracked.lift(pushed)
            if coeffs is None:
                raise ValueError(
                    "kernel not closed under edge " + fmt_edge((v, w))
                )
            rows_vw.append(tuple(coeffs[: len(ker_rows[w])]))
        edge_maps[(v, w)] = tuple(rows_vw)
    ker_rep = SheafRep(quiver, ker_mods, edge_maps, None)
    incl = SheafMap(ker_rep, f.source, {v: ker_rows[v] for v in quiver.vertices})
    return ker_rep, incl


def cokernel(f: SheafMap) -> SheafRep:
    """Quotient of the target by the image, presented by appending the image
    rows to the target relations."""
    quiver = f.target.quiver
    mods = {}
    for v in quiver.vertices:
        tgt = f.target.modules[v]
        rel = tuple(tgt.relations) + tuple(
            r for r in f.rows[v] if not vec_is_zero(r)
        )
        mods[v] = FPModule(tgt.chart, tgt.gens, rel)
    return SheafRep(quiver, mods, dict(f.target.edge_maps), None)


def direct_sum(a: SheafRep, b: SheafRep) -> SheafRep:
    if a.quiver is not b.quiver:
        raise ValueError("summands live on different quivers")
    quiver = a.quiver
    mods = {}
    maps = {}
    for v in quiver.vertices:
        chart = quiver.chart(v)
        ma, mb = a.modules[v], b.modules[v]
        rel = [r + vec_zero(chart.ring, mb.gens) for r in ma.relations]
        rel += [vec_zero(chart.ring, ma.gens) + r for r in mb.relations]
        mods[v] = FPModule(chart, ma.gens + mb.gens, tuple(rel))
    for e in quiver.edges:
        chart = quiver.chart(e[1])
        ra, rb = a.edge_maps[e], b.edge_maps[e]
        wa = a.modules[e[1]].gens
        wb = b.modules[e[1]].gens
        rows = [row + vec_zero(chart.ring, wb) for row in ra]
        rows += [vec_zero(chart.ring, wa) + row for row in rb]
        maps[e] = tuple(rows)
    graded = None
    if a.graded is not None and b.graded is not None:
        xr = quiver.xring
        wa, wb = len(a.graded.degrees), len(b.graded.degrees)
        rows = [row + vec_zero(xr, wb) for row in a.graded.rows]
        rows += [vec_zero(xr, wa) + row for row in b.graded.rows]
        graded = GradedData(a.graded.degrees + b.graded.degrees, tuple(rows))
    return SheafRep(quiver, mods, maps, graded)
