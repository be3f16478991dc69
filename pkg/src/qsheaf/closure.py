"""Quasi-coherent closure of prescribed sections inside an ambient sheaf.

Given finitely many elements of the vertex modules of a quasi-coherent
representation, the closure produces a sub-representation whose per-vertex
spans contain them and which is itself quasi-coherent.  The engine walks the
generating edges round-robin; along each edge every current generator of the
far module is pulled back by solving a membership problem over the localized
ring and splitting each solution coefficient into an invertible monomial
(which stays on the localized side) and a polynomial part that descends to
the near chart.  Stabilization is detected by span equality over a full
cycle, after which the induced sub-representation is re-verified.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .charts import FPModule, ideal_block, span_contains, span_gb
from .exactpoly import (
    Poly,
    TrackedBasis,
    module_kernel,
    vec_add,
    vec_is_zero,
    vec_mul_poly,
)
from .sheafrep import (
    QCReport,
    SheafMap,
    SheafRep,
    fmt_edge,
    fmt_vertex,
    is_quasi_coherent,
    mat_apply,
)


@dataclass(frozen=True)
class SectionSet:
    """Finite lists of module elements, keyed by vertex."""

    entries: dict

    def at(self, v):
        return self.entries.get(frozenset(v), ())


def make_section_set(rep: SheafRep, mapping) -> SectionSet:
    entries = {}
    for v, vecs in mapping.items():
        key = frozenset(v)
        if key not in rep.modules:
            raise ValueError("no vertex " + fmt_vertex(key))
        mod = rep.modules[key]
        ring = rep.quiver.chart(key).ring
        fixed = []
        for vec in vecs:
            vec = tuple(vec)
            if len(vec) != mod.gens:
                raise ValueError(
                    "section at " + fmt_vertex(key) + " has wrong width"
                )
            for p in vec:
                if p.ring is not ring:
                    raise ValueError(
                        "section at " + fmt_vertex(key) + " lives in a foreign ring"
                    )
            fixed.append(vec)
        entries[key] = tuple(fixed)
    return SectionSet(entries)


@dataclass(frozen=True)
class WitnessPart:
    """One summand of a pulled-back section: element `preimage` of the near
    module, pushed across the edge and rescaled by `unit` times the inverse
    `power` of the newly inverted coordinate product."""

    index: int
    unit: Poly
    power: int
    preimage: tuple


@dataclass(frozen=True)
class ClosureWitness:
    edge: tuple
    element: tuple
    parts: tuple


class SubRep:
    """Generator lists for a sub-representation of an ambient sheaf.

    Spans are always taken modulo the ambient relations, so membership means
    membership in the generated submodule of the ambient vertex module.
    """

    def __init__(self, ambient: SheafRep, seed: Optional[SectionSet] = None):
        self.ambient = ambient
        self.seed = seed if seed is not None else SectionSet({})
        self.sections = {v: [] for v in ambient.quiver.vertices}
        self._gb = {}

    def span(self, v):
        v = frozenset(v)
        if v not in self._gb:
            chart = self.ambient.quiver.chart(v)
            mod = self.ambient.modules[v]
            rows = list(self.sections[v]) + list(mod.relations)
            self._gb[v] = span_gb(chart, rows, mod.gens)
        return self._gb[v]

    def contains(self, v, vec) -> bool:
        v = frozenset(v)
        chart = self.ambient.quiver.chart(v)
        return span_contains(chart, self.span(v), vec)

    def add(self, v, vec) -> bool:
        """Append a generator unless it is already in the span; reports
        whether the span grew."""
        v = frozenset(v)
        if vec_is_zero(vec) or self.contains(v, vec):
            return False
        self.sections[v].append(tuple(vec))
        self._gb.pop(v, None)
        return True

    def generator_lists(self) -> dict:
        return {v: tuple(rows) for v, rows in self.sections.items()}


def denominator_vector(v, w, pivot: int, n: int) -> tuple:
    """Laurent exponent of the product of x_k / x_pivot over k in w - v."""
    vec = [0] * (n + 1)
    for k in sorted(frozenset(w) - frozenset(v)):
        vec[k] += 1
        vec[pivot] -= 1
    return tuple(vec)


def _edge_lifter(rep: SheafRep, edge) -> TrackedBasis:
    v, w = edge
    chart = rep.quiver.chart(w)
    tgt = rep.modules[w]
    rows = (
        list(rep.edge_maps[edge])
        + list(tgt.relations)
        + ideal_block(chart, tgt.gens)
    )
    return TrackedBasis(rows, chart.ring, tgt.gens)


def pullback_witness(rep: SheafRep, edge, element, lifter=None) -> ClosureWitness:
    """Express `element` of M(w) over the image of M(v) along the edge.

    The membership solution has coefficients in the localized chart; each
    one factors as (invertible monomial) * (descendable part), and the
    descendable part comes down to the near chart after clearing the minimal
    power of the coordinates inverted by the edge.
    """
    v, w = edge
    chart_v = rep.quiver.chart(v)
    chart_w = rep.quiver.chart(w)
    src = rep.modules[v]
    if lifter is None:
        lifter = _edge_lifter(rep, edge)
    coeffs = lifter.lift(tuple(element))
    if coeffs is None:
        raise RuntimeError(
            "ambient representation is inconsistent along edge "
            + fmt_edge(edge)
            + ": section has no preimage"
        )
    unit_cols = chart_w.unit_variable_columns()
    svec = denominator_vector(v, w, chart_v.pivot, rep.quiver.n)
    parts = []
    for i in range(src.gens):
        c = chart_w.nf(coeffs[i])
        if c.is_zero():
            continue
        exps = list(c.terms.keys())
        content = [0] * chart_w.ring.nvars
        for col in unit_cols:
            content[col] = min(e[col] for e in exps)
        unit = chart_w.ring.monomial(tuple(content))
        rest = chart_w.ring.from_terms(
            {
                tuple(ej - cj for ej, cj in zip(e, content)): coeff
                for e, coeff in c.terms.items()
            }
        )
        laurent = chart_w.to_laurent(rest)
        power = 0
        for vec in laurent:
            for k in frozenset(w) - frozenset(v):
                if vec[k] < 0:
                    power = max(power, -vec[k])
        shifted = {
            tuple(a + power * s for a, s in zip(vec, svec)): coeff
            for vec, coeff in laurent.items()
        }
        descended = chart_v.from_laurent(shifted)
        preimage = [chart_v.ring.zero()] * src.gens
        preimage[i] = descended
        parts.append(WitnessPart(i, unit, power, tuple(preimage)))
    return ClosureWitness((frozenset(v), frozenset(w)), tuple(element), tuple(parts))


def verify_witness(rep: SheafRep, witness: ClosureWitness) -> bool:
    """Check the defining identity of a pullback witness exactly."""
    v, w = witness.edge
    chart_v = rep.quiver.chart(v)
    chart_w = rep.quiver.chart(w)
    hom = rep.quiver.hom(v, w)
    tgt = rep.modules[w]
    rows = rep.edge_maps[witness.edge]
    svec = denominator_vector(v, w, chart_v.pivot, rep.quiver.n)
    total = tuple(chart_w.ring.zero() for _ in range(tgt.gens))
    for part in witness.parts:
        pushed = mat_apply(hom.apply_vec(part.preimage), rows, chart_w.ring, tgt.gens)
        inv = chart_w.monomial_from_laurent(
            tuple(-part.power * s for s in svec)
        )
        scale = chart_w.nf(part.unit * inv)
        total = vec_add(total, vec_mul_poly(pushed, scale))
    diff = tuple(a - b for a, b in zip(witness.element, total))
    return span_contains(chart_w, tgt.relation_gb(), diff)


def edge_closure(rep: SheafRep, edge, xv, xw):
    """Single-edge closure: returns generator lists (gv, gw) and the pullback
    witnesses, with span(gw) equal to the localized span of the image of gv
    and both input lists contained in the respective outputs."""
    v, w = edge
    hom = rep.quiver.hom(v, w)
    chart_w = rep.quiver.chart(w)
    tgt = rep.modules[w]
    rows = rep.edge_maps[(frozenset(v), frozenset(w))]
    lifter = _edge_lifter(rep, (frozenset(v), frozenset(w)))
    gv = [tuple(x) for x in xv]
    witnesses = []
    for t in xw:
        wit = pullback_witness(rep, (frozenset(v), frozenset(w)), t, lifter)
        witnesses.append(wit)
        for part in wit.parts:
            gv.append(part.preimage)
    gw = [tuple(t) for t in xw]
    for y in gv:
        gw.append(mat_apply(hom.apply_vec(y), rows, chart_w.ring, tgt.gens))
    return gv, gw, witnesses


@dataclass(frozen=True)
class ClosureResult:
    sub: SubRep
    witnesses: tuple
    cycles: int
    stabilized: bool
    trace: tuple
    report: Optional[QCReport]


def qc_closure(
    ambient: SheafRep,
    seed: SectionSet,
    max_cycles: int = 12,
    check_ambient: bool = True,
) -> ClosureResult:
    """Round-robin closure over the generating edges with a cycle budget.

    Each cycle pulls back every not-yet-processed generator along every edge
    and pushes every generator forward along every edge (in ascending vertex
    order, so one sweep propagates fully).  A cycle that adds nothing means
    the spans are stable; the induced sub-representation is then re-verified
    before the result is returned as stabilized.
    """
    if max_cycles <= 0:
        raise ValueError("max_cycles must be positive")
    if check_ambient and not is_quasi_coherent(ambient).ok:
        raise ValueError("ambient representation is not quasi-coherent")
    quiver = ambient.quiver
    sub = SubRep(ambient, seed)
    for v in quiver.vertices:
        for x in seed.at(v):
            sub.add(v, x)
    lifters = {}
    pulled = {e: 0 for e in quiver.edges}
    pushed = {e: 0 for e in quiver.edges}
    witnesses = []
    trace = []
    stabilized = False
    cycles = 0
    for _cycle in range(max_cycles):
        cycles += 1
        added = {}
        for edge in quiver.edges:
            v, w = edge
            # pull back the far generators not seen by this edge yet
            while pulled[edge] < len(sub.sections[w]):
                t = sub.sections[w][pulled[edge]]
                pulled[edge] += 1
                if edge not in lifters:
                    lifters[edge] = _edge_lifter(ambient, edge)
                wit = pullback_witness(ambient, edge, t, lifters[edge])
                grew = False
                for part in wit.parts:
                    if sub.add(v, part.preimage):
                        grew = True
                        added[v] = added.get(v, 0) + 1
                if grew:
                    witnesses.append(wit)
            # push every unpushed generator along every edge, in order
            for e2 in quiver.edges:
                v2, w2 = e2
                hom = quiver.hom(v2, w2)
                chart = quiver.chart(w2)
                width = ambient.modules[w2].gens
                rows = ambient.edge_maps[e2]
                while pushed[e2] < len(sub.sections[v2]):
                    x = sub.sections[v2][pushed[e2]]
                    pushed[e2] += 1
                    img = mat_apply(hom.apply_vec(x), rows, chart.ring, width)
                    if sub.add(w2, img):
                        added[w2] = added.get(w2, 0) + 1
        trace.append(
            tuple(sorted((fmt_vertex(v), k) for v, k in added.items()))
        )
        if not added:
            stabilized = True
            break
    report = None
    if stabilized:
        rep, _incl = induced_rep(sub)
        report = is_quasi_coherent(rep)
        if not report.ok:
            raise RuntimeError(
                "stable spans failed coherence verification: "
                + "; ".join(report.findings)
            )
    return ClosureResult(
        sub, tuple(witnesses), cycles, stabilized, tuple(trace), report
    )


def induced_rep(sub: SubRep):
    """Presentation of the sub-representation by its generator lists, with
    the inclusion back into the ambient."""
    ambient = sub.ambient
    quiver = ambient.quiver
    mods = {}
    for v in quiver.vertices:
        chart = quiver.chart(v)
        amb = ambient.modules[v]
        rows = tuple(sub.sections[v])
        rel = tuple(
            module_kernel(
                list(rows),
                list(amb.relations) + ideal_block(chart, amb.gens),
                chart.ring,
                amb.gens,
            )
        )
        mods[v] = FPModule(chart, len(rows), rel)
    edge_maps = {}
    for edge in quiver.edges:
        v, w = edge
        hom = quiver.hom(v, w)
        chart = quiver.chart(w)
        amb_w = ambient.modules[w]
        basis = (
            list(sub.sections[w])
            + list(amb_w.relations)
            + ideal_block(chart, amb_w.gens)
        )
        tracked = TrackedBasis(basis, chart.ring, amb_w.gens)
        rows_vw = []
        for x in sub.sections[v]:
            img = mat_apply(
                hom.apply_vec(x), ambient.edge_maps[edge], chart.ring, amb_w.gens
            )
            coeffs = tracked.lift(img)
            if coeffs is None:
                raise ValueError(
                    "generators not closed under edge " + fmt_edge(edge)
                )
            rows_vw.append(tuple(coeffs[: len(sub.sections[w])]))
        edge_maps[edge] = tuple(rows_vw)
    rep = SheafRep(quiver, mods, edge_maps, None)
    incl = SheafMap(rep, ambient, {v: tuple(sub.sections[v]) for v in quiver.vertices})
    return rep, incl


@dataclass(frozen=True)
class SubRepReport:
    ok: bool
    seed_contained: bool
    edges_closed: bool
    qc: Optional[QCReport]
    findings: tuple


def verify_subrep(sub: SubRep) -> SubRepReport:
    """Re-check a sub-representation from scratch: seed containment, closure
    under the ambient edge maps, and coherence of the induced presentation."""
    ambient = sub.ambient
    quiver = ambient.quiver
    findings = []
    seed_ok = True
    for v in quiver.vertices:
        for x in sub.seed.at(v):
            if not sub.contains(v, x):
                seed_ok = False
                findings.append("seed element at " + fmt_vertex(v) + " not in span")
    closed = True
    for edge in quiver.edges:
        v, w = edge
        hom = quiver.hom(v, w)
        chart = quiver.chart(w)
        width = ambient.modules[w].gens
        rows = ambient.edge_maps[edge]
        for x in sub.sections[v]:
            img = mat_apply(hom.apply_vec(x), rows, chart.ring, width)
            if not sub.contains(w, img):
                closed = False
                findings.append(
                    "image of a generator not in span along " + fmt_edge(edge)
                )
                break
    qc = None
    if closed:
        rep, _incl = induced_rep(sub)
        qc = is_quasi_coherent(rep)
        findings.extend(qc.findings)
    ok = seed_ok and closed and qc is not None and qc.ok
    return SubRepReport(ok, seed_ok, closed, qc, tuple(findings))
