"""Chart coordinate rings on P^n and module localization between them.

A chart is indexed by a nonempty subset v of {0..n} and describes the locus
where every x_i, i in v, is invertible.  Its ring is presented over the
coefficient field with variables z_j = x_j/x_pivot for j != pivot and
u_i = (x_i/x_pivot)^(-1) for i in v minus the pivot, where pivot = min(v),
subject to u_i*z_i - 1 and the dehomogenized subscheme ideal.  Every chart
monomial therefore corresponds to a Laurent monomial in x_0..x_n of total
degree zero; that correspondence drives pivot changes and denominator
clearing elsewhere in the package.
"""

from __future__ import annotations

from typing import Iterable, Sequence

from .exactpoly import (
    DimensionMismatchError,
    Field,
    Poly,
    PolyRing,
    PresIdeal,
    RingMismatchError,
    groebner_basis,
    ideal_contains_one,
    normal_form,
    poly_to_str,
    vec_is_zero,
)


def x_ring(field: Field, n: int) -> PolyRing:
    """Homogeneous coordinate ring presentation: variables x0..xn."""
    return PolyRing(field, tuple(f"x{i}" for i in range(n + 1)))


def is_homogeneous(p: Poly) -> bool:
    degs = {sum(e) for e in p.terms}
    return len(degs) <= 1


class ChartRing:
    """Coordinate ring of one chart, presented with explicit inverses."""

    def __init__(self, field: Field, n: int, vertex: frozenset, ideal_gens: Sequence[Poly]):
        if not vertex or not vertex <= set(range(n + 1)):
            raise ValueError("vertex must be a nonempty subset of {0..n}")
        self.field = field
        self.n = n
        self.vertex = frozenset(vertex)
        self.pivot = min(vertex)
        self.ideal_gens = tuple(ideal_gens)
        for g in self.ideal_gens:
            if not is_homogeneous(g):
                raise ValueError(f"ideal generator not homogeneous: {poly_to_str(g)}")
        zs = [j for j in range(n + 1) if j != self.pivot]
        us = sorted(self.vertex - {self.pivot})
        self._z_index = {j: k for k, j in enumerate(zs)}
        self._u_index = {i: len(zs) + k for k, i in enumerate(us)}
        names = tuple(f"z{j}" for j in zs) + tuple(f"u{i}" for i in us)
        self.ring = PolyRing(field, names)
        inversions = []
        for i in us:
            inversions.append(self.u(i) * self.z(i) - self.ring.one())
        self.inversions = tuple(inversions)
        self.jays = tuple(self.dehomogenize(g) for g in self.ideal_gens)
        self.relations = self.inversions + tuple(g for g in self.jays if not g.is_zero())
        self._rel_gb = None
        self._zero_ring = None
        # Laurent exponent of each ring variable, length n+1, total degree 0
        lv = []
        for j in zs:
            vec = [0] * (n + 1)
            vec[j], vec[self.pivot] = 1, vec[self.pivot] - 1
            lv.append(tuple(vec))
        for i in us:
            vec = [0] * (n + 1)
            vec[self.pivot], vec[i] = vec[self.pivot] + 1, -1
            lv.append(tuple(vec))
        self._var_laurent = tuple(lv)

    # -- variables ---------------------------------------------------------

    def unit_variable_columns(self) -> tuple:
        """Columns of the variables invertible in this chart: every u_i and
        every z_i whose index lies in the vertex (its inverse u_i exists)."""
        cols = [col for j, col in self._z_index.items() if j in self.vertex]
        cols += list(self._u_index.values())
        return tuple(sorted(cols))

    def z(self, j: int) -> Poly:
        if j not in self._z_index:
            raise ValueError(f"no variable z{j} in chart {sorted(self.vertex)}")
        return self.ring.var(self._z_index[j])

    def u(self, i: int) -> Poly:
        if i not in self._u_index:
            raise ValueError(f"no variable u{i} in chart {sorted(self.vertex)}")
        return self.ring.var(self._u_index[i])

    # -- presentation ------------------------------------------------------

    def relation_gb(self) -> list:
        if self._rel_gb is None:
            self._rel_gb = groebner_basis([(q,) for q in self.relations], self.ring)
        return self._rel_gb

    def nf(self, p: Poly) -> Poly:
        """Canonical representative modulo the chart relations."""
        return normal_form((p,), self.relation_gb(), self.ring)[0]

    def is_zero_ring(self) -> bool:
        if self._zero_ring is None:
            self._zero_ring = ideal_contains_one(PresIdeal(self.ring, self.relations))
        return self._zero_ring

    def dehomogenize(self, g: Poly) -> Poly:
        """Substitute x_pivot = 1 and x_j = z_j into a homogeneous polynomial."""
        out = self.ring.zero()
        for e, c in g.terms.items():
            exp = [0] * self.ring.nvars
            for j, ej in enumerate(e):
                if j != self.pivot and ej:
                    exp[self._z_index[j]] = ej
            out = out + self.ring.monomial(tuple(exp), c)
        return out

    # -- Laurent bridge ------------------------------------------------------

    def laurent_of_exp(self, exp: Sequence[int]) -> tuple[int, ...]:
        vec = [0] * (self.n + 1)
        for k, ek in enumerate(exp):
            if ek:
                lv = self._var_laurent[k]
                for t in range(self.n + 1):
                    vec[t] += ek * lv[t]
        return tuple(vec)

    def to_laurent(self, p: Poly) -> dict:
        """Laurent expansion {degree-0 x-exponent vector: coefficient}."""
        out: dict = {}
        f = self.field
        for e, c in p.terms.items():
            vec = self.laurent_of_exp(e)
            s = f.add(out.get(vec, f.zero), c)
            if s == f.zero:
                out.pop(vec, None)
            else:
                out[vec] = s
        return out

    def monomial_from_laurent(self, vec: Sequence[int]) -> Poly:
        """Chart monomial with the given degree-0 Laurent exponent vector.

        Requires vec[j] >= 0 for every j outside the chart's vertex; raises
        ValueError when the monomial needs an inverse the chart lacks.
        """
        if len(vec) != self.n + 1 or sum(vec) != 0:
            raise ValueError("laurent exponent must have length n+1 and total degree 0")
        exp = [0] * self.ring.nvars
        for j, m in enumerate(vec):
            if j == self.pivot:
                continue
            if m >= 0:
                exp[self._z_index[j]] = m
            else:
                if j not in self._u_index:
                    raise ValueError(
                        f"x{j}^{m} not representable in chart {sorted(self.vertex)}"
                    )
                exp[self._u_index[j]] = -m
        return self.ring.monomial(tuple(exp))

    def from_laurent(self, terms: dict) -> Poly:
        out = self.ring.zero()
        for vec, c in terms.items():
            out = out + self.monomial_from_laurent(vec).scale(c)
        return out

    def __repr__(self):
        return f"ChartRing(v={''.join(str(i) for i in sorted(self.vertex))}, n={self.n})"


def make_chart_ring(field: Field, n: int, vertex: Iterable[int], ideal_gens: Sequence[Poly] = ()) -> ChartRing:
    """Chart ring for a vertex of the subset quiver on P^n (or a subscheme)."""
    return ChartRing(field, n, frozenset(vertex), ideal_gens)


class ChartHom:
    """Ring map between charts with source vertex contained in target vertex.

    Each source variable is a degree-0 ratio of homogeneous coordinates; its
    image is the unique chart monomial of the target with the same Laurent
    exponent.  Images are kept in normal form.
    """

    def __init__(self, source: ChartRing, target: ChartRing):
        if not source.vertex <= target.vertex:
            raise ValueError("source vertex must be a subset of the target vertex")
        if source.field != target.field or source.n != target.n:
            raise RingMismatchError("charts of different projective spaces")
        if source.ideal_gens != target.ideal_gens:
            raise RingMismatchError("charts of different subschemes")
        self.source = source
        self.target = target
        images = []
        for lv in source._var_laurent:
            images.append(target.nf(target.monomial_from_laurent(lv)))
        self.images = tuple(images)

    def apply(self, p: Poly) -> Poly:
        if p.ring != self.source.ring:
            raise RingMismatchError("polynomial not from the source chart")
        return self.target.nf(p.substitute(self.images))

    def apply_vec(self, vec: Sequence[Poly]) -> tuple:
        return tuple(self.apply(p) for p in vec)

    def apply_rows(self, rows: Sequence[Sequence[Poly]]) -> list:
        return [self.apply_vec(row) for row in rows]

    def __repr__(self):
        s = "".join(str(i) for i in sorted(self.source.vertex))
        t = "".join(str(i) for i in sorted(self.target.vertex))
        return f"ChartHom({s} -> {t})"


def chart_hom(source: ChartRing, target: ChartRing) -> ChartHom:
    return ChartHom(source, target)


def ideal_block(chart: ChartRing, rank: int) -> list:
    """Rows q*e_pos spanning I*F_rank for the chart's defining relations."""
    rows = []
    for q in chart.relations:
        for pos in range(rank):
            rows.append(tuple(q if k == pos else chart.ring.zero() for k in range(rank)))
    return rows


def span_gb(chart: ChartRing, rows: Sequence, rank: int) -> list:
    """Groebner basis of span(rows) + I*F_rank over the chart's ring."""
    return groebner_basis(list(rows) + ideal_block(chart, rank), chart.ring)


def span_contains(chart: ChartRing, gb: list, vec) -> bool:
    return vec_is_zero(normal_form(vec, gb, chart.ring))


class FPModule:
    """Finitely presented module over a chart ring.

    gens counts the generators; relations is a tuple of rows of that length.
    The module is the cokernel of the relation rows, always considered
    together with the chart ring's own defining relations.
    """

    def __init__(self, chart: ChartRing, gens: int, relations: Sequence[Sequence[Poly]] = ()):
        if gens < 0:
            raise ValueError("negative generator count")
        self.chart = chart
        self.gens = gens
        rel = []
        for row in relations:
            row = tuple(row)
            if len(row) != gens:
                raise DimensionMismatchError("relation row of wrong length")
            for entry in row:
                if entry.ring != chart.ring:
                    raise RingMismatchError("relation entry from the wrong chart")
            rel.append(row)
        self.relations = tuple(rel)
        self._gb = None

    def relation_gb(self) -> list:
        if self._gb is None:
            self._gb = span_gb(self.chart, self.relations, self.gens)
        return self._gb

    def nf(self, vec) -> tuple:
        if len(vec) != self.gens:
            raise DimensionMismatchError("element of wrong rank")
        return normal_form(tuple(vec), self.relation_gb(), self.chart.ring)

    def contains_in_relations(self, vec) -> bool:
        return vec_is_zero(self.nf(vec))

    def is_zero_module(self) -> bool:
        ring = self.chart.ring
        for pos in range(self.gens):
            e = tuple(ring.one() if k == pos else ring.zero() for k in range(self.gens))
            if not vec_is_zero(self.nf(e)):
                return False
        return True

    def __repr__(self):
        return f"FPModule(chart={self.chart!r}, gens={self.gens}, rels={len(self.relations)})"


def localize_module(module: FPModule, hom: ChartHom) -> FPModule:
    """Base change of a presentation along a chart inclusion.

    The localized module keeps the generator count and carries every relation
    row through the hom; the target chart's own relations join automatically.
    """
    if module.chart is not hom.source and module.chart.ring != hom.source.ring:
        raise RingMismatchError("module not over the hom's source chart")
    return FPModule(hom.target, module.gens, hom.apply_rows(module.relations))


def localize_map(rows: Sequence[Sequence[Poly]], hom: ChartHom) -> list:
    """Entrywise image of a matrix under a chart hom."""
    return hom.apply_rows(rows)
