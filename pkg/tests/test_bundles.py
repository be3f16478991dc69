"""Projectivity certificates, covers, resolutions, and P^1 splitting.

Splitting types are cross-checked against an independent count of global
sections: a section is a pair of polynomial vectors over the two charts
matched by the transition matrix, and its dimension is found by plain
linear algebra over the coefficient field inside a finite degree window.
That count never looks at the factorization.
"""

import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from qsheaf.bundles import (
    BirkhoffSplit,
    LaurentPoly,
    birkhoff_split,
    bundle_from_transition,
    chart_to_laurent,
    fitting_ideals,
    global_sections_dim,
    h0_of_type,
    is_flat,
    is_projective_fp,
    is_vector_bundle,
    laurent_from_str,
    laurent_to_str,
    lazard_approximation,
    line_bundle_filtration,
    lmat_det,
    lmat_identity,
    lmat_inv,
    lmat_mul,
    serre_cover,
    transition_matrix,
    vdim_le_one_witness,
)
from qsheaf.charts import FPModule, chart_hom, localize_module, make_chart_ring
from qsheaf.closure import SubRep
from qsheaf.exactpoly import Field, poly_from_str
from qsheaf.sheafrep import (
    build_proj_quiver,
    cokernel,
    direct_sum,
    graded_sheaf,
    is_quasi_coherent,
    kernel,
    make_sheaf_map,
    map_commutes,
    map_is_injective,
    map_is_iso,
    map_is_surjective,
    rep_is_zero,
    structure_sheaf,
    twist,
)

Q = Field.rationals()
V0 = frozenset({0})
V1 = frozenset({1})
V01 = frozenset({0, 1})


def lp(text):
    return laurent_from_str(Q, text)


def lmat(rows):
    return tuple(tuple(lp(e) for e in row) for row in rows)


def p1():
    return build_proj_quiver(Q, 1)


def euler_cover_p1(quiver):
    """Two structure-sheaf generators mapping to the coordinate sections of
    the degree-one twist."""
    src = graded_sheaf(quiver, (0, 0))
    tgt = twist(quiver, 1)
    rows = {}
    for v in quiver.vertices:
        chart = quiver.chart(v)
        x0 = poly_from_str(quiver.xring, "x0")
        x1 = poly_from_str(quiver.xring, "x1")
        rows[v] = ((chart.dehomogenize(x0),), (chart.dehomogenize(x1),))
    f = make_sheaf_map(src, tgt, rows)
    assert map_commutes(f) == ()
    return f


def skyscraper_rep(quiver):
    """Structure sheaf of the point x0 = 0, presented by one generator of
    degree zero killed by x0."""
    x0 = poly_from_str(quiver.xring, "x0")
    return graded_sheaf(quiver, (0,), ((x0,),))


# ---------------------------------------------------------------------------
# Fitting ideals


def test_fitting_of_free_module():
    chart = make_chart_ring(Q, 2, {0})
    m = FPModule(chart, 2)
    fits = fitting_ideals(m)
    assert len(fits) == 3
    assert not fits[2].is_zero()
    assert fits[2].contains(chart.ring.one())
    assert fits[0].is_zero() and fits[1].is_zero()


def test_fitting_of_plane_ideal_module():
    # the module (x, y) in Q[x, y], presented by one relation (y, -x)
    chart = make_chart_ring(Q, 2, {0})
    x = chart.z(1)
    y = chart.z(2)
    m = FPModule(chart, 2, ((y, x.scale(Fraction(-1))),))
    fits = fitting_ideals(m)
    assert fits[0].is_zero()
    assert fits[1].contains(x) and fits[1].contains(y)
    for g in fits[1].gens:
        assert poly_in_ideal(g, (x, y), chart)
    assert fits[2].contains(chart.ring.one())


def poly_in_ideal(g, gens, chart):
    from qsheaf.exactpoly import PresIdeal

    return PresIdeal(chart.ring, tuple(gens) + chart.relations).contains(g)


def test_fitting_of_coordinate_quotient():
    # Q[z1]/(z1) as a module over the affine line chart
    chart = make_chart_ring(Q, 1, {0})
    z = chart.z(1)
    m = FPModule(chart, 1, ((z,),))
    fits = fitting_ideals(m)
    assert fits[0].contains(z) and not fits[0].contains(chart.ring.one())
    assert fits[1].contains(chart.ring.one())


def test_fitting_chain_is_increasing():
    chart = make_chart_ring(Q, 2, {0})
    x, y = chart.z(1), chart.z(2)
    mods = [
        FPModule(chart, 2, ((y, x.scale(Fraction(-1))),)),
        FPModule(chart, 2, ((x, y), (y, x))),
        FPModule(chart, 1, ((x * y,),)),
    ]
    for m in mods:
        fits = fitting_ideals(m)
        for i in range(len(fits) - 1):
            for g in fits[i].gens:
                assert fits[i + 1].contains(g)


def test_fitting_commutes_with_localization():
    quiver = p1()
    chart0 = quiver.chart(V0)
    chart01 = quiver.chart(V01)
    hom = chart_hom(chart0, chart01)
    z = chart0.z(1)
    rng = random.Random(20260819)
    samples = [
        FPModule(chart0, 1, ((z,),)),
        FPModule(chart0, 2, ((z, z * z),)),
        FPModule(chart0, 2),
    ]
    for m in samples:
        far = fitting_ideals(localize_module(m, hom))
        near = fitting_ideals(m)
        assert len(far) == len(near)
        for fn, ff in zip(near, far):
            for g in fn.gens:
                assert ff.contains(hom.apply(g))
    del rng


# ---------------------------------------------------------------------------
# Projectivity certificates


def test_free_module_is_projective():
    chart = make_chart_ring(Q, 2, {0})
    cert = is_projective_fp(FPModule(chart, 2))
    assert cert.projective and cert.rank == 2
    assert cert.verdict == "projective(2)"


def test_plane_ideal_module_is_not_projective():
    chart = make_chart_ring(Q, 2, {0})
    x, y = chart.z(1), chart.z(2)
    cert = is_projective_fp(FPModule(chart, 2, ((y, x.scale(Fraction(-1))),)))
    assert not cert.projective
    assert cert.violating_index == 1
    assert not cert.inconclusive


def test_unit_relation_gives_zero_module():
    chart = make_chart_ring(Q, 1, {0, 1})
    cert = is_projective_fp(FPModule(chart, 1, ((chart.z(1),),)))
    assert cert.projective and cert.rank == 0


def test_dropping_connectedness_reports_inconclusive():
    chart = make_chart_ring(Q, 2, {0})
    x, y = chart.z(1), chart.z(2)
    m = FPModule(chart, 2, ((y, x.scale(Fraction(-1))),))
    cert = is_projective_fp(m, assume_connected=False)
    assert not cert.projective
    assert cert.inconclusive
    assert cert.verdict == "inconclusive"


# ---------------------------------------------------------------------------
# Bundle and flatness reports


@pytest.mark.parametrize("k", [-2, -1, 0, 1, 2])
def test_twists_are_line_bundles(k):
    report = is_vector_bundle(twist(p1(), k))
    assert report.is_bundle and report.rank == 1


def test_binary_subscheme_structure_sheaf_is_bundle():
    x0x1 = poly_from_str(build_proj_quiver(Q, 1).xring, "x0*x1")
    quiver = build_proj_quiver(Q, 1, (x0x1,))
    report = is_vector_bundle(structure_sheaf(quiver))
    assert report.is_bundle and report.rank == 1


def test_skyscraper_is_not_a_bundle():
    quiver = p1()
    rep = skyscraper_rep(quiver)
    report = is_vector_bundle(rep)
    assert not report.is_bundle
    assert any("{1}" in f for f in report.findings)


def test_bundle_check_requires_quasi_coherence():
    quiver = p1()
    rep = twist(quiver, 1)
    chart01 = quiver.chart(V01)
    broken = rep.replaced_edge((V0, V01), ((chart01.ring.zero(),),))
    with pytest.raises(ValueError):
        is_vector_bundle(broken)


def test_flat_report():
    quiver = p1()
    assert is_flat(structure_sheaf(quiver)).flat
    report = is_flat(skyscraper_rep(quiver))
    assert not report.flat
    assert any("{1}" in f for f in report.findings)


# ---------------------------------------------------------------------------
# Serre covers


@pytest.mark.parametrize("k", [-1, 0, 2])
def test_cover_of_single_twist_is_iso(k):
    rep = twist(p1(), k)
    cover = serre_cover(rep)
    assert map_is_iso(cover)


def test_cover_of_twist_sum_is_iso():
    quiver = p1()
    rep = graded_sheaf(quiver, (0, -2))
    cover = serre_cover(rep)
    assert map_is_surjective(cover)
    assert map_is_iso(cover)


def test_cover_of_point_ideal_data():
    quiver = p1()
    x0 = poly_from_str(quiver.xring, "x0")
    x1 = poly_from_str(quiver.xring, "x1")
    rep = graded_sheaf(quiver, (1, 1), ((x1, x0.scale(Fraction(-1))),))
    cover = serre_cover(rep)
    assert map_is_surjective(cover)
    assert rep_is_zero(cokernel(cover))
    assert not map_is_injective(cover)


def test_cover_needs_graded_presentation():
    quiver = p1()
    rep = twist(quiver, 1)
    bare = rep.replaced_edge((V0, V01), rep.edge(V0, V01))
    assert bare.graded is None
    with pytest.raises(ValueError):
        serre_cover(bare)


# ---------------------------------------------------------------------------
# Two-term resolutions


def test_vdim_witness_for_twist_one():
    quiver = p1()
    cover = euler_cover_p1(quiver)
    witness = vdim_le_one_witness(cover.target, cover)
    assert witness.ok
    assert witness.exactness.cover_surjective
    assert witness.exactness.composite_zero
    assert witness.exactness.kernel_covered
    assert witness.exactness.inclusion_injective
    assert witness.kernel_bundle.is_bundle and witness.kernel_bundle.rank == 1
    assert witness.middle_bundle.is_bundle and witness.middle_bundle.rank == 2
    t = transition_matrix(witness.kernel_rep)
    assert len(t) == 1
    assert birkhoff_split(t).splitting_type == (-1,)


def test_vdim_witness_with_identity_cover():
    rep = graded_sheaf(p1(), (0, -2))
    witness = vdim_le_one_witness(rep, serre_cover(rep))
    assert witness.ok
    assert witness.kernel_bundle.rank == 0
    assert rep_is_zero(witness.kernel_rep)


def test_vdim_witness_for_skyscraper():
    quiver = p1()
    rep = skyscraper_rep(quiver)
    witness = vdim_le_one_witness(rep, serre_cover(rep))
    assert witness.ok
    assert witness.kernel_bundle.is_bundle and witness.kernel_bundle.rank == 1
    t = transition_matrix(witness.kernel_rep)
    assert birkhoff_split(t).splitting_type == (-1,)


def test_vdim_witness_rejects_non_surjective_cover():
    quiver = p1()
    rep = graded_sheaf(quiver, (0, -2))
    cover = serre_cover(rep)
    chart = quiver.chart(V0)
    rows = {v: cover.rows[v] for v in quiver.vertices}
    rows[V0] = (
        cover.rows[V0][0],
        (chart.ring.zero(), chart.ring.zero()),
    )
    bad = make_sheaf_map(cover.source, rep, rows)
    with pytest.raises(ValueError):
        vdim_le_one_witness(rep, bad)


# ---------------------------------------------------------------------------
# Finite flat approximations


def test_lazard_with_zero_sub_recovers_free_cover():
    rep = graded_sheaf(p1(), (0, 0))
    cover = serre_cover(rep)
    approx = lazard_approximation(rep, cover, SubRep(cover.source))
    assert approx.qc.ok
    assert approx.vdim.ok
    assert approx.is_iso
    assert approx.sub_bundle.is_bundle and approx.sub_bundle.rank == 0


def test_lazard_with_full_kernel_recovers_the_sheaf():
    quiver = p1()
    cover = euler_cover_p1(quiver)
    rep = cover.target
    ker_rep, incl = kernel(cover)
    sub = SubRep(cover.source)
    for v in quiver.vertices:
        for row in incl.rows[v]:
            sub.add(v, row)
    approx = lazard_approximation(rep, cover, sub)
    assert approx.qc.ok
    assert approx.vdim.ok
    assert approx.is_iso
    assert approx.sub_bundle.is_bundle and approx.sub_bundle.rank == 1


def test_lazard_chain_reconstruction():
    # growing the sub-representation from zero to the full kernel moves the
    # approximation from the free cover to the sheaf itself
    quiver = p1()
    cover = euler_cover_p1(quiver)
    rep = cover.target
    first = lazard_approximation(rep, cover, SubRep(cover.source))
    assert not first.is_iso
    assert map_is_surjective(first.to_f)
    ker_rep, incl = kernel(cover)
    sub = SubRep(cover.source)
    for v in quiver.vertices:
        for row in incl.rows[v]:
            sub.add(v, row)
    second = lazard_approximation(rep, cover, sub)
    assert second.is_iso


def test_lazard_block_restriction():
    rep = graded_sheaf(p1(), (0, 0))
    cover = serre_cover(rep)
    approx = lazard_approximation(rep, cover, SubRep(cover.source), block=(0,))
    assert is_vector_bundle(approx.f_sub, check_qc=False).rank == 1
    assert map_is_injective(approx.to_f)
    assert not approx.is_iso


def test_lazard_rejects_sub_outside_block():
    quiver = p1()
    cover = euler_cover_p1(quiver)
    ker_rep, incl = kernel(cover)
    sub = SubRep(cover.source)
    for v in quiver.vertices:
        for row in incl.rows[v]:
            sub.add(v, row)
    with pytest.raises(ValueError):
        lazard_approximation(cover.target, cover, sub, block=(0,))


def test_lazard_rejects_sub_outside_kernel():
    quiver = p1()
    cover = euler_cover_p1(quiver)
    chart = quiver.chart(V0)
    sub = SubRep(cover.source)
    sub.add(V0, (chart.ring.one(), chart.ring.zero()))
    with pytest.raises(ValueError):
        lazard_approximation(cover.target, cover, sub)


# ---------------------------------------------------------------------------
# Laurent helpers


@given(
    st.dictionaries(
        st.integers(min_value=-5, max_value=5),
        st.fractions(min_value=-9, max_value=9),
        max_size=5,
    )
)
def test_laurent_text_round_trip(mapping):
    p = LaurentPoly.build(Q, mapping)
    assert laurent_from_str(Q, laurent_to_str(p)) == p


def test_laurent_inverse_of_unit_matrix():
    t = lmat([["s^2", "s"], ["0", "1"]])
    inv = lmat_inv(t)
    assert lmat_mul(t, inv) == lmat_identity(Q, 2)
    assert lmat_mul(inv, t) == lmat_identity(Q, 2)


def test_laurent_inverse_needs_monomial_determinant():
    with pytest.raises(ValueError):
        lmat_inv(lmat([["s + 1"]]))


# ---------------------------------------------------------------------------
# Global sections oracle (independent of the factorization)


def test_sections_of_single_twists():
    for k in range(-3, 4):
        assert global_sections_dim(lmat([["s^%d" % k]])) == max(0, k + 1)


def test_sections_of_diagonal_sum():
    assert global_sections_dim(lmat([["s^2", "0"], ["0", "s^-1"]])) == 3


def test_sections_of_coupled_matrix():
    # frozen by hand: sections are pairs (p*s^2, p*s + q) with p in the span
    # of 1, 1/s, 1/s^2 and q chosen to cancel the principal part, so the
    # space has dimension four
    assert global_sections_dim(lmat([["s^2", "s"], ["0", "1"]])) == 4


# ---------------------------------------------------------------------------
# Birkhoff factorization


def test_split_of_diagonal_matrix():
    t = lmat([["s^2", "0"], ["0", "s^-1"]])
    split = birkhoff_split(t)
    assert split.splitting_type == (2, -1)
    assert split.left == lmat_identity(Q, 2)
    assert split.right == lmat_identity(Q, 2)


def test_split_of_coupled_matrix():
    t = lmat([["s^2", "s"], ["0", "1"]])
    split = birkhoff_split(t)
    assert split.splitting_type == (1, 1)
    assert h0_of_type(split.splitting_type) == 4
    assert h0_of_type(split.splitting_type) == global_sections_dim(t)


def test_split_of_identity():
    split = birkhoff_split(lmat_identity(Q, 3))
    assert split.splitting_type == (0, 0, 0)
    assert split.left == lmat_identity(Q, 3)
    assert split.right == lmat_identity(Q, 3)


def test_split_rejects_non_unit_determinant():
    with pytest.raises(ValueError):
        birkhoff_split(lmat([["s", "0"], ["0", "s + 1"]]))
    with pytest.raises(ValueError):
        birkhoff_split(lmat([["s", "0"]]))


def test_split_verification_catches_tampering():
    t = lmat([["s^2", "s"], ["0", "1"]])
    split = birkhoff_split(t)
    from qsheaf.bundles import verify_birkhoff

    assert verify_birkhoff(t, split)
    forged = BirkhoffSplit((2, 0), split.left, split.right)
    assert not verify_birkhoff(t, forged)


def _random_unit_factor(rng, r, side):
    """Unit-determinant matrix over k[s] (side +1) or k[1/s] (side -1) with
    entry degrees at most two in the allowed direction."""
    rows = [list(row) for row in lmat_identity(Q, r)]
    for _ in range(2):
        if r < 2:
            break
        i, j = rng.sample(range(r), 2)
        c = Fraction(rng.choice([-2, -1, 1, 2]))
        k = side * rng.randint(0, 2)
        mono = LaurentPoly.monomial(Q, k, c)
        for t in range(r):
            rows[i][t] = rows[i][t] + mono * rows[j][t]
    if r > 1 and rng.random() < 0.5:
        a, b = rng.sample(range(r), 2)
        rows[a], rows[b] = rows[b], rows[a]
    scale = Fraction(rng.choice([1, 2, -1]))
    rows[0] = [e.scale(scale) for e in rows[0]]
    return tuple(tuple(row) for row in rows)


def test_split_type_is_invariant_and_matches_sections():
    rng = random.Random(97)
    for _ in range(20):
        r = rng.randint(1, 3)
        degrees = sorted((rng.randint(-3, 3) for _ in range(r)), reverse=True)
        diag = tuple(
            tuple(
                LaurentPoly.monomial(Q, degrees[i]) if i == j else LaurentPoly.zero(Q)
                for j in range(r)
            )
            for i in range(r)
        )
        left = _random_unit_factor(rng, r, -1)
        right = _random_unit_factor(rng, r, +1)
        t = lmat_mul(lmat_mul(left, diag), right)
        split = birkhoff_split(t)
        assert split.splitting_type == tuple(degrees)
        assert h0_of_type(split.splitting_type) == global_sections_dim(t)


# ---------------------------------------------------------------------------
# Transition matrices


@pytest.mark.parametrize("k", [-2, 0, 3])
def test_transition_of_twist(k):
    t = transition_matrix(twist(p1(), k))
    assert t == lmat([["s^%d" % k]])


def test_transition_round_trip():
    t = lmat([["s^2", "s"], ["0", "1"]])
    rep = bundle_from_transition(Q, t)
    assert is_quasi_coherent(rep).ok
    assert is_vector_bundle(rep).rank == 2
    assert transition_matrix(rep) == t


def test_transition_requires_free_presentation():
    quiver = p1()
    x0 = poly_from_str(quiver.xring, "x0")
    x1 = poly_from_str(quiver.xring, "x1")
    rep = graded_sheaf(quiver, (1, 1), ((x1, x0.scale(Fraction(-1))),))
    with pytest.raises(ValueError):
        transition_matrix(rep)


def test_transition_requires_the_line():
    with pytest.raises(ValueError):
        transition_matrix(structure_sheaf(build_proj_quiver(Q, 2)))


def test_bundle_from_transition_rejects_degenerate_matrix():
    with pytest.raises(ValueError):
        bundle_from_transition(Q, lmat([["s", "0"], ["s", "0"]]))


# ---------------------------------------------------------------------------
# Line-bundle filtration


def test_filtration_of_twist_sum():
    quiver = p1()
    rep = direct_sum(twist(quiver, 2), twist(quiver, -1))
    filt = line_bundle_filtration(rep)
    assert filt.splitting_type == (2, -1)
    assert len(filt.steps) == 3
    assert filt.ok
    full = filt.steps[-1]
    for v in quiver.vertices:
        chart = quiver.chart(v)
        for i in range(2):
            unit = [chart.ring.zero()] * 2
            unit[i] = chart.ring.one()
            assert full.contains(v, tuple(unit))


def test_filtration_of_coupled_transition():
    rep = bundle_from_transition(Q, lmat([["s^2", "s"], ["0", "1"]]))
    filt = line_bundle_filtration(rep)
    assert filt.splitting_type == (1, 1)
    assert filt.ok
    assert len(filt.steps) == 3


def test_filtration_of_structure_sheaf():
    filt = line_bundle_filtration(structure_sheaf(p1()))
    assert filt.splitting_type == (0,)
    assert len(filt.steps) == 2
    assert filt.ok


def test_filtration_rejects_non_bundles():
    with pytest.raises(ValueError):
        line_bundle_filtration(skyscraper_rep(p1()))


def test_chart_laurent_round_trip():
    chart = p1().chart(V01)
    p = poly_from_str(chart.ring, "z1^2 + 3*u1 - 2")
    lpq = chart_to_laurent(chart, p)
    assert lpq == lp("s^2 - 2 + 3*s^-1")
    assert lmat_det(((lpq,),)) == lpq
