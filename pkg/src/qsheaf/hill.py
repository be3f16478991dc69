"""Finite lattice of distinguished submodules of a filtered module.

A finite-dimensional module over F_p (optionally an F_p[x]/(x^k)-module via
a nilpotent operator) filtered by stages with chosen generator blocks gives
rise to a family of submodules: one for every support set of blocks closed
under the dependency relation "a block's relations reach back into an
earlier block".  At this scale the family can be enumerated outright and
its lattice properties checked exhaustively:

  (1) every filtration stage belongs to the family;
  (2) the family is closed under pairwise sums and intersections, which in
      the finite case gives closure under arbitrary ones;
  (3) between any two nested members there is a chain inside the family
      whose successive quotients match the filtration blocks (dimension
      and, in the operator case, nilpotent partition type);
  (4) any member extended by a single element embeds into a member that is
      larger by a controlled dimension bound.

Everything is exact arithmetic over F_p with canonical reduced bases, so
subspaces compare by equality.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Optional

from .exactpoly import Field


# ---------------------------------------------------------------------------
# Exact linear algebra over F_p with canonical bases


def fp_vec(p: int, entries) -> tuple:
    return tuple(int(e) % p for e in entries)


def _pivot(row) -> int:
    for i, e in enumerate(row):
        if e:
            return i
    return -1


def fp_rref(p: int, rows) -> tuple:
    """Canonical reduced-echelon basis of the row span (unique per space)."""
    mat = [list(fp_vec(p, r)) for r in rows]
    mat = [r for r in mat if any(r)]
    if not mat:
        return ()
    ncols = len(mat[0])
    out = []
    rank = 0
    for col in range(ncols):
        pivot = None
        for i in range(rank, len(mat)):
            if mat[i][col]:
                pivot = i
                break
        if pivot is None:
            continue
        mat[rank], mat[pivot] = mat[pivot], mat[rank]
        inv = pow(mat[rank][col], p - 2, p)
        mat[rank] = [(x * inv) % p for x in mat[rank]]
        for i in range(len(mat)):
            if i != rank and mat[i][col]:
                c = mat[i][col]
                mat[i] = [(x - c * y) % p for x, y in zip(mat[i], mat[rank])]
        rank += 1
    return tuple(tuple(r) for r in mat[:rank])


def fp_reduce(p: int, basis, vec) -> tuple:
    res = list(fp_vec(p, vec))
    for row in basis:
        piv = _pivot(row)
        c = res[piv]
        if c:
            res = [(x - c * y) % p for x, y in zip(res, row)]
    return tuple(res)


def fp_in_span(p: int, basis, vec) -> bool:
    return not any(fp_reduce(p, basis, vec))


def fp_sum(p: int, a, b) -> tuple:
    return fp_rref(p, tuple(a) + tuple(b))


def _paired_rref(p: int, pairs):
    """Echelon form of (left | right) rows, eliminating by left columns
    first; rows whose left half vanished are re-echeloned by the right."""
    if not pairs:
        return [], ()
    lw = len(pairs[0][0])
    joined = [list(l) + list(r) for l, r in pairs]
    red = fp_rref(p, joined)
    with_left = [(row[:lw], row[lw:]) for row in red if any(row[:lw])]
    zero_left = [row[lw:] for row in red if not any(row[:lw])]
    return with_left, fp_rref(p, zero_left)


def fp_intersect(p: int, a, b) -> tuple:
    """Intersection of two spans by the double-block echelon method."""
    pairs = [(v, v) for v in a] + [(w, tuple(0 for _ in w)) for w in b]
    _, zero_left = _paired_rref(p, pairs)
    return zero_left


def fp_nullspace(p: int, rows) -> tuple:
    """Canonical basis of {c : sum c_i rows_i = 0}."""
    if not rows:
        return ()
    n = len(rows)
    pairs = []
    for i, r in enumerate(rows):
        unit = [0] * n
        unit[i] = 1
        pairs.append((tuple(r), tuple(unit)))
    _, zero_left = _paired_rref(p, pairs)
    return zero_left


def fp_solve(p: int, gens, target) -> Optional[tuple]:
    """One coefficient vector with sum c_i gens_i = target, chosen
    canonically from the echelon form; None when target is outside."""
    if not gens:
        return () if not any(fp_vec(p, target)) else None
    n = len(gens)
    pairs = []
    for i, r in enumerate(gens):
        unit = [0] * n
        unit[i] = 1
        pairs.append((tuple(fp_vec(p, r)), tuple(unit)))
    with_left, _ = _paired_rref(p, pairs)
    res = list(fp_vec(p, target))
    comb = [0] * n
    for left, right in with_left:
        piv = _pivot(left)
        c = res[piv]
        if c:
            res = [(x - c * y) % p for x, y in zip(res, left)]
            comb = [(x + c * y) % p for x, y in zip(comb, right)]
    if any(res):
        return None
    return tuple(comb)


def fp_mat_vec(p: int, vec, mat) -> tuple:
    """Row vector times matrix."""
    n = len(mat[0]) if mat else 0
    out = [0] * n
    for c, row in zip(vec, mat):
        if c:
            for j in range(n):
                out[j] = (out[j] + c * row[j]) % p
    return tuple(out)


def enumerate_space(p: int, basis):
    """Every vector of the span, zero included."""
    if not basis:
        yield ()
        return
    width = len(basis[0])
    for coeffs in product(range(p), repeat=len(basis)):
        out = [0] * width
        for c, row in zip(coeffs, basis):
            if c:
                for j in range(width):
                    out[j] = (out[j] + c * row[j]) % p
        yield tuple(out)


# ---------------------------------------------------------------------------
# Filtered modules


def _zero_matrix(dim: int) -> tuple:
    return tuple(tuple(0 for _ in range(dim)) for _ in range(dim))


def _orbit(p: int, vec, op) -> list:
    """The vector and its images under repeated application of the
    operator, until it dies (operators here are nilpotent)."""
    out = []
    cur = fp_vec(p, vec)
    while any(cur):
        out.append(cur)
        cur = fp_mat_vec(p, cur, op)
    return out


def closed_span(p: int, vectors, op) -> tuple:
    rows = []
    for v in vectors:
        rows.extend(_orbit(p, v, op))
    return fp_rref(p, rows)


@dataclass(frozen=True)
class FilteredModule:
    """Filtration data: stage alpha+1 is stage alpha plus the span of block
    alpha (operator-closed).  All derived data is canonical and recomputed
    at construction; the dependency relation deps[beta] lists the earlier
    blocks whose generators appear when the relations of block beta over
    stage beta are written out."""

    p: int
    dim: int
    blocks: tuple
    operator: Optional[tuple]
    stages: tuple
    deps: tuple

    @property
    def sigma(self) -> int:
        return len(self.blocks)

    def op_matrix(self) -> tuple:
        return self.operator if self.operator is not None else _zero_matrix(self.dim)

    def top(self) -> tuple:
        return self.stages[-1]


def make_filtered_module(p: int, dim: int, blocks, operator=None) -> FilteredModule:
    Field.prime(p)  # validates primality
    if dim < 0:
        raise ValueError("negative ambient dimension")
    blocks = tuple(tuple(fp_vec(p, v) for v in block) for block in blocks)
    for block in blocks:
        if not block:
            raise ValueError("empty generator block")
        for v in block:
            if len(v) != dim:
                raise ValueError("generator of wrong length")
    if operator is not None:
        operator = tuple(tuple(int(e) % p for e in row) for row in operator)
        if len(operator) != dim or any(len(r) != dim for r in operator):
            raise ValueError("operator must be a dim x dim matrix")
        power = tuple(tuple(1 if i == j else 0 for j in range(dim)) for i in range(dim))
        for _ in range(dim):
            power = tuple(fp_mat_vec(p, row, operator) for row in power)
        if any(any(row) for row in power):
            raise ValueError("operator is not nilpotent")
    op = operator if operator is not None else _zero_matrix(dim)
    stages = [()]
    orbit_gens = []  # (stage index, raw orbit vector), in construction order
    deps = []
    acc = []
    for beta, block in enumerate(blocks):
        mbeta = stages[-1]
        orows = []
        for b in block:
            orows.extend(_orbit(p, b, op))
        if not orows:
            raise ValueError("block %d adds nothing to the filtration" % beta)
        reduced = [fp_reduce(p, mbeta, r) for r in orows]
        support = set()
        for c in fp_nullspace(p, reduced):
            y = [0] * dim
            for ci, row in zip(c, orows):
                if ci:
                    for j in range(dim):
                        y[j] = (y[j] + ci * row[j]) % p
            coeffs = fp_solve(p, [g for _, g in orbit_gens], tuple(y))
            if coeffs is None:
                raise AssertionError("relation element escapes the earlier stages")
            for (alpha, _), ci in zip(orbit_gens, coeffs):
                if ci:
                    support.add(alpha)
        deps.append(frozenset(support))
        acc.extend(orows)
        nxt = fp_rref(p, acc)
        if len(nxt) <= len(mbeta):
            raise ValueError("block %d adds nothing to the filtration" % beta)
        stages.append(nxt)
        orbit_gens.extend((beta, r) for r in orows)
    return FilteredModule(
        p, dim, blocks, operator, tuple(stages), tuple(deps)
    )


# ---------------------------------------------------------------------------
# The family


@dataclass(frozen=True)
class HillMember:
    space: tuple  # canonical basis
    support: tuple  # the largest closed support realizing the space

    @property
    def dim(self) -> int:
        return len(self.space)


@dataclass(frozen=True)
class HillLattice:
    module: FilteredModule
    members: tuple

    def find(self, space) -> Optional[HillMember]:
        for m in self.members:
            if m.space == space:
                return m
        return None


def _down_closure(deps, support) -> frozenset:
    out = set(support)
    changed = True
    while changed:
        changed = False
        for beta in list(out):
            for alpha in deps[beta]:
                if alpha not in out:
                    out.add(alpha)
                    changed = True
    return frozenset(out)


def _is_closed(deps, support) -> bool:
    return all(deps[beta] <= support for beta in support)


def build_hill_family(module: FilteredModule) -> HillLattice:
    """Enumerate the dependency-closed supports and collect the distinct
    submodules they span; equal spaces merge, keeping the union of their
    supports (the union of closed sets is closed and spans the same)."""
    if module.sigma > 12 or module.dim > 12:
        raise ValueError("size bound exceeded: need sigma <= 12 and dim <= 12")
    p = module.p
    op = module.op_matrix()
    spaces: dict = {}
    supports = sorted(
        (
            s
            for s in (
                frozenset(
                    i for i in range(module.sigma) if mask & (1 << i)
                )
                for mask in range(1 << module.sigma)
            )
            if _is_closed(module.deps, s)
        ),
        key=lambda s: (len(s), tuple(sorted(s))),
    )
    for s in supports:
        vectors = []
        for alpha in s:
            vectors.extend(module.blocks[alpha])
        space = closed_span(p, vectors, op) if vectors else ()
        if space in spaces:
            spaces[space] = spaces[space] | s
        else:
            spaces[space] = s
    members = [
        HillMember(space, tuple(sorted(supp))) for space, supp in spaces.items()
    ]
    members.sort(key=lambda m: (m.dim, m.space))
    return HillLattice(module, tuple(members))


# ---------------------------------------------------------------------------
# Quotient invariants


def quotient_partition(p: int, big, small, op) -> tuple:
    """Partition type of the induced nilpotent operator on big/small,
    reported as block sizes in nonincreasing order; for the zero operator
    this is all ones, so it carries exactly the dimension."""
    residues = [fp_reduce(p, small, r) for r in big]
    comp = fp_rref(p, residues)
    q = len(comp)
    if q == 0:
        return ()
    rows = []
    for c in comp:
        img = fp_reduce(p, small, fp_mat_vec(p, c, op))
        coeffs = fp_solve(p, comp, img)
        if coeffs is None:
            raise AssertionError("operator does not preserve the quotient")
        rows.append(coeffs)
    ranks = [q]
    power = rows
    while ranks[-1] > 0:
        ranks.append(len(fp_rref(p, power)))
        power = [fp_mat_vec(p, r, rows) for r in power]
    counts = [ranks[j - 1] - ranks[j] for j in range(1, len(ranks))]
    out = []
    for j, nblocks in enumerate(
        [counts[j] - (counts[j + 1] if j + 1 < len(counts) else 0) for j in range(len(counts))]
    ):
        out.extend([j + 1] * nblocks)
    return tuple(sorted(out, reverse=True))


# ---------------------------------------------------------------------------
# The four properties


@dataclass(frozen=True)
class ChainStep:
    block: int
    quotient_dim: int
    quotient_partition: tuple
    block_dim: int
    block_partition: tuple

    @property
    def ok(self) -> bool:
        return (
            self.quotient_dim == self.block_dim
            and self.quotient_partition == self.block_partition
        )


@dataclass(frozen=True)
class ChainWitness:
    lower_support: tuple
    upper_support: tuple
    steps: tuple

    @property
    def ok(self) -> bool:
        return all(s.ok for s in self.steps)


@dataclass(frozen=True)
class ExtensionWitness:
    member_support: tuple
    element: tuple
    found_support: tuple
    added_dim: int
    bound: int

    @property
    def ok(self) -> bool:
        return self.added_dim <= self.bound


@dataclass(frozen=True)
class HillReport:
    ok: bool
    stages_present: bool
    lattice_closed: bool
    lattice_witness: Optional[tuple]
    chains_ok: bool
    chains: tuple
    extensions_ok: bool
    extension_failures: tuple
    findings: tuple


def verify_hill_properties(lattice: HillLattice) -> HillReport:
    """Exhaustive check of the four lattice properties.  Everything is
    recomputed from the module data; the report carries explicit witnesses
    (chains for property three, extension members for property four)."""
    module = lattice.module
    p = module.p
    op = module.op_matrix()
    findings = []
    spaces = {m.space: m for m in lattice.members}

    # (1) the filtration stages belong to the family
    stages_present = True
    for alpha, stage in enumerate(module.stages):
        if stage not in spaces:
            stages_present = False
            findings.append("stage %d is missing from the family" % alpha)

    # (2) pairwise sums and intersections stay inside
    lattice_closed = True
    lattice_witness = None
    mem = lattice.members
    for i in range(len(mem)):
        for j in range(i, len(mem)):
            s = fp_sum(p, mem[i].space, mem[j].space)
            if s not in spaces:
                lattice_closed = False
                lattice_witness = ("sum", mem[i].support, mem[j].support)
                findings.append(
                    "sum of members %s and %s escapes the family"
                    % (mem[i].support, mem[j].support)
                )
                break
            t = fp_intersect(p, mem[i].space, mem[j].space)
            if t not in spaces:
                lattice_closed = False
                lattice_witness = ("intersection", mem[i].support, mem[j].support)
                findings.append(
                    "intersection of members %s and %s escapes the family"
                    % (mem[i].support, mem[j].support)
                )
                break
        if not lattice_closed:
            break

    # block invariants, computed once
    block_data = []
    for beta in range(module.sigma):
        bdim = len(module.stages[beta + 1]) - len(module.stages[beta])
        bpart = quotient_partition(
            p, module.stages[beta + 1], module.stages[beta], op
        )
        block_data.append((bdim, bpart))

    # (3) chains with block-matching quotients between nested members
    chains = []
    chains_ok = True
    for low in mem:
        for high in mem:
            if low is high:
                continue
            if not all(fp_in_span(p, high.space, v) for v in low.space):
                continue
            sset = set(low.support)
            tset = set(high.support)
            if not sset <= tset:
                # supports are maximal, so nesting implies support nesting;
                # anything else is a genuine failure
                chains_ok = False
                findings.append(
                    "no support chain from %s to %s" % (low.support, high.support)
                )
                continue
            steps = []
            cur = low.space
            cur_supp = set(sset)
            for gamma in sorted(tset - sset):
                cur_supp.add(gamma)
                nxt_vectors = list(module.blocks[gamma])
                nxt = fp_sum(p, cur, closed_span(p, nxt_vectors, op))
                qdim = len(nxt) - len(cur)
                qpart = quotient_partition(p, nxt, cur, op)
                bdim, bpart = block_data[gamma]
                steps.append(ChainStep(gamma, qdim, qpart, bdim, bpart))
                cur = nxt
            witness = ChainWitness(low.support, high.support, tuple(steps))
            if cur != high.space:
                chains_ok = False
                findings.append(
                    "chain from %s does not land on %s"
                    % (low.support, high.support)
                )
            if not witness.ok:
                chains_ok = False
                bad = [s.block for s in witness.steps if not s.ok]
                findings.append(
                    "chain %s -> %s has mismatched quotients at blocks %s"
                    % (low.support, high.support, bad)
                )
            chains.append(witness)

    # (4) one-element extensions inside the family, with a dimension bound
    max_block = max(
        (len(closed_span(p, b, op)) for b in module.blocks), default=0
    )
    all_orbit_gens = []
    for beta in range(module.sigma):
        for b in module.blocks[beta]:
            for r in _orbit(p, b, op):
                all_orbit_gens.append((beta, r))
    extensions_ok = True
    extension_failures = []
    for member in mem:
        for x in enumerate_space(p, module.top()):
            if module.dim and not any(x):
                continue
            if not x:
                continue
            coeffs = fp_solve(p, [g for _, g in all_orbit_gens], x)
            if coeffs is None:
                raise AssertionError("element of the module escapes the blocks")
            needed = {
                beta for (beta, _), c in zip(all_orbit_gens, coeffs) if c
            }
            tsupp = _down_closure(module.deps, needed | set(member.support))
            target_vectors = []
            for alpha in tsupp:
                target_vectors.extend(module.blocks[alpha])
            tspace = closed_span(p, target_vectors, op) if target_vectors else ()
            found = spaces.get(tspace)
            added = len(tspace) - member.dim
            bound = max_block * len(tsupp - set(member.support))
            witness = ExtensionWitness(
                member.support,
                x,
                found.support if found else (),
                added,
                bound,
            )
            if (
                found is None
                or not fp_in_span(p, tspace, x)
                or not all(fp_in_span(p, tspace, v) for v in member.space)
                or not witness.ok
            ):
                extensions_ok = False
                extension_failures.append(witness)
    if extension_failures:
        findings.append(
            "%d one-element extensions failed" % len(extension_failures)
        )

    ok = stages_present and lattice_closed and chains_ok and extensions_ok
    return HillReport(
        ok,
        stages_present,
        lattice_closed,
        lattice_witness,
        chains_ok,
        tuple(chains),
        extensions_ok,
        tuple(extension_failures),
        tuple(findings),
    )
