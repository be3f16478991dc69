"""Exact sparse polynomial arithmetic and Groebner machinery for free modules.

Coefficients are either rationals (fractions.Fraction) or a prime field F_p
with p < 2**31.  Monomials are exponent tuples ordered by graded reverse
lexicographic order; free-module terms are (position, monomial) pairs ordered
position-over-term, position 0 largest.  Module elements are tuples of Poly
of a common rank.  All computations are deterministic for a fixed input
order: pair selection, reducer selection and output ordering use explicit
sort keys and no hashing-dependent iteration.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from heapq import heappush, heappop
from typing import Iterable, Sequence


class RingMismatchError(ValueError):
    """Operands belong to different rings."""


class DimensionMismatchError(ValueError):
    """Module elements or matrix rows have inconsistent rank."""


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class Field:
    """Exact coefficient field: char 0 means the rationals, else F_char."""

    char: int = 0

    def __post_init__(self):
        if self.char != 0:
            if self.char >= 2**31:
                raise ValueError("prime field characteristic must be < 2**31")
            if not _is_prime(self.char):
                raise ValueError(f"{self.char} is not prime")

    @staticmethod
    def rationals() -> "Field":
        return Field(0)

    @staticmethod
    def prime(p: int) -> "Field":
        return Field(p)

    @property
    def zero(self):
        return Fraction(0) if self.char == 0 else 0

    @property
    def one(self):
        return Fraction(1) if self.char == 0 else 1

    def of_int(self, n: int):
        return Fraction(n) if self.char == 0 else n % self.char

    def of_fraction(self, num: int, den: int):
        if self.char == 0:
            return Fraction(num, den)
        return (num % self.char) * self.inv(den % self.char) % self.char

    def add(self, a, b):
        return a + b if self.char == 0 else (a + b) % self.char

    def sub(self, a, b):
        return a - b if self.char == 0 else (a - b) % self.char

    def mul(self, a, b):
        return a * b if self.char == 0 else (a * b) % self.char

    def neg(self, a):
        return -a if self.char == 0 else (-a) % self.char

    def inv(self, a):
        if self.char == 0:
            if a == 0:
                raise ZeroDivisionError("inverse of zero")
            return 1 / Fraction(a)
        if a % self.char == 0:
            raise ZeroDivisionError("inverse of zero")
        return pow(a, self.char - 2, self.char)

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def coeff_str(self, a) -> str:
        return str(a)

    def coeff_from_str(self, s: str):
        s = s.strip()
        if "/" in s:
            num, den = s.split("/", 1)
            return self.of_fraction(int(num), int(den))
        return self.of_int(int(s))


@dataclass(frozen=True)
class PolyRing:
    """Polynomial ring over an exact field with named, ordered variables."""

    field: Field
    names: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.names)) != len(self.names):
            raise ValueError("duplicate variable names")

    @property
    def nvars(self) -> int:
        return len(self.names)

    def zero(self) -> "Poly":
        return Poly(self, {})

    def one(self) -> "Poly":
        return self.constant(self.field.one)

    def constant(self, c) -> "Poly":
        if c == self.field.zero:
            return self.zero()
        return Poly(self, {(0,) * self.nvars: c})

    def from_int(self, n: int) -> "Poly":
        return self.constant(self.field.of_int(n))

    def var(self, i: int) -> "Poly":
        exp = [0] * self.nvars
        exp[i] = 1
        return Poly(self, {tuple(exp): self.field.one})

    def var_named(self, name: str) -> "Poly":
        return self.var(self.names.index(name))

    def monomial(self, exp: Sequence[int], coeff=None) -> "Poly":
        c = self.field.one if coeff is None else coeff
        if c == self.field.zero:
            return self.zero()
        if len(exp) != self.nvars or any(e < 0 for e in exp):
            raise ValueError("bad exponent vector")
        return Poly(self, {tuple(exp): c})

    def from_terms(self, terms: dict) -> "Poly":
        z = self.field.zero
        return Poly(self, {e: c for e, c in terms.items() if c != z})


def grevlex_key(exp: tuple[int, ...]):
    """Sort key: larger key = larger monomial in grevlex."""
    return (sum(exp), tuple(-e for e in reversed(exp)))


def term_key(pos: int, exp: tuple[int, ...]):
    """Position-over-term key extending grevlex; position 0 is largest."""
    return (-pos, grevlex_key(exp))


class Poly:
    """Immutable sparse polynomial: map from exponent tuple to coefficient."""

    __slots__ = ("ring", "terms")

    def __init__(self, ring: PolyRing, terms: dict):
        self.ring = ring
        self.terms = terms

    def _check(self, other: "Poly"):
        if self.ring is not other.ring and self.ring != other.ring:
            raise RingMismatchError("polynomials from different rings")

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        return isinstance(other, Poly) and self.ring == other.ring and self.terms == other.terms

    def __hash__(self):
        return hash((self.ring, frozenset(self.terms.items())))

    def __add__(self, other: "Poly") -> "Poly":
        self._check(other)
        f = self.ring.field
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = f.add(out.get(e, f.zero), c)
            if s == f.zero:
                out.pop(e, None)
            else:
                out[e] = s
        return Poly(self.ring, out)

    def __neg__(self) -> "Poly":
        f = self.ring.field
        return Poly(self.ring, {e: f.neg(c) for e, c in self.terms.items()})

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other: "Poly") -> "Poly":
        self._check(other)
        f = self.ring.field
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = f.add(out.get(e, f.zero), f.mul(c1, c2))
                if s == f.zero:
                    out.pop(e, None)
                else:
                    out[e] = s
        return Poly(self.ring, out)

    def __pow__(self, n: int) -> "Poly":
        if n < 0:
            raise ValueError("negative power")
        result = self.ring.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def scale(self, c) -> "Poly":
        f = self.ring.field
        if c == f.zero:
            return self.ring.zero()
        return Poly(self.ring, {e: f.mul(cc, c) for e, cc in self.terms.items()})

    def mul_term(self, exp: tuple[int, ...], coeff) -> "Poly":
        f = self.ring.field
        if coeff == f.zero:
            return self.ring.zero()
        return Poly(
            self.ring,
            {tuple(a + b for a, b in zip(e, exp)): f.mul(c, coeff) for e, c in self.terms.items()},
        )

    def lead(self):
        """(exponent, coefficient) of the grevlex-largest term, or None."""
        if not self.terms:
            return None
        e = max(self.terms, key=grevlex_key)
        return e, self.terms[e]

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def substitute(self, images: Sequence["Poly"]) -> "Poly":
        """Evaluate at images[i] for variable i; images share one target ring."""
        if len(images) != self.ring.nvars:
            raise DimensionMismatchError("one image per variable required")
        target = images[0].ring if images else self.ring
        out = target.zero()
        for e, c in self.terms.items():
            term = target.constant(c)
            for i, ei in enumerate(e):
                if ei:
                    term = term * images[i] ** ei
            out = out + term
        return out

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: grevlex_key(t[0]), reverse=True)

    def key(self):
        return tuple(self.sorted_terms())

    def __repr__(self):
        return f"Poly({poly_to_str(self)})"


# ---------------------------------------------------------------------------
# textual encoding


def poly_to_str(p: Poly) -> str:
    """Canonical textual form: terms in decreasing order, explicit '*' and '^'."""
    if p.is_zero():
        return "0"
    field = p.ring.field
    chunks = []
    for e, c in p.sorted_terms():
        factors = [f"{p.ring.names[i]}^{ei}" if ei > 1 else p.ring.names[i] for i, ei in enumerate(e) if ei]
        cs = field.coeff_str(c)
        neg = cs.startswith("-")
        body = cs.lstrip("-")
        if factors and body == "1":
            text = "*".join(factors)
        elif factors:
            text = body + "*" + "*".join(factors)
        else:
            text = body
        if not chunks:
            chunks.append(("-" if neg else "") + text)
        else:
            chunks.append(("- " if neg else "+ ") + text)
    return " ".join(chunks)


def poly_from_str(ring: PolyRing, text: str) -> Poly:
    """Parse a sum of terms like '3*z1^2*u1 - 1/2*z1 + 2'.

    Accepts optional '*' between coefficient and variables and whitespace
    anywhere; raises ValueError with a short reason on malformed input.
    """
    s = text.replace(" ", "")
    if not s or s == "0":
        if s == "0":
            return ring.zero()
        raise ValueError("empty polynomial")
    terms: list[tuple[int, str]] = []
    sign, start = 1, 0
    if s[0] in "+-":
        sign = -1 if s[0] == "-" else 1
        start = 1
    cur = start
    while cur <= len(s):
        if cur == len(s) or s[cur] in "+-":
            chunk = s[start:cur]
            if not chunk:
                raise ValueError(f"empty term in {text!r}")
            terms.append((sign, chunk))
            if cur < len(s):
                sign = -1 if s[cur] == "-" else 1
                start = cur + 1
        cur += 1
    out = ring.zero()
    for sign, chunk in terms:
        out = out + _term_from_str(ring, sign, chunk, text)
    return out


def _term_from_str(ring: PolyRing, sign: int, chunk: str, context: str) -> Poly:
    field = ring.field
    coeff = field.one
    exp = [0] * ring.nvars
    for factor in chunk.split("*"):
        if not factor:
            raise ValueError(f"empty factor in {context!r}")
        if factor[0].isdigit():
            coeff = field.mul(coeff, field.coeff_from_str(factor))
            continue
        name, power = factor, 1
        if "^" in factor:
            name, ptext = factor.split("^", 1)
            try:
                power = int(ptext)
            except ValueError as exc:
                raise ValueError(f"bad exponent {ptext!r} in {context!r}") from exc
            if power < 0:
                raise ValueError(f"negative exponent in {context!r}")
        if name not in ring.names:
            raise ValueError(f"unknown variable {name!r} in {context!r}")
        exp[ring.names.index(name)] += power
    if sign < 0:
        coeff = field.neg(coeff)
    return ring.monomial(tuple(exp), coeff)


# ---------------------------------------------------------------------------
# free-module elements (vecs): tuples of Poly of a common rank


def vec_zero(ring: PolyRing, rank: int) -> tuple[Poly, ...]:
    return tuple(ring.zero() for _ in range(rank))

def vec_unit(ring: PolyRing, rank: int, pos: int) -> tuple[Poly, ...]:
    return tuple(ring.one() if i == pos else ring.zero() for i in range(rank))

def vec_add(a, b):
    return tuple(x + y for x, y in zip(a, b))

def vec_sub(a, b):
    return tuple(x - y for x, y in zip(a, b))

def vec_neg(a):
    return tuple(-x for x in a)

def vec_scale(a, c):
    return tuple(x.scale(c) for x in a)

def vec_mul_poly(a, p: Poly):
    return tuple(x * p for x in a)

def vec_mul_term(a, exp, coeff):
    return tuple(x.mul_term(exp, coeff) for x in a)

def vec_is_zero(a) -> bool:
    return all(x.is_zero() for x in a)

def vec_key(a):
    return tuple(x.key() for x in a)


def vec_lead(a):
    """(pos, exponent, coeff) of the POT-largest term, or None if zero."""
    best = None
    for pos, p in enumerate(a):
        lt = p.lead()
        if lt is None:
            continue
        cand = (pos, lt[0], lt[1])
        if best is None or term_key(pos, lt[0]) > term_key(best[0], best[1]):
            best = cand
    return best


def _divides(e1, e2) -> bool:
    return all(a <= b for a, b in zip(e1, e2))


def _exp_lcm(e1, e2):
    return tuple(max(a, b) for a, b in zip(e1, e2))


def _exp_sub(e1, e2):
    return tuple(a - b for a, b in zip(e1, e2))


def reduce_vec(vec, basis, ring: PolyRing, track: bool = False):
    """Full normal form of vec against basis (list of nonzero vecs).

    Every term is reduced, scanning reducers in list order.  With track=True
    also returns the quotient list q with vec = sum(q[i]*basis[i]) + remainder.
    The caller is responsible for basis being a Groebner basis when a
    canonical remainder is required.
    """
    field = ring.field
    leads = [vec_lead(b) for b in basis]
    rank = len(vec)
    remainder = vec_zero(ring, rank)
    work = vec
    quotients = [ring.zero() for _ in basis] if track else None
    while True:
        lt = vec_lead(work)
        if lt is None:
            break
        pos, exp, coeff = lt
        hit = -1
        for i, bl in enumerate(leads):
            if bl is not None and bl[0] == pos and _divides(bl[1], exp):
                hit = i
                break
        if hit < 0:
            move = tuple(
                ring.monomial(exp, coeff) if i == pos else ring.zero() for i in range(rank)
            )
            remainder = vec_add(remainder, move)
            work = vec_sub(work, move)
            continue
        bl = leads[hit]
        mult_exp = _exp_sub(exp, bl[1])
        mult_coeff = field.div(coeff, bl[2])
        work = vec_sub(work, vec_mul_term(basis[hit], mult_exp, mult_coeff))
        if track:
            quotients[hit] = quotients[hit] + ring.monomial(mult_exp, mult_coeff)
    if track:
        return remainder, quotients
    return remainder


def _buchberger(gens, ring: PolyRing, rank: int, use_criteria: bool, track: bool):
    """Shared Buchberger core.

    Returns (basis, combos, syzygy_rows):
      basis  - list of nonzero vecs whose leads generate the lead module,
               starting with the nonzero input generators in order;
      combos - basis[k] = sum(combos[k][i] * gens[i]) when track, else None;
      syzygy_rows - rows over the original gens from zero reductions (track).

    S-pairs only form between elements whose leads share a position.  With
    use_criteria the coprimality skip applies in rank one and the chain
    criterion in any rank; tracked runs process every pair so that the
    recorded zero reductions generate the full syzygy module.
    """
    field = ring.field
    basis: list = []
    combos: list = [] if track else None
    syzygies: list = [] if track else None
    ngens = len(gens)

    for i, g in enumerate(gens):
        if len(g) != rank:
            raise DimensionMismatchError("generators of unequal rank")
        if vec_is_zero(g):
            if track:
                syzygies.append(vec_unit(ring, ngens, i))
            continue
        basis.append(g)
        if track:
            combos.append(vec_unit(ring, ngens, i))

    pairs: list = []
    pending: set = set()

    def push_pairs(k: int):
        lk = vec_lead(basis[k])
        for i in range(k):
            li = vec_lead(basis[i])
            if li[0] != lk[0]:
                continue
            lcm = _exp_lcm(li[1], lk[1])
            heappush(pairs, (sum(lcm), i, k, lcm))
            pending.add((i, k))

    for k in range(len(basis)):
        push_pairs(k)

    while pairs:
        _, i, j, lcm = heappop(pairs)
        pending.discard((i, j))
        li, lj = vec_lead(basis[i]), vec_lead(basis[j])
        if use_criteria:
            if rank == 1 and _exp_sub(lcm, li[1]) == lj[1]:
                continue  # coprime leads; only valid for ideals
            skip = False
            for k in range(len(basis)):
                if k in (i, j):
                    continue
                lk = vec_lead(basis[k])
                if lk[0] != li[0] or not _divides(lk[1], lcm):
                    continue
                a, b = (i, k) if i < k else (k, i)
                c, d = (j, k) if j < k else (k, j)
                if (a, b) not in pending and (c, d) not in pending:
                    skip = True
                    break
            if skip:
                continue
        s = vec_sub(
            vec_mul_term(basis[i], _exp_sub(lcm, li[1]), field.inv(li[2])),
            vec_mul_term(basis[j], _exp_sub(lcm, lj[1]), field.inv(lj[2])),
        )
        if track:
            rem, quot = reduce_vec(s, basis, ring, track=True)
            combo = vec_sub(
                vec_mul_term(combos[i], _exp_sub(lcm, li[1]), field.inv(li[2])),
                vec_mul_term(combos[j], _exp_sub(lcm, lj[1]), field.inv(lj[2])),
            )
            for k, q in enumerate(quot):
                if not q.is_zero():
                    combo = vec_sub(combo, vec_mul_poly(combos[k], q))
            if vec_is_zero(rem):
                if not vec_is_zero(combo):
                    syzygies.append(combo)
                continue
            basis.append(rem)
            combos.append(combo)
        else:
            rem = reduce_vec(s, basis, ring)
            if vec_is_zero(rem):
                continue
            basis.append(rem)
        push_pairs(len(basis) - 1)

    return basis, combos, syzygies


def _reduced_basis(basis, ring: PolyRing):
    """Minimalize, interreduce, normalize monic, sort by decreasing lead."""
    field = ring.field
    kept = []
    for i, g in enumerate(basis):
        li = vec_lead(g)
        redundant = False
        for j, h in enumerate(basis):
            if i == j:
                continue
            lj = vec_lead(h)
            if lj[0] == li[0] and _divides(lj[1], li[1]):
                if term_key(lj[0], lj[1]) != term_key(li[0], li[1]) or j < i:
                    redundant = True
                    break
        if not redundant:
            kept.append(g)
    out = []
    for i, g in enumerate(kept):
        others = kept[:i] + kept[i + 1 :]
        r = reduce_vec(g, others, ring) if others else g
        if vec_is_zero(r):
            continue
        lt = vec_lead(r)
        out.append(vec_scale(r, field.inv(lt[2])))
    out.sort(key=lambda v: term_key(vec_lead(v)[0], vec_lead(v)[1]), reverse=True)
    return out


def groebner_basis(gens: Sequence, ring: PolyRing) -> list:
    """Reduced Groebner basis of the submodule generated by gens.

    gens is a sequence of equal-rank vecs (tuples of Poly); the result is
    canonical for the submodule: monic, interreduced, sorted by decreasing
    lead.  groebner_basis of its own output returns the same list.
    """
    gens = [g for g in gens if not vec_is_zero(g)]
    if not gens:
        return []
    rank = len(gens[0])
    basis, _, _ = _buchberger(gens, ring, rank, use_criteria=True, track=False)
    return _reduced_basis(basis, ring)


def normal_form(vec, basis, ring: PolyRing):
    """Full normal form against a caller-supplied Groebner basis.

    Not validated: a non-Groebner basis yields a well-defined but
    non-canonical remainder.
    """
    if not basis:
        return vec
    return reduce_vec(vec, basis, ring)


class TrackedBasis:
    """Groebner basis remembering expressions over the original generators.

    Supports membership with an explicit witness: lift(v) returns coefficient
    rows c over the inputs with v = sum(c[i] * gens[i]) whenever v lies in the
    span, else None.
    """

    def __init__(self, gens: Sequence, ring: PolyRing, rank: int):
        self.ring = ring
        self.rank = rank
        self.gens = list(gens)
        basis, combos, syz = _buchberger(self.gens, ring, rank, use_criteria=False, track=True)
        self.basis = basis
        self.combos = combos
        self.syzygy_rows = syz

    def lift(self, vec):
        if not self.basis:
            return None if not vec_is_zero(vec) else [self.ring.zero()] * len(self.gens)
        rem, quot = reduce_vec(vec, self.basis, self.ring, track=True)
        if not vec_is_zero(rem):
            return None
        coeffs = [self.ring.zero()] * len(self.gens)
        for k, q in enumerate(quot):
            if q.is_zero():
                continue
            for i, c in enumerate(self.combos[k]):
                if not c.is_zero():
                    coeffs[i] = coeffs[i] + q * c
        return coeffs

    def contains(self, vec) -> bool:
        if not self.basis:
            return vec_is_zero(vec)
        return vec_is_zero(reduce_vec(vec, self.basis, self.ring))


def syzygies(gens: Sequence, ring: PolyRing) -> list:
    """Generators of the syzygy module of gens (rows over the gens).

    Every S-pair of the tracked Buchberger run is processed, so the recorded
    zero reductions generate all relations; zero input generators contribute
    unit rows.  Each returned row r satisfies sum(r[i]*gens[i]) = 0.
    """
    if not gens:
        return []
    rank = len(gens[0])
    for g in gens:
        if len(g) != rank:
            raise DimensionMismatchError("generators of unequal rank")
    tb = TrackedBasis(gens, ring, rank)
    seen = set()
    rows = []
    for r in tb.syzygy_rows:
        k = vec_key(r)
        if k not in seen:
            seen.add(k)
            rows.append(r)
    return rows


def module_kernel(map_rows: Sequence, target_relations: Sequence, ring: PolyRing, target_rank: int) -> list:
    """Generators of ker(F_r -> F_s / span(target_relations)).

    map_rows are the images of the source basis vectors (rows over the
    target), target_relations additional rows modded out of the target.
    Returned rows live in the source free module F_r.
    """
    rows = [tuple(r) for r in map_rows]
    rels = [tuple(r) for r in target_relations]
    for r in rows + rels:
        if len(r) != target_rank:
            raise DimensionMismatchError("row rank mismatch")
    syz = syzygies(rows + rels, ring)
    out, seen = [], set()
    r = len(rows)
    for row in syz:
        head = tuple(row[:r])
        if vec_is_zero(head):
            continue
        k = vec_key(head)
        if k not in seen:
            seen.add(k)
            out.append(head)
    return out


class PresIdeal:
    """Ideal in a PolyRing presented by a finite generator list."""

    def __init__(self, ring: PolyRing, gens: Iterable[Poly]):
        self.ring = ring
        self.gens = tuple(g for g in gens)
        for g in self.gens:
            if g.ring != ring:
                raise RingMismatchError("ideal generator from the wrong ring")
        self._gb = None

    def groebner(self) -> list:
        if self._gb is None:
            vecs = [(g,) for g in self.gens if not g.is_zero()]
            self._gb = groebner_basis(vecs, self.ring)
        return self._gb

    def contains(self, p: Poly) -> bool:
        return vec_is_zero(normal_form((p,), self.groebner(), self.ring))

    def is_zero(self) -> bool:
        return not self.groebner()

    def __repr__(self):
        return f"PresIdeal({[poly_to_str(g) for g in self.gens]})"


def ideal_contains_one(ideal: PresIdeal) -> bool:
    """Whether the ideal is the unit ideal, via normal form of 1."""
    return ideal.contains(ideal.ring.one())
