"""Residue rings O/p^l, their characters, and Gauss sums.

Elements of O/p^l are canonical integer coordinate tuples (reduced mod
the HNF basis of p^l).  Character values are exact rational rotation
numbers r with value exp(2*pi*i*r); they become complex floats only at
final summation.  Additive characters are evaluated through the global
trace: lift, make integral away from p via a CRT multiplier, take the
field trace, and read off the fractional part.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
import numpy as np

from .hnf import hnf, reduce_mod, solve_integer
from .nf import FieldError, NumberFieldCtx, PrimeIdealData

DESK_CAP = 10**6


def ideal_coprime_split(A, B):
    """For coprime integral ideals A, B return (a, b) with a+b = 1, a in A, b in B."""
    ctx = A.ctx
    if A.den != 1 or B.den != 1:
        raise FieldError("coprime split needs integral ideals")
    rows = [r[:] for r in A.num] + [r[:] for r in B.num]
    one = [1] + [0] * (ctx.degree - 1)
    z = solve_integer(rows, one)
    if z is None:
        raise FieldError("ideals are not coprime")
    d = ctx.degree
    a = ctx.zero
    for i in range(d):
        if z[i]:
            a = a + ctx.elem(z[i]) * ctx.elem([Fraction(x) for x in A.num[i]])
    b = ctx.one - a
    return a, b


def additive_char_rot(P: PrimeIdealData, x) -> Fraction:
    """Rotation number r of psi_v(x) = e^(2 pi i r) at the place of P.

    psi_v = psi_Qp o tr is the standard local character; x may have any
    denominator.  The value is the fractional part of tr(c*x) for a CRT
    multiplier c that makes c*x integral away from P without moving it
    P-adically.
    """
    ctx = P.ctx
    x = ctx.elem(x)
    if x.is_zero():
        return Fraction(0)
    d_v = ctx.different_exponent(P)
    n = x.denominator()
    m_eff = max(0, -P.valuation(x))
    if n == 1 and m_eff == 0 and d_v == 0:
        return Fraction(0)
    vp_n = 0
    nn = n
    while nn % P.p == 0:
        nn //= P.p
        vp_n += 1
    C = ctx.ideal([ctx.elem(n)])
    if vp_n:
        C = C.multiply(P.ideal.inverse().power(P.e * vp_n))
    M = m_eff + d_v + 2
    a, c = ideal_coprime_split(P.power(M), C)
    y = c * x
    t = ctx.trace(y)
    return t - math.floor(t)


def _divisors(n):
    out = []
    i = 1
    while i * i <= n:
        if n % i == 0:
            out.append(i)
            if i != n // i:
                out.append(n // i)
        i += 1
    return sorted(out)


class ResidueRing:
    """O/p^l with exact arithmetic and a full multiplicative character table."""

    def __init__(self, prime: PrimeIdealData, level: int):
        if level < 1:
            raise FieldError("residue ring level must be >= 1")
        q = prime.residue_size
        if q**level > DESK_CAP:
            raise FieldError(
                f"residue ring size {q}^{level} exceeds desk cap {DESK_CAP}; lower the level"
            )
        self.prime = prime
        self.ctx = prime.ctx
        self.level = level
        self.q = q
        self.size = q**level
        self.basis = prime.power(level).num  # HNF, den 1
        self._p_basis = {j: prime.power(j).num for j in range(1, level + 1)}
        d = self.ctx.degree
        self._mulmat = self._integer_mul_tables()
        self.zero = tuple([0] * d)
        self.one = self.reduce_coords([1] + [0] * (d - 1))
        self.pi = self.reduce_elem(prime.uniformizer)
        # uniformizer image must be nilpotent of index exactly l
        acc = self.one
        for j in range(level):
            acc = self.mul(acc, self.pi)
        if acc != self.zero:
            raise FieldError("uniformizer image not nilpotent at level l")
        if level > 1:
            acc = self.one
            for j in range(level - 1):
                acc = self.mul(acc, self.pi)
            if acc == self.zero:
                raise FieldError("uniformizer image nilpotent too early")

        self.elements = self._enumerate_elements()
        self.units = [t for t in self.elements if self.is_unit(t)]
        self.unit_count = len(self.units)
        expected = q ** (level - 1) * (q - 1)
        if self.unit_count != expected:
            raise FieldError("unit count mismatch against q^(l-1)(q-1)")
        self._unit_index = {t: i for i, t in enumerate(self.units)}
        self._gens = None
        self._dlog = None
        self._psi_forms = {}

    # -- representation ------------------------------------------------

    def reduce_coords(self, coords):
        return tuple(reduce_mod(self.basis, [int(c) for c in coords]))

    def reduce_elem(self, elem):
        elem = self.ctx.elem(elem)
        if not elem.is_integral():
            raise FieldError("only integral elements reduce into O/p^l")
        return self.reduce_coords([int(c) for c in elem.coords])

    def lift(self, t):
        return self.ctx.elem(list(t))

    def _integer_mul_tables(self):
        # rows: coordinates of theta^(i+j) reduced to the power basis, integer
        d = self.ctx.degree
        tables = {}
        for k in range(d, 2 * d - 1):
            tables[k] = [int(c) for c in self.ctx._theta_red[k]]
        return tables

    def _enumerate_elements(self):
        import itertools

        diag = [self.basis[i][i] for i in range(len(self.basis))]
        out = []
        for combo in itertools.product(*[range(b) for b in diag]):
            out.append(tuple(combo))  # the HNF box is already canonical
        return out

    def add(self, a, b):
        return self.reduce_coords([x + y for x, y in zip(a, b)])

    def neg(self, a):
        return self.reduce_coords([-x for x in a])

    def mul(self, a, b):
        d = self.ctx.degree
        raw = [0] * (2 * d - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    if bj:
                        raw[i + j] += ai * bj
        out = list(raw[:d])
        for k in range(d, 2 * d - 1):
            if raw[k]:
                red = self._mulmat[k]
                for i in range(d):
                    out[i] += raw[k] * red[i]
        return self.reduce_coords(out)

    def pow(self, a, n):
        out = self.one
        base = a
        while n:
            if n & 1:
                out = self.mul(out, base)
            base = self.mul(base, base)
            n >>= 1
        return out

    def is_unit(self, a):
        return any(reduce_mod(self._p_basis[1], list(a)))

    def inv_unit(self, a):
        return self.pow(a, self.unit_count - 1)

    def element_order(self, a):
        n = self.unit_count
        order = n
        for p in set(_prime_factors(n)):
            while order % p == 0 and self.pow(a, order // p) == self.one:
                order //= p
        return order

    # -- multiplicative structure ---------------------------------------

    def unit_group_basis(self):
        """Basis (g_i, n_i) of (O/p^l)^x as an internal direct product.

        Uses the classical recursion: split off a maximal-order cyclic
        factor, decompose the quotient on canonical coset representatives,
        and lift quotient generators so that g^ord(g) = 1 exactly.  The
        direct-sum property is what makes exponent characters well defined.
        """
        if self._gens is None:
            self._gens = _abelian_basis(self.units, self.mul, self.one)
        return self._gens

    def dlog_table(self):
        """Map unit tuple -> exponent vector over the unit group basis."""
        if self._dlog is not None:
            return self._dlog
        import itertools

        gens = self.unit_group_basis()
        table = {}
        ranges = [range(o) for _, o in gens]
        for combo in itertools.product(*ranges):
            u = self.one
            for (g, _), e in zip(gens, combo):
                if e:
                    u = self.mul(u, self.pow(g, e))
            table[u] = combo
        if len(table) != self.unit_count:
            raise FieldError("unit group basis does not enumerate the group")
        self._dlog = table
        return table

    def one_plus_p_generators(self, r):
        """Generators of the subgroup (1 + p^r)/(1 + p^l), r >= 1."""
        gens = []
        for j in range(r, self.level):
            for row in self._p_basis[j]:
                u = self.reduce_coords([1 + row[0]] + list(row[1:]))
                gens.append(u)
        return gens

    # -- additive characters ---------------------------------------------

    def psi_conductor(self, shift):
        """Conductor exponent of x -> psi_v(pi^-shift x): shift - v(different)."""
        return shift - self.ctx.different_exponent(self.prime)

    def psi_form(self, shift):
        """Rotation-number linear form of psi_v(pi^-shift * x) on coordinates.

        Valid on O/p^l provided the conductor is <= l.  Returns a tuple of
        Fractions (r_0..r_{d-1}); the rotation of an element with canonical
        coords u is sum(u_i r_i) mod 1.
        """
        if shift in self._psi_forms:
            return self._psi_forms[shift]
        if self.psi_conductor(shift) > self.level:
            raise FieldError("additive character too deep for this ring level")
        ctx = self.ctx
        pim = self.prime.uniformizer.inverse() ** shift if shift else ctx.one
        rots = []
        for i in range(ctx.degree):
            basis_vec = ctx.elem([int(j == i) for j in range(ctx.degree)])
            rots.append(additive_char_rot(self.prime, pim * basis_vec))
        # well-definedness: lattice vectors of p^l must map into Z
        for row in self.basis:
            v = sum(Fraction(c) * r for c, r in zip(row, rots))
            if v.denominator != 1:
                raise FieldError("psi form not well-defined on the ring (level too low)")
        self._psi_forms[shift] = tuple(rots)
        return self._psi_forms[shift]

    def psi_rot(self, shift, coords):
        rots = self.psi_form(shift)
        t = sum(Fraction(int(c)) * r for c, r in zip(coords, rots))
        return t - math.floor(t)

    def psi_values_on(self, shift, elements):
        """Complex psi values on a list of canonical tuples, vectorized."""
        rots = self.psi_form(shift)
        arr = np.array([[int(c) for c in t] for t in elements], dtype=float)
        r = arr @ np.array([float(x) for x in rots])
        return np.exp(2j * np.pi * r)


def rot_to_complex(r: Fraction) -> complex:
    return cmath.exp(2j * cmath.pi * float(r))


@dataclass(frozen=True)
class AddCharLocal:
    """x -> psi_v(pi^-shift x); conductor = shift - v(different)."""

    ring: ResidueRing
    shift: int

    @property
    def conductor(self):
        return self.ring.psi_conductor(self.shift)

    def rot(self, coords):
        return self.ring.psi_rot(self.shift, coords)

    def value(self, coords):
        return rot_to_complex(self.rot(coords))


@dataclass(frozen=True)
class MultChar:
    """Character of (O/p^l)^x given by exponents against the group basis."""

    ring: ResidueRing
    exponents: tuple

    def rot(self, coords) -> Fraction:
        dlog = self.ring.dlog_table()
        gens = self.ring.unit_group_basis()
        e = dlog[tuple(coords)]
        t = sum(
            Fraction(a * k, o) for a, k, (_, o) in zip(self.exponents, e, gens)
        )
        return t - math.floor(t)

    def value(self, coords) -> complex:
        return rot_to_complex(self.rot(coords))

    def rot_at(self, ring2, coords) -> Fraction:
        """Evaluate on a unit of a deeper ring at the same prime."""
        if ring2 is self.ring:
            return self.rot(coords)
        return self.rot(self.ring.reduce_elem(ring2.lift(coords)))

    def is_trivial(self):
        return all(a == 0 for a in self.exponents)

    @property
    def conductor(self):
        return self.ring.char_conductor(self)

    def values_on(self, elements):
        dlog = self.ring.dlog_table()
        gens = self.ring.unit_group_basis()
        rot = np.zeros(len(elements))
        for idx, t in enumerate(elements):
            e = dlog[tuple(t)]
            rot[idx] = sum(a * k / o for a, k, (_, o) in zip(self.exponents, e, gens))
        return np.exp(2j * np.pi * rot)


def _char_conductor(ring: ResidueRing, chi: MultChar) -> int:
    if chi.is_trivial():
        return 0
    for r in range(1, ring.level + 1):
        gens = ring.one_plus_p_generators(r)
        if all(chi.rot(g) == 0 for g in gens):
            return r
    raise FieldError("character nontrivial on 1 + p^l (impossible)")


ResidueRing.char_conductor = lambda self, chi: _char_conductor(self, chi)


def build_residue_ring(prime: PrimeIdealData, level: int) -> ResidueRing:
    return ResidueRing(prime, level)


def enumerate_mult_chars(ring: ResidueRing):
    """All characters of (O/p^l)^x with their conductor exponents."""
    import itertools

    gens = ring.unit_group_basis()
    out = []
    for combo in itertools.product(*[range(o) for _, o in gens]):
        out.append(MultChar(ring, tuple(combo)))
    if len(out) != ring.unit_count:
        raise FieldError("character count mismatch")
    return out


def all_char_values(ring: ResidueRing):
    """(characters, value matrix): entry [i, j] = chi_i(unit_j), vectorized."""
    chars = enumerate_mult_chars(ring)
    gens = ring.unit_group_basis()
    dlog = ring.dlog_table()
    orders = np.array([o for _, o in gens], dtype=float)
    expo_units = np.array([dlog[u] for u in ring.units], dtype=float)  # n x k
    expo_chars = np.array([c.exponents for c in chars], dtype=float)  # n x k
    rot = expo_chars @ (expo_units / orders).T
    return chars, np.exp(2j * np.pi * rot)


def additive_char_eval(ring: ResidueRing, chi: AddCharLocal, x) -> complex:
    """psi_v(pi^-shift x) for a field element x with denominator at P only."""
    ctx = ring.ctx
    x = ctx.elem(x)
    P = ring.prime
    n = x.denominator()
    nn = n
    while nn % P.p == 0:
        nn //= P.p
    if nn != 1:
        raise FieldError("denominator of x not supported at P")
    for Q in ctx.factor_rational_prime(P.p):
        if Q is not P and not x.is_zero() and Q.valuation(x) < 0:
            raise FieldError("denominator of x not supported at P")
    pim = P.uniformizer.inverse() ** chi.shift if chi.shift else ctx.one
    return rot_to_complex(additive_char_rot(P, pim * x))


def gauss_sum(ring: ResidueRing, eta: MultChar, psi: AddCharLocal) -> complex:
    """G(eta, psi) = integral of eta * psi over O^x with vol(O^x) = 1.

    Computed as the exact average over units of a sufficiently deep
    quotient; the ring level must majorize both conductors.
    """
    need = max(eta.conductor, psi.conductor, 1)
    if need > ring.level:
        raise FieldError(f"ring level {ring.level} too shallow (need {need})")
    vals = eta.values_on(ring.units) * ring.psi_values_on(psi.shift, ring.units)
    return complex(vals.sum() / ring.unit_count)


def gauss_sum_predicted(r: int, s: int, q: int):
    """Exact prediction for G(eta, psi) with conductors r = a(eta), s = a(psi).

    Returns (kind, value): kind 'exact' when the value is forced, or
    'magnitude' for the primitive case r = s >= 1 where only |G| is
    determined.  Three cases: eta ramified with mismatched conductor
    gives 0 (on either side); the matched case has |G| = q^(-n/2)/(1-1/q);
    eta unramified reduces to the unit average of psi, which is 1 for
    s <= 0, -1/(q-1) at s = 1, and 0 beyond.
    """
    if r == 0:
        if s <= 0:
            return "exact", 1.0
        if s == 1:
            return "exact", -1.0 / (q - 1)
        return "exact", 0.0
    if s != r:
        return "exact", 0.0
    return "magnitude", q ** (-r / 2.0) / (1.0 - 1.0 / q)


def _prime_factors(n):
    out = []
    d = 2
    while d * d <= n:
        while n % d == 0:
            out.append(d)
            n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def _group_order(x, mul, one, n):
    order = n
    for p in set(_prime_factors(n)):
        while order % p == 0:
            y = _group_pow(x, order // p, mul, one)
            if y != one:
                break
            order //= p
    return order


def _group_pow(x, k, mul, one):
    out = one
    base = x
    while k:
        if k & 1:
            out = mul(out, base)
        base = mul(base, base)
        k >>= 1
    return out


def _abelian_basis(elements, mul, one):
    """Direct-product basis [(g, order), ...] of a finite abelian group.

    Splits off a cyclic factor of maximal order M, recurses on the
    quotient via canonical coset representatives, and lifts each quotient
    generator x of order m using x^m = g^t with m | t (valid since M is
    maximal), replacing x by x * g^(-t/m).
    """
    n = len(elements)
    if n == 1:
        return []
    g = None
    g_ord = 0
    for x in elements:
        o = _group_order(x, mul, one, n)
        if o > g_ord or (o == g_ord and x < g):
            g, g_ord = x, o
    powers = [one]
    for _ in range(g_ord - 1):
        powers.append(mul(powers[-1], g))
    power_index = {p: t for t, p in enumerate(powers)}
    g_inv = powers[-1] if g_ord > 1 else one  # g^(M-1) = g^-1

    canon = {}
    reps = []
    for x in elements:
        if x in canon:
            continue
        orbit = [mul(x, h) for h in powers]
        rep = min(orbit)
        for y in orbit:
            canon[y] = rep
        reps.append(rep)

    def mul_q(a, b):
        return canon[mul(a, b)]

    sub_basis = _abelian_basis(sorted(set(reps)), mul_q, canon[one])
    out = [(g, g_ord)]
    for xbar, m in sub_basis:
        t = power_index[_group_pow(xbar, m, mul, one)]
        x = xbar
        if t:
            corr = _group_pow(g_inv, t // m, mul, one)
            x = mul(xbar, corr)
        out.append((x, m))
    return out
