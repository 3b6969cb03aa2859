"""Arithmetic in a small monogenic number field.

The ring of integers is Z[theta] for a root theta of a monic irreducible
integer polynomial of degree <= 4.  Elements carry exact rational
coordinates in the power basis; ideals are integer HNF lattices with a
denominator.  Archimedean data uses mpmath at configurable precision with
the normalized absolute values (complex places take the square of the
usual modulus, so the product over places equals |N(x)|).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath as mp
import numpy as np
import sympy

from .hnf import (
    hnf,
    det_upper,
    in_lattice,
    lattice_solve_fraction,
    mat_inv_fraction,
    reduce_mod,
    solve_integer,
)


class FieldError(ValueError):
    pass


@dataclass(frozen=True)
class FieldElement:
    """Element of F in the power basis; ``coords`` is a tuple of Fractions."""

    ctx: "NumberFieldCtx"
    coords: tuple

    def __add__(self, other):
        other = self.ctx.elem(other)
        return FieldElement(self.ctx, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other):
        other = self.ctx.elem(other)
        return FieldElement(self.ctx, tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self):
        return FieldElement(self.ctx, tuple(-a for a in self.coords))

    def __mul__(self, other):
        other = self.ctx.elem(other)
        return self.ctx._mul(self, other)

    __radd__ = __add__
    __rmul__ = __mul__

    def __rsub__(self, other):
        return self.ctx.elem(other) - self

    def __truediv__(self, other):
        other = self.ctx.elem(other)
        return self * other.inverse()

    def __pow__(self, n):
        if n < 0:
            return self.inverse() ** (-n)
        out = self.ctx.one
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.coords == other.coords
        try:
            return self.coords == self.ctx.elem(other).coords
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        return hash(self.coords)

    def __repr__(self):
        return f"Elem{tuple(str(c) for c in self.coords)}"

    def is_zero(self):
        return all(c == 0 for c in self.coords)

    def is_integral(self):
        return all(c.denominator == 1 for c in self.coords)

    def inverse(self):
        return self.ctx.invert(self)

    def norm(self):
        return self.ctx.norm(self)

    def trace(self):
        return self.ctx.trace(self)

    def denominator(self):
        d = 1
        for c in self.coords:
            d = d * c.denominator // math.gcd(d, c.denominator)
        return d


def _poly_discriminant(coeffs):
    x = sympy.Symbol("x")
    poly = sum(int(c) * x**i for i, c in enumerate(coeffs))
    if len(coeffs) == 2:  # linear: disc convention 1
        return 1
    return int(sympy.discriminant(sympy.Poly(poly, x)))


class NumberFieldCtx:
    """Monogenic number field with embeddings, units and class-group data.

    ``coeffs`` are the defining polynomial coefficients, constant term
    first, monic.  Unit and class data are supplied (from a field file)
    and verified, not computed.
    """

    def __init__(self, coeffs, name="F", dps=40):
        coeffs = [int(c) for c in coeffs]
        if coeffs[-1] != 1:
            raise FieldError("defining polynomial must be monic")
        self.name = name
        self.coeffs = coeffs
        self.degree = len(coeffs) - 1
        if self.degree < 1 or self.degree > 4:
            raise FieldError("only degrees 1..4 are supported")
        x = sympy.Symbol("x")
        self._sympoly = sympy.Poly(sum(c * x**i for i, c in enumerate(coeffs)), x)
        if self.degree > 1 and not self._sympoly.is_irreducible:
            raise FieldError(f"{name}: defining polynomial is reducible over Q")
        self.discriminant = _poly_discriminant(coeffs)

        d = self.degree
        # theta^k for k in [d, 2d-2] reduced to the power basis.
        red = {}
        base = [Fraction(-c) for c in coeffs[:-1]]
        red[d] = base
        for k in range(d + 1, 2 * d - 1):
            prev = red[k - 1]
            shifted = [Fraction(0)] + prev[:-1]
            top = prev[-1]
            red[k] = [s + top * b for s, b in zip(shifted, base)]
        self._theta_red = red

        self.zero = FieldElement(self, tuple(Fraction(0) for _ in range(d)))
        self.one = self.elem([1] + [0] * (d - 1))
        # over Q the defining polynomial is x, so theta = 0
        self.theta = self.elem([0, 1] + [0] * (d - 2)) if d > 1 else self.zero

        # Power sums of the roots via Newton's identities, for exact traces:
        # s_k = sum_{i<k} (-1)^{i-1} e_i s_{k-i} + (-1)^{k-1} k e_k  (k <= d).
        e = [Fraction((-1) ** k * coeffs[d - k]) for k in range(d + 1)]
        s = [Fraction(d)]
        for k in range(1, 2 * d - 1):
            acc = Fraction(0)
            for i in range(1, min(k - 1, d) + 1):
                acc += (-1) ** (i - 1) * e[i] * s[k - i]
            if k <= d:
                acc += (-1) ** (k - 1) * k * e[k]
            s.append(acc)
        self._power_sums = s
        self.trace_matrix = [[s[i + j] for j in range(d)] for i in range(d)]

        # Embeddings at configurable precision.
        self.dps = dps
        with mp.workdps(dps):
            if d == 1:
                roots = [mp.mpf(0)]
            else:
                roots = mp.polyroots([mp.mpf(c) for c in reversed(coeffs)], maxsteps=200, extraprec=120)
            tol = mp.mpf(10) ** (-dps // 2)
            real_roots = sorted([r.real for r in roots if abs(r.imag) < tol])
            cplx = [r for r in roots if r.imag >= tol]
            cplx = sorted(cplx, key=lambda r: (mp.nstr(r.real, 12), mp.nstr(r.imag, 12)))
        self.real_embeddings = [mp.mpf(r) for r in real_roots]
        self.complex_embeddings = [mp.mpc(r) for r in cplx]
        self.signature = (len(self.real_embeddings), len(self.complex_embeddings))
        if self.signature[0] + 2 * self.signature[1] != self.degree:
            raise FieldError("signature inconsistent with degree")
        self.places = [("real", r) for r in self.real_embeddings] + [
            ("complex", c) for c in self.complex_embeddings
        ]
        self.num_places = len(self.places)

        self.different = None  # set lazily; principal ideal (f'(theta))
        self.units = None
        self.class_reps = None
        self._prime_cache = {}

    # ------------------------------------------------------------------
    # element arithmetic

    def elem(self, coords):
        if isinstance(coords, FieldElement):
            if coords.ctx is not self:
                raise FieldError("element from a different field")
            return coords
        if isinstance(coords, (int, Fraction)):
            c = [Fraction(coords)] + [Fraction(0)] * (self.degree - 1)
            return FieldElement(self, tuple(c))
        coords = [Fraction(c) for c in coords]
        if len(coords) != self.degree:
            raise FieldError("coordinate length mismatch")
        return FieldElement(self, tuple(coords))

    def _mul(self, a, b):
        d = self.degree
        raw = [Fraction(0)] * (2 * d - 1)
        for i, ai in enumerate(a.coords):
            if ai == 0:
                continue
            for j, bj in enumerate(b.coords):
                if bj == 0:
                    continue
                raw[i + j] += ai * bj
        out = list(raw[:d])
        for k in range(d, 2 * d - 1):
            if raw[k] != 0:
                red = self._theta_red[k]
                for i in range(d):
                    out[i] += raw[k] * red[i]
        return FieldElement(self, tuple(out))

    def mul_matrix(self, a):
        """Rows are the coordinates of a*theta^i."""
        rows = []
        cur = a
        for _ in range(self.degree):
            rows.append(list(cur.coords))
            cur = cur * self.theta if self.degree > 1 else cur
        if self.degree == 1:
            rows = [list(a.coords)]
        return rows

    def norm(self, a):
        rows = self.mul_matrix(a)
        n = self.degree
        m = [r[:] for r in rows]
        det = Fraction(1)
        for col in range(n):
            piv = next((i for i in range(col, n) if m[i][col] != 0), None)
            if piv is None:
                return Fraction(0)
            if piv != col:
                m[col], m[piv] = m[piv], m[col]
                det = -det
            det *= m[col][col]
            inv = 1 / m[col][col]
            for i in range(col + 1, n):
                if m[i][col] != 0:
                    f = m[i][col] * inv
                    m[i] = [x - f * y for x, y in zip(m[i], m[col])]
        return det

    def trace(self, a):
        return sum(c * s for c, s in zip(a.coords, self._power_sums[: self.degree]))

    def invert(self, a):
        if a.is_zero():
            raise ZeroDivisionError("inverse of zero")
        # Extended Euclid for a(x) and f(x) over Q.
        d = self.degree
        f = [Fraction(c) for c in self.coeffs]
        g = list(a.coords)

        def polydiv(num, den):
            num = num[:]
            q = [Fraction(0)] * max(1, len(num) - len(den) + 1)
            dn = len(den) - 1
            while len(num) - 1 >= dn and any(num):
                while num and num[-1] == 0:
                    num.pop()
                if len(num) - 1 < dn:
                    break
                c = num[-1] / den[-1]
                k = len(num) - 1 - dn
                q[k] = c
                for i in range(len(den)):
                    num[k + i] -= c * den[i]
                num.pop()
            return q, num

        r0, r1 = f, g
        t0, t1 = [Fraction(0)], [Fraction(1)]
        while True:
            r1t = r1[:]
            while r1t and r1t[-1] == 0:
                r1t.pop()
            if len(r1t) <= 1:
                break
            q, r = polydiv(r0, r1t)
            qt1 = _polymul(q, t1)
            t0, t1 = t1, _polysub(t0, qt1)
            r0, r1 = r1t, r
        while r1 and r1[-1] == 0:
            r1.pop()
        if not r1:
            raise FieldError("element not invertible (defining poly not coprime)")
        c = r1[0]
        inv_coords = [ti / c for ti in t1]
        inv_coords = (inv_coords + [Fraction(0)] * d)[:d]
        # reduce any degree overflow through the field (shouldn't happen: deg t1 < d)
        return FieldElement(self, tuple(inv_coords))

    # ------------------------------------------------------------------
    # archimedean embeddings

    def embed(self, a, place_index, dps=None):
        kind, root = self.places[place_index]
        with mp.workdps(dps or self.dps):
            val = mp.mpf(0) if kind == "real" else mp.mpc(0)
            p = mp.mpf(1) if kind == "real" else mp.mpc(1)
            for c in a.coords:
                val += mp.mpf(c.numerator) / mp.mpf(c.denominator) * p
                p = p * root
            return val

    def abs_place(self, a, place_index, dps=None):
        """Normalized absolute value: complex places take the squared modulus."""
        kind, _ = self.places[place_index]
        v = self.embed(a, place_index, dps=dps)
        m = abs(v)
        return m if kind == "real" else m * m

    def embed_log(self, a, dps=None):
        """log|a|_v over archimedean places; sums to log|N(a)|."""
        if a.is_zero():
            raise FieldError("log embedding of zero")
        return [float(mp.log(self.abs_place(a, i, dps=dps))) for i in range(self.num_places)]

    def embed_all_float(self, a):
        out = []
        for i in range(self.num_places):
            v = self.embed(a, i)
            out.append(complex(v) if self.places[i][0] == "complex" else float(v))
        return out

    def place_dim(self, i):
        return 1 if self.places[i][0] == "real" else 2

    # ------------------------------------------------------------------
    # ideals

    def ideal(self, gens):
        gens = [self.elem(g) for g in gens]
        rows = []
        den = 1
        elems = []
        for g in gens:
            for i in range(self.degree):
                elems.append(g * self.theta**i if self.degree > 1 else g)
        for e in elems:
            for c in e.coords:
                den = den * c.denominator // math.gcd(den, c.denominator)
        for e in elems:
            rows.append([int(c * den) for c in e.coords])
        basis = hnf(rows)
        if len(basis) != self.degree:
            raise FieldError("ideal is not full rank (zero ideal?)")
        return IdealHNF(self, basis, den).canonical()

    def ideal_one(self):
        d = self.degree
        return IdealHNF(self, [[int(i == j) for j in range(d)] for i in range(d)], 1)

    def different_ideal(self):
        if self.different is None:
            fp = [Fraction(i * c) for i, c in enumerate(self.coeffs)][1:]
            fp_elem = self.elem((fp + [Fraction(0)] * self.degree)[: self.degree])
            if self.degree == 1:
                fp_elem = self.one
            self.different = self.ideal([fp_elem])
        return self.different

    def different_exponent(self, prime):
        return prime.ideal_valuation(self.different_ideal())

    # ------------------------------------------------------------------
    # prime factorization

    def factor_rational_prime(self, p):
        """Split (p) into primes via factorization of the defining poly mod p."""
        if p in self._prime_cache:
            return self._prime_cache[p]
        if not sympy.isprime(p):
            raise FieldError(f"{p} is not prime")
        x = sympy.Symbol("x")
        try:
            fac = sympy.Poly(self._sympoly, x, modulus=p).factor_list()
        except Exception as exc:  # pragma: no cover
            raise FieldError(f"modular factorization failed at p={p}: {exc}")
        out = []
        total = 0
        for g, e in fac[1]:
            gc = [int(c) for c in g.all_coeffs()]  # high degree first
            f_deg = len(gc) - 1
            g_elem = self.zero
            for c in gc:  # Horner; reduces through the field when deg g = degree
                g_elem = g_elem * self.theta + self.elem(c)
            ideal = self.ideal([self.elem(p), g_elem]) if not g_elem.is_zero() else self.ideal([self.elem(p)])
            prime = PrimeIdealData(self, p, f_deg, e, ideal)
            if e == 1:
                prime.uniformizer = self.elem(p)
            else:
                cand = g_elem
                if prime.valuation(cand) != 1:
                    cand = g_elem + self.elem(p)
                prime.uniformizer = cand
            if prime.valuation(prime.uniformizer) != 1:
                raise FieldError(f"could not construct uniformizer at p={p}")
            out.append(prime)
            total += f_deg * e
        if total != self.degree:
            raise FieldError(f"sum e_i f_i = {total} != degree at p={p}")
        out.sort(key=lambda P: (P.f, P.ideal.num_matrix_key()))
        self._prime_cache[p] = out
        return out


def _polymul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _polysub(a, b):
    n = max(len(a), len(b))
    a = a + [Fraction(0)] * (n - len(a))
    b = b + [Fraction(0)] * (n - len(b))
    return [x - y for x, y in zip(a, b)]


class IdealHNF:
    """Fractional ideal as an integer HNF basis with a denominator.

    Rows of ``num`` span ``den * I`` over Z in power-basis coordinates.
    """

    def __init__(self, ctx, num, den=1):
        self.ctx = ctx
        self.num = [list(map(int, r)) for r in num]
        self.den = int(den)

    def canonical(self):
        g = self.den
        for r in self.num:
            for x in r:
                g = math.gcd(g, x)
        if g > 1:
            self.num = [[x // g for x in r] for r in self.num]
            self.den //= g
        self.num = hnf(self.num)
        return self

    def num_matrix_key(self):
        return tuple(tuple(r) for r in self.num)

    def __eq__(self, other):
        return (
            isinstance(other, IdealHNF)
            and self.den == other.den
            and self.num_matrix_key() == other.num_matrix_key()
        )

    def __hash__(self):
        return hash((self.den, self.num_matrix_key()))

    def __repr__(self):
        return f"Ideal(den={self.den}, num={self.num})"

    def basis_elements(self):
        return [
            self.ctx.elem([Fraction(x, self.den) for x in row]) for row in self.num
        ]

    def norm(self):
        return abs(Fraction(det_upper(self.num), self.den**self.ctx.degree))

    def contains(self, elem):
        elem = self.ctx.elem(elem)
        scaled = [c * self.den for c in elem.coords]
        if any(c.denominator != 1 for c in scaled):
            return False
        return in_lattice(self.num, [int(c) for c in scaled])

    def multiply(self, other):
        if isinstance(other, FieldElement) or isinstance(other, (int, Fraction)):
            other = self.ctx.ideal([self.ctx.elem(other)])
        rows = []
        a_elems = self.basis_elements()
        b_elems = other.basis_elements()
        den = 1
        prods = [a * b for a in a_elems for b in b_elems]
        for e in prods:
            for c in e.coords:
                den = den * c.denominator // math.gcd(den, c.denominator)
        for e in prods:
            rows.append([int(c * den) for c in e.coords])
        return IdealHNF(self.ctx, hnf(rows), den).canonical()

    def add(self, other):
        den = self.den * other.den // math.gcd(self.den, other.den)
        rows = [[x * (den // self.den) for x in r] for r in self.num]
        rows += [[x * (den // other.den) for x in r] for r in other.num]
        return IdealHNF(self.ctx, hnf(rows), den).canonical()

    def power(self, k):
        if k == 0:
            return self.ctx.ideal_one()
        if k < 0:
            return self.inverse().power(-k)
        out = None
        base = self
        while k:
            if k & 1:
                out = base if out is None else out.multiply(base)
            base = base.multiply(base)
            k >>= 1
        return out

    def dual(self):
        """Trace-dual lattice I^vee = {x : Tr(x I) in Z}."""
        d = self.ctx.degree
        m = [[Fraction(x, self.den) for x in r] for r in self.num]
        t = self.ctx.trace_matrix
        a = [[sum(t[i][k] * m[j][k] for k in range(d)) for j in range(d)] for i in range(d)]
        ainv = mat_inv_fraction(a)
        den = 1
        for r in ainv:
            for x in r:
                den = den * x.denominator // math.gcd(den, x.denominator)
        rows = [[int(x * den) for x in r] for r in ainv]
        return IdealHNF(self.ctx, hnf(rows), den).canonical()

    def inverse(self):
        """I^{-1} = different * I^vee (monogenic: different = (f'(theta)))."""
        dual = self.dual()
        diff = self.ctx.different_ideal()
        return dual.multiply(diff)

    def intersect(self, other):
        return self.dual().add(other.dual()).dual()

    def enumerate_elements_by_box(self, radii):
        """Integer-combination sweep of basis vectors within embedding radii.

        ``radii`` bounds the plain embedding modulus per place.  Returns
        nonzero elements; exact membership is by construction.
        """
        ctx = self.ctx
        basis = self.basis_elements()
        emb = [[ctx.embed(b, i) for b in basis] for i in range(ctx.num_places)]

        rows = []
        for i in range(ctx.num_places):
            if ctx.places[i][0] == "real":
                rows.append([float(v) for v in emb[i]])
            else:
                rows.append([complex(v).real for v in emb[i]])
                rows.append([complex(v).imag for v in emb[i]])
        mat = np.array(rows)  # degree x degree (real coordinates)
        targets = []
        for i, r in enumerate(radii):
            if ctx.places[i][0] == "real":
                targets.append(r)
            else:
                targets += [r, r]
        inv = np.linalg.inv(mat)
        bounds = np.abs(inv) @ np.array(targets)
        ranges = [range(-int(b) - 1, int(b) + 2) for b in bounds]
        out = []
        for combo in itertools.product(*ranges):
            if not any(combo):
                continue
            e = ctx.zero
            for c, b in zip(combo, basis):
                if c:
                    e = e + ctx.elem(c) * b
            ok = True
            for i in range(ctx.num_places):
                if float(abs(ctx.embed(e, i))) > radii[i] + 1e-9:
                    ok = False
                    break
            if ok:
                out.append(e)
        return out

    def box_combos(self, radii):
        """Integer combinations z of the basis with |sigma_v(z.B)| <= r_v.

        Vectorized float filter with a small inflation margin: callers get
        a covering of the exact box, never a subset.  The zero vector is
        excluded.
        """
        ctx = self.ctx
        basis = self.basis_elements()
        rows = []
        for i in range(ctx.num_places):
            emb = [ctx.embed(b, i) for b in basis]
            if ctx.places[i][0] == "real":
                rows.append([float(v) for v in emb])
            else:
                rows.append([complex(v).real for v in emb])
                rows.append([complex(v).imag for v in emb])
        mat = np.array(rows)
        targets = []
        for i, r in enumerate(radii):
            if ctx.places[i][0] == "real":
                targets.append(r)
            else:
                targets += [r, r]
        bounds = np.abs(np.linalg.inv(mat)) @ np.array(targets)
        ranges = [np.arange(-int(b) - 1, int(b) + 2) for b in bounds]
        grids = np.meshgrid(*ranges, indexing="ij")
        combos = np.stack([g.ravel() for g in grids], axis=1)
        emb_pts = combos @ mat.T  # real coordinates per embedding row
        keep = np.ones(len(combos), dtype=bool)
        row = 0
        for i in range(ctx.num_places):
            if ctx.places[i][0] == "real":
                keep &= np.abs(emb_pts[:, row]) <= radii[i] * (1 + 1e-9) + 1e-12
                row += 1
            else:
                keep &= np.hypot(emb_pts[:, row], emb_pts[:, row + 1]) <= radii[i] * (1 + 1e-9) + 1e-12
                row += 2
        keep &= np.any(combos != 0, axis=1)
        return combos[keep]

    def lattice_points_in_box(self, radii):
        """Nonzero elements with |sigma_v(x)| <= r_v, with their coordinates."""
        ctx = self.ctx
        basis = self.basis_elements()
        out = []
        for z in self.box_combos(radii):
            e = ctx.zero
            for c, b in zip(z, basis):
                if c:
                    e = e + ctx.elem(int(c)) * b
            out.append((e, tuple(int(c) for c in z)))
        return out

    def find_generator(self):
        """A generator if the ideal is principal, else None (exhaustive search)."""
        n = self.norm()
        r = float(n) ** (1.0 / self.ctx.degree)
        for scale in (1.5, 3.0, 6.0):
            radii = []
            for i in range(self.ctx.num_places):
                radii.append(scale * r ** (1.0 if self.ctx.places[i][0] == "real" else 1.0))
            for e in self.enumerate_elements_by_box(radii):
                if abs(e.norm()) == n:
                    return e
        return None


@dataclass(eq=False)
class PrimeIdealData:
    """A prime ideal over p with residue degree f and ramification e."""

    ctx: NumberFieldCtx
    p: int
    f: int
    e: int
    ideal: IdealHNF
    uniformizer: FieldElement = None

    def __post_init__(self):
        self._power_cache = {0: self.ctx.ideal_one(), 1: self.ideal}

    @property
    def residue_size(self):
        return self.p**self.f

    def norm(self):
        return self.p**self.f

    def power(self, k):
        if k not in self._power_cache:
            kk = max(i for i in self._power_cache if i <= k)
            cur = self._power_cache[kk]
            for i in range(kk + 1, k + 1):
                cur = cur.multiply(self.ideal)
                self._power_cache[i] = cur
            cur = self._power_cache[k]
        return self._power_cache[k]

    def valuation(self, x):
        """v_P(x), exact; raises on x = 0 (infinite valuation)."""
        x = self.ctx.elem(x)
        if x.is_zero():
            raise FieldError("infinite valuation: x = 0")
        den = x.denominator()
        if den != 1:
            shift = 0
            while den % self.p == 0:
                den //= self.p
                shift += 1
            # the prime-to-p part of the denominator has valuation 0 at P
            y = x * self.ctx.elem(x.denominator())
            return self.valuation(y) - shift * self.e
        v = 0
        while self.power(v + 1).contains(x):
            v += 1
            if v > 256:  # safety; desk scale never gets here
                raise FieldError("valuation runaway")
        return v

    def ideal_valuation(self, I):
        """min valuation of I's basis elements = v_P(I) for a fractional ideal."""
        return min(self.valuation(b) for b in I.basis_elements())
