"""Kloosterman sums, twisted variants, correlation sums, global products.

Conventions.  psi with conductor exponent s is realized as
x -> psi_v(pi^-(s + d_v) x) where d_v = v(different); the normalized sum is

    Kl_eta(omega; l, psi) = q^(-l/2) sum_u eta(u) psi(pi^-l u pi^s) psi(pi^l u^-1 omega)

over units u of O/p^l, with Kl(.; 0) = 1.  The correlation sum averages
Kl_eta(a omega_1; l_1) conj(Kl_eta(a omega_2; l_2)) psi(gamma a) over
a in O/p^max(l1,l2).  Two evaluators are provided: plain brute force and
the stationary-phase reduction (the a-sum collapse plus repeated
peeling of one residue layer), which must agree to 1e-9.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .nf import FieldError, PrimeIdealData
from .residues import AddCharLocal, MultChar, ResidueRing, build_residue_ring, rot_to_complex


class RegimeNotice(FieldError):
    """Raised only internally; correlation falls back to brute force."""


def _ring_cache(prime: PrimeIdealData, level: int, _cache={}):
    key = (id(prime), level)
    if key not in _cache:
        _cache[key] = build_residue_ring(prime, level)
    return _cache[key]


@dataclass
class KloostermanSpec:
    ring: ResidueRing
    omega: object  # FieldElement with v(omega) >= -2l + s
    eta: MultChar = None
    psi_conductor: int = 0
    o: object = None  # defaults to pi^s

    def __post_init__(self):
        ctx = self.ring.ctx
        P = self.ring.prime
        s = self.psi_conductor
        l = self.ring.level
        if self.o is None:
            self.o = P.uniformizer**s if s >= 0 else P.uniformizer.inverse() ** (-s)
        if not self.omega.is_zero() and P.valuation(self.omega) < -2 * l + s:
            raise FieldError("v(omega) < -2l + a(psi)")
        if P.valuation(self.o) < s:
            raise FieldError("v(o) < a(psi)")
        if self.eta is not None and self.ring.char_conductor(self.eta) > l:
            raise FieldError("a(eta) > l")


def _phase_form(ring: ResidueRing, arg_shift: int, mult):
    """Rotation linear form u -> psi_v(pi^-arg_shift * mult * u) on coords."""
    ctx = ring.ctx
    P = ring.prime
    from .residues import additive_char_rot

    pim = P.uniformizer.inverse() ** arg_shift if arg_shift > 0 else P.uniformizer ** (-arg_shift)
    rots = []
    for i in range(ctx.degree):
        e = ctx.elem([int(j == i) for j in range(ctx.degree)])
        rots.append(additive_char_rot(P, pim * mult * e))
    for row in ring.basis:
        v = sum(Fraction(c) * r for c, r in zip(row, rots))
        if v.denominator != 1:
            raise FieldError("phase not well-defined at this ring level")
    return rots


def _phase_values(ring, rots, elements):
    arr = np.array([[int(c) for c in t] for t in elements], dtype=float)
    r = arr @ np.array([float(x) for x in rots])
    return np.exp(2j * np.pi * r)


def _unit_inverse_perm(ring):
    if getattr(ring, "_inv_perm", None) is None:
        idx = {u: i for i, u in enumerate(ring.units)}
        perm = np.empty(len(ring.units), dtype=int)
        for i, u in enumerate(ring.units):
            perm[i] = idx[ring.inv_unit(u)]
        ring._inv_perm = perm
    return ring._inv_perm


def kloosterman_sum(spec: KloostermanSpec, normalized=True) -> complex:
    """S_eta(o, omega; l, psi), normalized by q^(-l/2) when requested."""
    ring = spec.ring
    ctx = ring.ctx
    P = ring.prime
    l = ring.level
    s = spec.psi_conductor
    d_v = ctx.different_exponent(P)
    # psi(pi^-l u o) = psi_v(pi^-(s+d) pi^-l o u): linear form with mult o
    f1 = _phase_form(ring, s + d_v + l, spec.o)
    v1 = _phase_values(ring, f1, ring.units)
    # psi(pi^l u^-1 omega) = psi_v(pi^-(s+d-l) omega u^-1)
    f2 = _phase_form(ring, s + d_v - l, spec.omega)
    v2 = _phase_values(ring, f2, ring.units)[_unit_inverse_perm(ring)]
    if spec.eta is None or spec.eta.is_trivial():
        ev = np.ones(len(ring.units))
    else:
        ev = np.array([rot_to_complex(spec.eta.rot_at(ring, u)) for u in ring.units])
    total = complex((ev * v1 * v2).sum())
    return total / ring.q ** (l / 2.0) if normalized else total


def kloosterman_value(prime, level, omega, eta=None, psi_conductor=0, normalized=True):
    """Kl_eta(omega; l, psi) with the l = 0 convention Kl = 1."""
    if level == 0:
        return 1.0 + 0j
    ring = _ring_cache(prime, level)
    return kloosterman_sum(
        KloostermanSpec(ring, omega=omega, eta=eta, psi_conductor=psi_conductor),
        normalized=normalized,
    )


def kloosterman_table(ring: ResidueRing, eta=None, psi_conductor=0, eta_values=None):
    """Normalized Kl_eta(omega; l) for every class of omega.

    omega classes are parametrized as pi^(s-2l) c with c running over the
    ring; returns a dict {c (canonical tuple): value}.  Uses an FFT over
    Z/p^l when the ring is rational, otherwise a dense pairing matrix.
    ``eta_values`` may supply the character values on ring.units directly.
    """
    ctx = ring.ctx
    P = ring.prime
    l = ring.level
    s = psi_conductor
    d_v = ctx.different_exponent(P)
    f1 = _phase_form(ring, s + d_v + l, P.uniformizer**s if s >= 0 else P.uniformizer.inverse() ** (-s))
    v1 = _phase_values(ring, f1, ring.units)
    if eta_values is not None:
        a_u = np.asarray(eta_values) * v1
    elif eta is None or eta.is_trivial():
        a_u = v1
    else:
        ev = np.array([rot_to_complex(eta.rot_at(ring, u)) for u in ring.units])
        a_u = ev * v1
    perm = _unit_inverse_perm(ring)
    # b[w] = a at the unit whose inverse is w
    norm = ring.q ** (l / 2.0)
    if ctx.degree == 1:
        n = ring.size
        b = np.zeros(n, dtype=complex)
        for i, u in enumerate(ring.units):
            w = ring.units[perm[i]]
            b[w[0]] += a_u[i]
        # pairing rot(p^-l w c) = wc/p^l -> S(c) = sum_w b[w] e(wc/p^l)
        vals = n * np.fft.ifft(b)
        return {(c,): vals[c] / norm for c in range(n)}
    # dense pairing on coordinates: rot(pi^-(l+d) theta^(i+j))
    from .residues import additive_char_rot

    d = ctx.degree
    pim = P.uniformizer.inverse() ** (l + d_v)
    R = np.zeros((d, d))
    for i in range(d):
        for j in range(d):
            e = ctx.elem([int(k == i + j) for k in range(d)]) if i + j < d else None
            if e is None:
                x = ctx.theta ** (i + j)
            else:
                x = e
            R[i, j] = float(additive_char_rot(P, pim * x))
    W = np.array([[int(c) for c in ring.units[perm[i]]] for i in range(len(ring.units))], dtype=float)
    C = np.array([[int(c) for c in t] for t in ring.elements], dtype=float)
    phase = np.exp(2j * np.pi * (W @ R @ C.T))
    vals = a_u @ phase
    return {t: vals[i] / norm for i, t in enumerate(ring.elements)}


@dataclass
class CorrelationSpec:
    prime: PrimeIdealData
    l1: int
    l2: int
    omega1: object
    omega2: object
    gamma: object  # FieldElement, may be zero
    eta: MultChar = None
    psi_conductor: int = 0

    def __post_init__(self):
        P = self.prime
        s = self.psi_conductor
        for omega, l in ((self.omega1, self.l1), (self.omega2, self.l2)):
            if l > 0 and (not omega.is_zero()) and P.valuation(omega) < -2 * l + s:
                raise FieldError("v(omega_i) < -2 l_i + a(psi)")
        lmax = max(self.l1, self.l2)
        if not self.gamma.is_zero() and P.valuation(self.gamma) < -lmax + s:
            raise FieldError("v(gamma) < -max(l1,l2) + a(psi)")
        if self.eta is not None and not _eta_cond_ok(self.eta, min(self.l1, self.l2)):
            raise FieldError("a(eta) > min(l1, l2)")

    def xy(self):
        """The depth offsets x = v(w1-w2)+2l-s and y = v(gamma)+l-s (inf for 0)."""
        P = self.prime
        s = self.psi_conductor
        l = max(self.l1, self.l2)
        diff = self.omega1 - self.omega2
        x = math.inf if diff.is_zero() else P.valuation(diff) + 2 * l - s
        y = math.inf if self.gamma.is_zero() else P.valuation(self.gamma) + l - s
        return x, y


def _eta_cond_ok(eta, bound):
    return eta.is_trivial() or eta.ring.char_conductor(eta) <= bound


def correlation_brute(spec: CorrelationSpec) -> complex:
    P = spec.prime
    lmax = max(spec.l1, spec.l2)
    if lmax == 0:
        return 1.0 + 0j
    ring = _ring_cache(P, lmax)
    tables = {}
    for l, omega, key in ((spec.l1, spec.omega1, 1), (spec.l2, spec.omega2, 2)):
        if l == 0:
            tables[key] = None
        else:
            rl = _ring_cache(P, l)
            tables[key] = kloosterman_table(rl, eta=spec.eta, psi_conductor=spec.psi_conductor)
    s = spec.psi_conductor
    d_v = P.ctx.different_exponent(P)
    if spec.gamma.is_zero():
        pg = np.ones(len(ring.elements))
    else:
        fg = _phase_form(ring, s + d_v, spec.gamma)
        pg = _phase_values(ring, fg, ring.elements)
    pi = P.uniformizer
    total = 0.0 + 0.0j
    for idx, a in enumerate(ring.elements):
        term = pg[idx]
        for l, omega, key in ((spec.l1, spec.omega1, 1), (spec.l2, spec.omega2, 2)):
            if l == 0:
                val = 1.0 + 0j
            else:
                # class of a*omega as pi^(s-2l) c
                rl = _ring_cache(P, l)
                exp = 2 * l - s
                mult = pi**exp if exp >= 0 else pi.inverse() ** (-exp)
                val = tables[key][rl.reduce_elem(ring.lift(a) * omega * mult)]
            term = term * (val if key == 1 else np.conj(val))
        total += term
    return complex(total)


def correlation_stationary(spec: CorrelationSpec):
    """Stationary-phase evaluation; returns (value, notice).

    Covered regimes: equal levels with eta arbitrary of admissible
    conductor (Correlation I reduction), and unequal levels with trivial
    eta and exact-depth omegas (Correlation II collapse).  Outside the
    covered regimes, or at residue characteristic 2, falls back to brute
    force with a notice.
    """
    P = spec.prime
    if P.p == 2:
        return correlation_brute(spec), "residue characteristic 2: brute force"
    if spec.l1 == spec.l2:
        try:
            return _stationary_equal(spec), None
        except RegimeNotice as n:
            return correlation_brute(spec), str(n)
    if spec.eta is not None and not spec.eta.is_trivial():
        return correlation_brute(spec), "twisted unequal levels: brute force"
    try:
        return _stationary_unequal(spec), None
    except RegimeNotice as n:
        return correlation_brute(spec), str(n)


def correlation_sum(spec: CorrelationSpec, algorithm="bruteforce"):
    """Correlation sum via 'bruteforce' or 'stationary_phase'."""
    if algorithm == "bruteforce":
        return correlation_brute(spec), None
    if algorithm == "stationary_phase":
        return correlation_stationary(spec)
    raise FieldError(f"unknown algorithm {algorithm!r}")


def _shift_to_unramified(spec: CorrelationSpec):
    """Pre-shift psi to conductor 0: omega' = omega pi^-s, gamma' = gamma pi^-s."""
    P = spec.prime
    s = spec.psi_conductor
    if s == 0:
        return spec.omega1, spec.omega2, spec.gamma
    shift = P.uniformizer.inverse() ** s if s > 0 else P.uniformizer ** (-s)
    return spec.omega1 * shift, spec.omega2 * shift, spec.gamma * shift


def _stationary_equal(spec: CorrelationSpec) -> complex:
    P = spec.prime
    ctx = P.ctx
    l = spec.l1
    if l == 0:
        return 1.0 + 0j
    w1, w2, g = _shift_to_unramified(spec)
    if P.valuation(w1) != -2 * l or P.valuation(w2) != -2 * l:
        raise RegimeNotice("omega not at exact depth")
    eta = spec.eta
    if eta is not None and not eta.is_trivial() and not g.is_zero():
        raise RegimeNotice("twisted with gamma != 0 not covered")
    pi = P.uniformizer
    ring_l = _ring_cache(P, l)
    a_el = ring_l.reduce_elem(g * pi**l) if not g.is_zero() else ring_l.zero
    b_el = ring_l.reduce_elem((w1 - w2) * pi ** (2 * l)) if not (w1 - w2).is_zero() else ring_l.zero
    d_el = ring_l.reduce_elem(w1 * pi ** (2 * l))
    y = math.inf if g.is_zero() else P.valuation(g) + l
    x = math.inf if (w1 - w2).is_zero() else P.valuation(w1 - w2) + 2 * l

    # eta(omega1 / omega2): a unit of the level-l ring
    if eta is None or eta.is_trivial():
        front = 1.0 + 0j
    else:
        ratio = ring_l.mul(d_el, ring_l.inv_unit(ring_l.reduce_elem((w2) * pi ** (2 * l))))
        front = rot_to_complex(eta.rot_at(ring_l, ratio))

    # peel one residue layer while l_cur >= 2 and min(x, y) >= 1
    k = 0
    while (l - k) >= 2 and min(x - k if x is not math.inf else math.inf,
                               y - k if y is not math.inf else math.inf) >= 1:
        k += 1
    lstar = l - k
    ring_s = _ring_cache(P, lstar)
    d_v = ctx.different_exponent(P)
    # psi_v(pi^-(lstar+d) *) linear form on the small ring
    form = _phase_form(ring_s, lstar + d_v, ctx.one)

    pik_inv = pi.inverse() ** k if k else ctx.one
    a_star = ring_s.reduce_elem(g * pi**l * pik_inv) if not g.is_zero() else ring_s.zero
    b_star = (
        ring_s.reduce_elem((w1 - w2) * pi ** (2 * l) * pik_inv)
        if not (w1 - w2).is_zero()
        else ring_s.zero
    )
    d_inv_l = ring_l.inv_unit(d_el)
    total = 0.0 + 0.0j
    for u in ring_s.units:
        # admissibility: u a + d must be a unit at the original level
        ua_d = ring_l.add(ring_l.mul(ring_l.reduce_coords(list(u)), a_el), d_el)
        if not ring_l.is_unit(ua_d):
            continue
        if eta is None or eta.is_trivial():
            ev = 1.0 + 0j
        else:
            arg = ring_l.add(ring_l.one, ring_l.mul(ring_l.mul(ring_l.reduce_coords(list(u)), a_el), d_inv_l))
            ev = rot_to_complex(eta.rot_at(ring_l, arg))
        num = ring_s.add(ring_s.mul(u, a_star), b_star)
        den = ring_s.add(ring_s.mul(u, ring_s.reduce_coords(list(a_el))), ring_s.reduce_coords(list(d_el)))
        gval = ring_s.mul(ring_s.mul(u, num), ring_s.inv_unit(den))
        rot = sum(Fraction(int(c)) * r for c, r in zip(gval, form))
        total += ev * rot_to_complex(rot - math.floor(rot))
    return front * (P.residue_size**k) * total


def _stationary_unequal(spec: CorrelationSpec) -> complex:
    P = spec.prime
    ctx = P.ctx
    if spec.l1 < spec.l2:
        flipped = CorrelationSpec(
            P, spec.l2, spec.l1, spec.omega2, spec.omega1, -spec.gamma,
            eta=None, psi_conductor=spec.psi_conductor,
        )
        return complex(np.conj(_stationary_unequal(flipped)))
    l1, l2 = spec.l1, spec.l2
    w1, w2, g = _shift_to_unramified(spec)
    if P.valuation(w1) != -2 * l1 or (l2 > 0 and P.valuation(w2) != -2 * l2):
        raise RegimeNotice("omega not at exact depth")
    q = P.residue_size
    if g.is_zero() or P.valuation(g) > -l1:
        return 0.0 + 0.0j
    pi = P.uniformizer
    d_v = ctx.different_exponent(P)
    ring1 = _ring_cache(P, l1)
    c_el = ring1.reduce_elem(g * pi**l1)  # unit
    d1 = ring1.reduce_elem(w1 * pi ** (2 * l1))  # unit
    form1 = _phase_form(ring1, l1 + d_v, ctx.one)

    def psi1(coords):
        rot = sum(Fraction(int(c)) * r for c, r in zip(coords, form1))
        return rot_to_complex(rot - math.floor(rot))

    if l2 == 0:
        # u1^-1 = -c d1^-1; value q^(l1/2) psi0(pi^-l1 u1)
        u1 = ring1.inv_unit(ring1.neg(ring1.mul(c_el, ring1.inv_unit(d1))))
        return q ** (l1 / 2.0) * psi1(u1)
    ring2 = _ring_cache(P, l2)
    form2 = _phase_form(ring2, l2 + d_v, ctx.one)
    total = 0.0 + 0.0j
    t_mult = pi ** (l1 + l2) * w2  # times u2^-1 gives t, v = l1 - l2 >= 1
    for u2 in ring2.units:
        u2inv = ring2.inv_unit(u2)
        t = ring1.reduce_elem(ring2.lift(u2inv) * t_mult)
        tc = ring1.add(t, ring1.neg(c_el))  # t - c, a unit
        w = ring1.mul(d1, ring1.inv_unit(tc))
        rot2 = sum(Fraction(int(c)) * r for c, r in zip(u2, form2))
        total += psi1(w) * rot_to_complex(-(rot2 - math.floor(rot2)))
    return q ** ((l1 - l2) / 2.0) * total


def global_kloosterman(ctx, omega, d_ideal_primes, conjugate=False):
    """Kl(omega; d; psi-circ) = product over v | d of local normalized sums.

    ``d_ideal_primes`` is a list of (PrimeIdealData, exponent); psi-circ
    is the unramified twist psi(pi^-v(D) .), so each local factor uses
    conductor 0.  The empty product is 1.
    """
    val = 1.0 + 0j
    for P, e in d_ideal_primes:
        if e == 0:
            continue
        if not omega.is_zero() and P.valuation(omega) < -2 * e:
            raise FieldError("v(omega) < -2 v(d) at some place")
        loc = kloosterman_value(P, e, omega, psi_conductor=0)
        val *= np.conj(loc) if conjugate else loc
    return complex(val)
