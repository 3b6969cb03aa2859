"""Residue rings, characters with conductors, Gauss sums."""

import math
from fractions import Fraction

import pytest

from nfsums.nf import FieldError
from nfsums.residues import (
    AddCharLocal,
    MultChar,
    additive_char_eval,
    additive_char_rot,
    build_residue_ring,
    enumerate_mult_chars,
    gauss_sum,
    gauss_sum_predicted,
    ideal_coprime_split,
)


def quadratic_char(ring):
    return next(
        c
        for c in enumerate_mult_chars(ring)
        if not c.is_trivial()
        and all((2 * a) % o == 0 for a, (_, o) in zip(c.exponents, ring.unit_group_basis()))
    )


def test_ring_sizes_and_units(fq, fqi):
    P5 = fq.ctx.factor_rational_prime(5)[0]
    r1 = build_residue_ring(P5, 1)
    assert (r1.size, r1.unit_count) == (5, 4)
    r2 = build_residue_ring(P5, 2)
    assert (r2.size, r2.unit_count) == (25, 20)
    P3 = fqi.ctx.factor_rational_prime(3)[0]
    r9 = build_residue_ring(P3, 1)
    assert (r9.size, r9.unit_count) == (9, 8)
    # the unit group of F_9 is cyclic of order 8
    gens = r9.unit_group_basis()
    assert sorted(o for _, o in gens) == [8]


def test_ring_cap(fq):
    P2 = fq.ctx.factor_rational_prime(2)[0]
    with pytest.raises(FieldError):
        build_residue_ring(P2, 21)


def test_character_conductors(fq, fqi):
    P5 = fq.ctx.factor_rational_prime(5)[0]
    r1 = build_residue_ring(P5, 1)
    assert sorted(c.conductor for c in enumerate_mult_chars(r1)) == [0, 1, 1, 1]
    r2 = build_residue_ring(P5, 2)
    conds = sorted(c.conductor for c in enumerate_mult_chars(r2))
    assert conds == [0] + [1] * 3 + [2] * 16
    P3 = fqi.ctx.factor_rational_prime(3)[0]
    r9 = build_residue_ring(P3, 1)
    assert sorted(c.conductor for c in enumerate_mult_chars(r9)) == [0] + [1] * 7


def test_character_multiplicativity_exhaustive(fq):
    P5 = fq.ctx.factor_rational_prime(5)[0]
    ring = build_residue_ring(P5, 2)
    for chi in enumerate_mult_chars(ring)[:6]:
        for u in ring.units[:8]:
            for v in ring.units[:8]:
                lhs = chi.rot(ring.mul(u, v))
                rhs = chi.rot(u) + chi.rot(v)
                assert (lhs - rhs) % 1 == 0


def test_orthogonality(fq):
    P7 = fq.ctx.factor_rational_prime(7)[0]
    ring = build_residue_ring(P7, 2)
    for chi in enumerate_mult_chars(ring):
        s = sum(chi.value(u) for u in ring.units)
        if chi.is_trivial():
            assert abs(s - ring.unit_count) < 1e-9
        else:
            assert abs(s) < 1e-9


def test_additive_char_is_homomorphism(fqi):
    ctx = fqi.ctx
    P2 = ctx.factor_rational_prime(2)[0]
    pi_inv = P2.uniformizer.inverse()
    pts = [ctx.elem([a, b]) * pi_inv**3 for a in range(2) for b in range(2)]
    for x in pts:
        for y in pts:
            rx, ry = additive_char_rot(P2, x), additive_char_rot(P2, y)
            assert (additive_char_rot(P2, x + y) - rx - ry) % 1 == 0


def test_additive_conductor_matches_different(fqi, fsqrt2):
    # trivial on p^-d, nontrivial one layer deeper
    for field in (fqi, fsqrt2):
        ctx = field.ctx
        P = ctx.factor_rational_prime(2)[0]
        d = ctx.different_exponent(P)
        pi_inv = P.uniformizer.inverse()
        layer = [additive_char_rot(P, ctx.elem([a, b]) * pi_inv**d)
                 for a in range(3) for b in range(3)]
        assert all(r == 0 for r in layer)
        deeper = [additive_char_rot(P, ctx.elem([a, b]) * pi_inv ** (d + 1))
                  for a in range(3) for b in range(3)]
        assert any(r != 0 for r in deeper)


def test_additive_char_rational(fq):
    P5 = fq.ctx.factor_rational_prime(5)[0]
    assert additive_char_rot(P5, fq.ctx.elem(Fraction(1, 5))) == Fraction(1, 5)
    assert additive_char_rot(P5, fq.ctx.elem(3)) == 0
    ring = build_residue_ring(P5, 1)
    chi = AddCharLocal(ring, 1)
    val = additive_char_eval(ring, chi, fq.ctx.one)
    assert abs(val - complex(math.cos(2 * math.pi / 5), math.sin(2 * math.pi / 5))) < 1e-12
    with pytest.raises(FieldError):
        additive_char_eval(ring, chi, fq.ctx.elem(Fraction(1, 3)))


def test_coprime_split(fqi):
    ctx = fqi.ctx
    A = ctx.factor_rational_prime(2)[0].power(3)
    B = ctx.ideal([ctx.elem(15)])
    a, b = ideal_coprime_split(A, B)
    assert a + b == ctx.one
    assert A.contains(a) and B.contains(b)


def test_gauss_sum_classical(fq):
    P5 = fq.ctx.factor_rational_prime(5)[0]
    ring = build_residue_ring(P5, 1)
    eta = quadratic_char(ring)
    g = gauss_sum(ring, eta, AddCharLocal(ring, 1))
    assert abs(abs(g) - math.sqrt(5) / 4) < 1e-12
    triv = next(c for c in enumerate_mult_chars(ring) if c.is_trivial())
    assert abs(gauss_sum(ring, triv, AddCharLocal(ring, 0)) - 1.0) < 1e-12
    # a(psi) < a(eta) kills the sum
    assert abs(gauss_sum(ring, eta, AddCharLocal(ring, 0))) < 1e-12


def test_gauss_predicted_cases():
    assert gauss_sum_predicted(2, 1, 5) == ("exact", 0.0)
    assert gauss_sum_predicted(0, 0, 5) == ("exact", 1.0)
    assert gauss_sum_predicted(0, -1, 5) == ("exact", 1.0)
    assert gauss_sum_predicted(0, 1, 5) == ("exact", -0.25)
    assert gauss_sum_predicted(0, 2, 5) == ("exact", 0.0)
    kind, mag = gauss_sum_predicted(2, 2, 5)
    assert kind == "magnitude" and abs(mag - 5 ** (-1.0) / 0.8) < 1e-12


def test_gauss_law_exhaustive_small(fqi):
    """Every (eta, shift) pair on a ramified ring matches the case law."""
    ctx = fqi.ctx
    P2 = ctx.factor_rational_prime(2)[0]
    d = ctx.different_exponent(P2)
    ring = build_residue_ring(P2, 4)
    for eta in enumerate_mult_chars(ring):
        r = ring.char_conductor(eta)
        for shift in range(d - 1, d + ring.level + 1):
            s = shift - d
            psi = AddCharLocal(ring, shift)
            g = gauss_sum(ring, eta, psi)
            kind, pred = gauss_sum_predicted(r, s, P2.norm())
            if kind == "exact":
                assert abs(g - pred) < 1e-10, (r, s, g, pred)
            else:
                assert abs(abs(g) - pred) < 1e-10, (r, s, abs(g), pred)
