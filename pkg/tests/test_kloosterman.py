"""Kloosterman sums, the triviality law, and correlation evaluators."""

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from nfsums.fieldfile import load_field
from nfsums.kloosterman import (
    CorrelationSpec,
    KloostermanSpec,
    correlation_sum,
    global_kloosterman,
    kloosterman_table,
    kloosterman_value,
    kloosterman_sum,
    _ring_cache,
)
from nfsums.nf import FieldError
from nfsums.residues import build_residue_ring, enumerate_mult_chars


def test_rational_point_values(fq):
    ctx = fq.ctx
    P5 = ctx.factor_rational_prime(5)[0]
    ring = _ring_cache(P5, 1)
    omega = ctx.elem(Fraction(1, 25))
    S = kloosterman_sum(KloostermanSpec(ring, omega=omega), normalized=False)
    assert abs(S - (2 + 2 * math.cos(4 * math.pi / 5))) < 1e-12
    Kl = kloosterman_sum(KloostermanSpec(ring, omega=omega), normalized=True)
    assert abs(Kl - 0.17082039324993694) < 1e-10


def test_triviality_law(fq, fqi):
    for field, p in ((fq, 5), (fq, 7), (fqi, 3)):
        ctx = field.ctx
        P = ctx.factor_rational_prime(p)[0]
        q = P.norm()
        pi_inv = P.uniformizer.inverse()
        assert abs(kloosterman_value(P, 1, pi_inv) - (-(q**-0.5))) < 1e-12
        assert abs(kloosterman_value(P, 2, pi_inv**3)) < 1e-12
        assert abs(kloosterman_value(P, 3, pi_inv**5)) < 1e-12


def test_level_zero_is_one(fq):
    P5 = fq.ctx.factor_rational_prime(5)[0]
    assert kloosterman_value(P5, 0, fq.ctx.one) == 1.0 + 0j


def test_valuation_constraints_rejected(fq):
    ctx = fq.ctx
    P5 = ctx.factor_rational_prime(5)[0]
    ring = _ring_cache(P5, 1)
    with pytest.raises(FieldError):
        KloostermanSpec(ring, omega=ctx.elem(Fraction(1, 5**3)))


def test_table_matches_single_values(fqi):
    ctx = fqi.ctx
    P3 = ctx.factor_rational_prime(3)[0]
    ring = _ring_cache(P3, 1)
    tab = kloosterman_table(ring, psi_conductor=0)
    pi_inv = P3.uniformizer.inverse()
    for c in ring.elements:
        omega = ring.lift(c) * pi_inv**2
        direct = kloosterman_value(P3, 1, omega)
        assert abs(tab[c] - direct) < 1e-11


def test_parseval_consistency(fq):
    """sum_a |Kl(a w; l)|^2 two ways: tabulated values vs the opened double sum."""
    ctx = fq.ctx
    P5 = ctx.factor_rational_prime(5)[0]
    l = 2
    ring = _ring_cache(P5, l)
    tab = kloosterman_table(ring, psi_conductor=0)
    lhs = sum(abs(v) ** 2 for v in tab.values())
    # opened: q^-l sum_{u1, u2} sum_c e(pairing(c (u1^-1 - u2^-1)))
    #       = #{(u1, u2): u1 = u2} = phi(q^l)
    rhs = ring.unit_count
    assert abs(lhs - rhs) < 1e-8


def test_correlation_spec_example(fq):
    ctx = fq.ctx
    P5 = ctx.factor_rational_prime(5)[0]
    w = ctx.elem(Fraction(1, 25))
    spec = CorrelationSpec(P5, 1, 1, w, w, ctx.zero)
    a, _ = correlation_sum(spec, "bruteforce")
    b, notice = correlation_sum(spec, "stationary_phase")
    # includes the a = 0 term |Kl(0;1)|^2 = 1/5: total (p^2-p-1)/p + 1/p = 4
    assert abs(a - 4.0) < 1e-12
    assert abs(b - 4.0) < 1e-12 and notice is None


def test_vanishing_l_gt_y_gt_x(fq):
    ctx = fq.ctx
    for p in (3, 5, 7):
        P = ctx.factor_rational_prime(p)[0]
        pi_inv = P.uniformizer.inverse()
        for l in (2, 3):
            if p**l > 400:
                continue
            w1 = pi_inv ** (2 * l)
            w2 = ctx.elem(2) * pi_inv ** (2 * l)  # x = 0
            g = pi_inv ** (l - 1)  # y = 1, so l > y > x
            spec = CorrelationSpec(P, l, l, w1, w2, g)
            a, _ = correlation_sum(spec, "bruteforce")
            b, _ = correlation_sum(spec, "stationary_phase")
            assert abs(a) < 1e-9 and abs(b) < 1e-9


def test_correlation_ii_degenerate_cases(fq):
    """Deep omega1, l1 = 1, l2 = 0: the only survivor of the gamma-deep family."""
    ctx = fq.ctx
    P5 = ctx.factor_rational_prime(5)[0]
    pi_inv = P5.uniformizer.inverse()
    deep_w1 = pi_inv  # in p^(-2l+1) for l = 1
    spec0 = CorrelationSpec(P5, 1, 0, deep_w1, ctx.one, ctx.elem(Fraction(1, 5)))
    a, _ = correlation_sum(spec0, "bruteforce")
    assert abs(a) < 1e-12  # gamma in pi^-1 O^x
    spec1 = CorrelationSpec(P5, 1, 0, deep_w1, ctx.one, ctx.elem(2))
    a, _ = correlation_sum(spec1, "bruteforce")
    assert abs(a - (-math.sqrt(5))) < 1e-10  # gamma integral


def test_correlation_ii_vanishing_exact_depth(fq):
    ctx = fq.ctx
    P5 = ctx.factor_rational_prime(5)[0]
    pi_inv = P5.uniformizer.inverse()
    for (l1, l2) in ((2, 1), (3, 1), (2, 0), (3, 2)):
        w1 = pi_inv ** (2 * l1)
        w2 = pi_inv ** (2 * l2) if l2 else ctx.one
        # gamma one level shallower than -max: must vanish
        g = pi_inv ** (l1 - 1) if l1 > 1 else ctx.one
        spec = CorrelationSpec(P5, l1, l2, w1, w2, g)
        a, _ = correlation_sum(spec, "bruteforce")
        b, _ = correlation_sum(spec, "stationary_phase")
        assert abs(a) < 1e-9 and abs(b) < 1e-9


def grid_cases(ctx, P, lmax):
    q = P.norm()
    pi = P.uniformizer
    pi_inv = pi.inverse()
    for l1 in range(1, lmax + 1):
        for l2 in range(0, l1 + 1):
            if q ** max(l1, l2) > 400:
                continue
            for (u1, u2) in ((1, 1), (1, 2), (2, 3)):
                w1 = ctx.elem(u1) * pi_inv ** (2 * l1)
                w2 = ctx.elem(u2) * (pi_inv ** (2 * l2) if l2 else ctx.one)
                for vg in range(-max(l1, l2), 1):
                    g = ctx.elem(1) * (pi_inv ** (-vg)) if vg < 0 else ctx.one
                    yield l1, l2, w1, w2, g


@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_stationary_equals_brute_rational(p, fq):
    ctx = fq.ctx
    P = ctx.factor_rational_prime(p)[0]
    worst = 0.0
    for l1, l2, w1, w2, g in grid_cases(ctx, P, 3):
        spec = CorrelationSpec(P, l1, l2, w1, w2, g)
        a, _ = correlation_sum(spec, "bruteforce")
        b, _ = correlation_sum(spec, "stationary_phase")
        worst = max(worst, abs(a - b))
    assert worst < 1e-9


def test_stationary_equals_brute_twisted(fq):
    ctx = fq.ctx
    P5 = ctx.factor_rational_prime(5)[0]
    ring2 = build_residue_ring(P5, 2)
    pi_inv = P5.uniformizer.inverse()
    for eta in enumerate_mult_chars(ring2):
        if ring2.char_conductor(eta) > 2:
            continue
        spec = CorrelationSpec(
            P5, 2, 2, pi_inv**4, ctx.elem(3) * pi_inv**4, ctx.zero, eta=eta
        )
        a, _ = correlation_sum(spec, "bruteforce")
        b, _ = correlation_sum(spec, "stationary_phase")
        assert abs(a - b) < 1e-9


def test_shifted_psi_paths_agree(fq):
    ctx = fq.ctx
    P5 = ctx.factor_rational_prime(5)[0]
    w1 = ctx.elem(Fraction(1, 5))
    w2 = ctx.elem(Fraction(2, 5))
    spec = CorrelationSpec(P5, 1, 1, w1, w2, ctx.elem(2), psi_conductor=1)
    a, _ = correlation_sum(spec, "bruteforce")
    b, notice = correlation_sum(spec, "stationary_phase")
    assert abs(a - b) < 1e-9 and notice is None


def test_stationary_nonrational_field(fqi):
    ctx = fqi.ctx
    P3 = ctx.factor_rational_prime(3)[0]
    pi_inv = P3.uniformizer.inverse()
    w1 = pi_inv**2
    w2 = (ctx.one + ctx.theta) * pi_inv**2
    spec = CorrelationSpec(P3, 1, 1, w1, w2, ctx.zero)
    a, _ = correlation_sum(spec, "bruteforce")
    b, _ = correlation_sum(spec, "stationary_phase")
    assert abs(a - b) < 1e-9


def test_char_2_routed_to_bruteforce(fqi):
    ctx = fqi.ctx
    P2 = ctx.factor_rational_prime(2)[0]
    w = ctx.one / (P2.uniformizer**4)
    spec = CorrelationSpec(P2, 2, 2, w, w, ctx.zero)
    val, notice = correlation_sum(spec, "stationary_phase")
    assert notice is not None and "characteristic 2" in notice


def test_global_product(fq):
    ctx = fq.ctx
    P3 = ctx.factor_rational_prime(3)[0]
    P5 = ctx.factor_rational_prime(5)[0]
    assert global_kloosterman(ctx, ctx.one, []) == 1.0 + 0j
    w = ctx.elem(Fraction(1, 225))
    v = global_kloosterman(ctx, w, [(P3, 1), (P5, 1)])
    v3 = kloosterman_value(P3, 1, w)
    v5 = kloosterman_value(P5, 1, w)
    assert abs(v - v3 * v5) < 1e-12
    w5 = ctx.elem(Fraction(1, 25))
    assert abs(global_kloosterman(ctx, w5, [(P5, 1)]) - 0.17082039324993694) < 1e-10
    with pytest.raises(FieldError):
        global_kloosterman(ctx, ctx.elem(Fraction(1, 5**3)), [(P5, 1)])
