"""Smooth-box correlation: the direct/Poisson oracle pair."""

from fractions import Fraction

import pytest

from nfsums.boxcorr import BoxSpec, smooth_box_correlation
from nfsums.nf import FieldError


def test_trivial_is_plain_poisson(fq):
    ctx = fq.ctx
    spec = BoxSpec(fq, [], [], ctx.one, ctx.one, [40.0])
    d, p, rep = smooth_box_correlation(spec)
    assert rep["abs_err"] < 1e-10
    assert abs(d) > 1.0  # the box genuinely holds mass


def test_single_modulus(fq):
    ctx = fq.ctx
    P5 = ctx.factor_rational_prime(5)[0]
    spec = BoxSpec(fq, [(P5, 1)], [], ctx.elem(Fraction(1, 25)), ctx.one, [40.0])
    d, p, rep = smooth_box_correlation(spec)
    assert rep["rel_err"] < 1e-8
    assert rep["ratio"] <= 10.0


def test_main_term_configuration(fq):
    ctx = fq.ctx
    P5 = ctx.factor_rational_prime(5)[0]
    w = ctx.elem(Fraction(1, 25))
    spec = BoxSpec(fq, [(P5, 1)], [(P5, 1)], w, w, [40.0])
    d, p, rep = smooth_box_correlation(spec)
    assert rep["rel_err"] < 1e-8
    assert abs(d) > 1.0  # diagonal main term present
    assert rep["ratio"] <= 10.0


def test_indicator_depth(fq):
    ctx = fq.ctx
    P5 = ctx.factor_rational_prime(5)[0]
    spec = BoxSpec(
        fq, [(P5, 1)], [], ctx.elem(Fraction(1, 25)), ctx.one, [60.0], fin_j={P5: 1}
    )
    d, p, rep = smooth_box_correlation(spec)
    assert rep["rel_err"] < 1e-8


def test_real_quadratic_place(fsqrt2):
    ctx = fsqrt2.ctx
    P7 = [P for P in ctx.factor_rational_prime(7) if P.f == 1][0]
    w = ctx.one / (P7.uniformizer ** 2)
    spec = BoxSpec(fsqrt2, [(P7, 1)], [(P7, 1)], w, w, [12.0, 12.0])
    d, p, rep = smooth_box_correlation(spec)
    assert rep["rel_err"] < 1e-8
    assert rep["ratio"] <= 10.0


def test_precondition_errors(fq):
    ctx = fq.ctx
    P5 = ctx.factor_rational_prime(5)[0]
    with pytest.raises(FieldError):
        BoxSpec(fq, [(P5, 1)], [], ctx.elem(Fraction(1, 5**3)), ctx.one, [40.0])
    with pytest.raises(FieldError):
        BoxSpec(
            fq, [(P5, 1)], [], ctx.elem(Fraction(1, 25)), ctx.one, [40.0],
            fin_j={P5: -1},
        )
