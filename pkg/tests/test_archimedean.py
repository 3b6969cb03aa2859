"""Mellin transforms, Bessel decay, gamma bounds, AFE kernels, dyadic partition."""

import math

import numpy as np
import pytest

from nfsums.inert import InertFunction, dyadic_partition
from nfsums.mellin import (
    GammaData,
    SmoothCutoff,
    afe_kernels,
    bessel_transform_real,
    convexity_tail_slope,
    gamma_ratio_bound_check,
    mellin_ibp_residual,
    mellin_numeric,
)
from nfsums.nf import FieldError


@pytest.fixture(scope="module")
def bump():
    return InertFunction.bump(0.5, 2.5)


def test_inert_basics(bump):
    assert bump(1.0) > 0
    assert bump(0.4) == 0.0 and bump(3.0) == 0.0
    assert bump.deriv_bound(0) <= 1.0 + 1e-9
    for n in range(1, 5):
        assert np.isfinite(bump.deriv_bound(n))


def test_mellin_scaling_shift_ibp(bump):
    Va = InertFunction.from_callable(lambda y: bump(2 * y), 0.25, 1.25)
    s = 1 + 1j
    resid = abs(mellin_numeric(Va, s) - 2.0 ** (-s) * mellin_numeric(bump, s))
    assert resid < 1e-9
    assert mellin_ibp_residual(bump, 2 + 3j, 1) < 1e-8
    assert mellin_ibp_residual(bump, 2 + 3j, 2) < 1e-8
    # a 20-function corpus of scaled/powered bumps
    rng = np.random.default_rng(0)
    for _ in range(20):
        a = float(rng.uniform(0.4, 2.5))
        lo, hi = 0.5 / a, 2.5 / a
        W = InertFunction.from_callable(lambda y, a=a: bump(a * y), lo, hi)
        s = complex(rng.uniform(0.5, 3.0), rng.uniform(-4, 4))
        resid = abs(mellin_numeric(W, s) - a ** (-s) * mellin_numeric(bump, s))
        assert resid < 1e-8


def test_bessel_linearity_and_sigma_invariance(bump):
    gd = GammaData((0.0, 0.0, 0.0), "real")
    v1 = bessel_transform_real(bump, gd, 1.0, sigma=1.0)
    scaled = InertFunction.from_callable(lambda y: 2.5 * bump(y), 0.5, 2.5)
    v2 = bessel_transform_real(scaled, gd, 1.0, sigma=1.0)
    assert abs(v2 - 2.5 * v1) < 1e-10
    vals = {sg: bessel_transform_real(bump, gd, 0.5, sigma=sg) for sg in (0.5, 1.0, 2.0)}
    assert max(abs(vals[sg] - vals[1.0]) for sg in (0.5, 2.0)) < 1e-7


def test_bessel_pole_guard(bump):
    gd = GammaData((0.4, 0.0, -0.4), "real")
    with pytest.raises(FieldError):
        bessel_transform_real(bump, gd, 1.0, sigma=0.3)


def test_bessel_small_y_slope(bump):
    gd = GammaData((0.0, 0.0, 0.0), "real")
    ys = [1e-3, 3e-3, 1e-2, 3e-2, 1e-1]
    bs = [abs(bessel_transform_real(bump, gd, y, sigma=1.0)) for y in ys]
    slope = float(np.polyfit(np.log(ys), np.log(bs), 1)[0])
    assert slope >= 0.6


def test_gamma_ratio_bound():
    gd = GammaData((0.1, -0.05, -0.05), "complex")
    rep = gamma_ratio_bound_check(gd, sigma=1.0)
    assert rep["symmetry_residual"] < 1e-12
    assert rep["C_meas"] <= 3 * 1.0 + 2
    assert rep["tail_monotone"]


def test_smooth_cutoff_mellin():
    h = SmoothCutoff()
    assert h(0.5) == 1.0 and h(2.5) == 0.0 and 0 < h(1.5) < 1
    # against direct quadrature
    s = 1.5 + 0.7j
    t = np.linspace(1e-6, 2.0, 200001)
    direct = np.trapezoid(h(t) * t ** (s - 1), t)
    assert abs(h.mellin(s) - direct) < 1e-7


def test_afe_kernels_shape():
    k = afe_kernels(1000.0, 0.2, [GammaData((0.0, 0.0, 0.0), "real")])
    tg = np.geomspace(k.A / 10, k.B * 10, 300)
    assert k.h_consistency(tg) < 1e-12
    h0v = k.h0(tg)
    assert np.all(h0v >= -1e-12) and np.all(h0v <= 1 + 1e-12)
    live = tg[np.abs(h0v) > 1e-12]
    assert live.size and live.min() >= k.D * 0.999999 and live.max() <= 2 * k.B * 1.000001
    with pytest.raises(FieldError):
        afe_kernels(1000.0, 0.7, [GammaData((0.0, 0.0, 0.0), "real")])


def test_afe_k0_bound_law():
    k = afe_kernels(1000.0, 0.2, [GammaData((0.0, 0.0, 0.0), "real")])
    t_star = 1000.0 ** -1.5
    for sg in (1.0, 2.0, 4.0):
        c_ref = abs(k.k0(t_star, sigma=sg)) / (1000.0 ** 1.5 * t_star) ** sg
        for t in np.geomspace(t_star * 1e-2, t_star, 5):
            assert abs(k.k0(t, sigma=sg)) <= 10 * c_ref * (1000.0 ** 1.5 * t) ** sg


def test_convexity_tail_exponent():
    slope, _ = convexity_tail_slope(0.2, [200.0, 400.0, 800.0, 1600.0])
    assert abs(slope - (0.25 - 0.1)) < 0.05


def test_dyadic_partition():
    dp = dyadic_partition()
    res, overlap = dp.partition_residual()
    assert res < 1e-12
    assert overlap <= 2
    # dyadic covariance: t and 2t see the same local pattern shifted by one j
    t = np.array([1.3])
    for j in range(-2, 3):
        a = dp.term(t, j)[0]
        b = dp.term(2 * t, j + 1)[0]
        assert abs(a - b) < 1e-12
    with pytest.raises(FieldError):
        dyadic_partition(InertFunction.bump(8.0, 16.0))  # no mass on [1, 2]
