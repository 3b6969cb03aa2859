"""Inert test functions and the dyadic partition of unity.

An inert function has unit-scale compact support and bounded
multiplicative derivatives.  Internally h(y) = g(log y) with g a
Chebyshev series on the log-support, so (y d/dy)^n h is just the n-th
plain derivative of g: differentiation, sup bounds and Mellin
quadrature all come from the Chebyshev backbone.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from numpy.polynomial import chebyshev as _cheb

from .nf import FieldError


@lru_cache(maxsize=64)
def _leggauss(n):
    return np.polynomial.legendre.leggauss(n)


def _bump01(u):
    """C-infinity bump on (0,1), normalized to peak 1 at u = 1/2."""
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    inside = (u > 0) & (u < 1)
    v = u[inside]
    out[inside] = np.exp(4.0 - 1.0 / (v * (1 - v)))
    return out


class InertFunction:
    """Compactly supported smooth function of y > 0, Chebyshev-backed."""

    def __init__(self, cheb_series, t_lo, t_hi):
        self.g = cheb_series
        self.t_lo = t_lo
        self.t_hi = t_hi

    @classmethod
    def from_callable(cls, f, y_lo, y_hi, deg=220):
        """Fit f on [y_lo, y_hi] (f must vanish smoothly at the ends)."""
        t_lo, t_hi = math.log(y_lo), math.log(y_hi)
        g = _cheb.Chebyshev.interpolate(
            lambda t: f(np.exp(t)), deg, domain=[t_lo, t_hi]
        )
        return cls(g, t_lo, t_hi)

    @classmethod
    def bump(cls, y_lo=0.5, y_hi=2.5, deg=220):
        """Standard positive inert bump supported on [y_lo, y_hi]."""
        t_lo, t_hi = math.log(y_lo), math.log(y_hi)

        def f(y):
            t = np.log(np.maximum(np.asarray(y, dtype=float), 1e-300))
            return _bump01((t - t_lo) / (t_hi - t_lo))

        return cls.from_callable(f, y_lo, y_hi, deg=deg)

    @property
    def support(self):
        return (math.exp(self.t_lo), math.exp(self.t_hi))

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        out = np.zeros_like(y)
        pos = y > 0
        t = np.full_like(y, self.t_lo - 1.0)
        t[pos] = np.log(y[pos])
        inside = (t >= self.t_lo) & (t <= self.t_hi)
        out[inside] = self.g(t[inside])
        return out if out.shape else float(out)

    def log_deriv(self, n=1):
        """(y d/dy)^n applied to this function, as a new InertFunction."""
        return InertFunction(self.g.deriv(n), self.t_lo, self.t_hi)

    def deriv_bound(self, n, grid=2000):
        """sup of |(y d/dy)^n h| sampled on a dense grid."""
        t = np.linspace(self.t_lo, self.t_hi, grid)
        return float(np.max(np.abs(self.g.deriv(n)(t)))) if n else float(
            np.max(np.abs(self.g(t)))
        )

    def l1_mult(self, n=0, grid=4000):
        """integral of |(y d/dy)^n h| d^x y (trapezoid on the log line)."""
        t = np.linspace(self.t_lo, self.t_hi, grid)
        vals = np.abs(self.g.deriv(n)(t)) if n else np.abs(self.g(t))
        return float(np.trapezoid(vals, t))

    def mellin(self, s, nodes=None):
        """M(h, s) = integral h(y) y^s d^x y, Gauss-Legendre on the log line.

        ``s`` may be a complex scalar or array; node count scales with
        |im s| so oscillation stays resolved, and large s-arrays are
        evaluated in chunks to bound the kernel matrix.
        """
        s = np.asarray(s, dtype=complex)
        scalar = not s.shape
        sa = np.atleast_1d(s)
        smax = float(np.max(np.abs(sa.imag))) if sa.size else 0.0
        if nodes is None:
            nodes = int(80 + 1.5 * smax * (self.t_hi - self.t_lo))
        nodes = min(-(-nodes // 128) * 128, 6016)  # quantized for the cache
        x, w = _leggauss(nodes)
        t = 0.5 * (self.t_hi - self.t_lo) * x + 0.5 * (self.t_hi + self.t_lo)
        gw = self.g(t) * w * 0.5 * (self.t_hi - self.t_lo)
        out = np.empty(sa.shape, dtype=complex)
        chunk = max(1, 2_000_000 // nodes)
        for i in range(0, sa.size, chunk):
            blk = sa.reshape(-1)[i : i + chunk]
            out.reshape(-1)[i : i + chunk] = np.exp(np.multiply.outer(blk, t)) @ gw
        return complex(out[0]) if scalar else out.reshape(s.shape)

    def fourier(self, xi, nodes=None):
        """hat h(xi) = integral h(y) e^(-2 pi i xi y) dy over the support."""
        xi = np.asarray(xi, dtype=float)
        y_lo, y_hi = self.support
        span = y_hi - y_lo
        ximax = float(np.max(np.abs(xi))) if xi.size else 0.0
        if nodes is None:
            nodes = int(120 + 8 * ximax * span)
        nodes = min(-(-nodes // 128) * 128, 8064)
        x, w = _leggauss(nodes)
        y = 0.5 * span * x + 0.5 * (y_hi + y_lo)
        hv = self(y)
        ker = np.exp(-2j * np.pi * np.multiply.outer(xi, y))
        out = (ker * (hv * w)).sum(axis=-1) * 0.5 * span
        return out if out.shape else complex(out)


class DyadicPartition:
    """Normalized g with sum over j of g(t / 2^j) = 1 for all t > 0."""

    def __init__(self, seed: InertFunction):
        lo, hi = seed.support
        if hi / lo > 4.0 + 1e-9:
            raise FieldError("seed support must fit inside a ratio-4 window")
        probe = np.exp(np.linspace(0, math.log(2), 97))
        if np.min(seed(probe)) < -1e-12:
            raise FieldError("seed must be nonnegative on [1, 2]")
        if np.min(self._raw_total(seed, probe)) <= 1e-12:
            raise FieldError("seed has a zero in the dyadic sweep (no mass on [1,2])")
        self.seed = seed

    @staticmethod
    def _raw_total(seed, t):
        t = np.asarray(t, dtype=float)
        lo, hi = seed.support
        jmin = np.floor(np.log2(np.min(t) / hi)) - 1
        jmax = np.ceil(np.log2(np.max(t) / lo)) + 1
        total = np.zeros_like(t)
        for j in range(int(jmin), int(jmax) + 1):
            total += seed(t / 2.0**j)
        return total

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        scalar = not t.shape
        t = np.atleast_1d(t)
        out = self.seed(t) / self._raw_total(self.seed, t)
        return float(out[0]) if scalar else out

    def term(self, t, j):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return self.seed(t / 2.0**j) / self._raw_total(self.seed, t)

    def partition_residual(self, grid=1000, t_lo=1e-4, t_hi=1e4):
        t = np.exp(np.linspace(math.log(t_lo), math.log(t_hi), grid))
        lo, hi = self.seed.support
        jmin = int(np.floor(np.log2(t_lo / hi))) - 1
        jmax = int(np.ceil(np.log2(t_hi / lo))) + 1
        total = np.zeros_like(t)
        counts = np.zeros_like(t)
        for j in range(jmin, jmax + 1):
            term = self.term(t, j)
            total += term
            counts += (np.abs(term) > 1e-13).astype(float)
        return float(np.max(np.abs(total - 1.0))), int(np.max(counts))


def dyadic_partition(seed=None):
    """Build the dyadic partition of unity from a seed inert function."""
    if seed is None:
        seed = InertFunction.bump(0.76, 2.99)
    return DyadicPartition(seed)
