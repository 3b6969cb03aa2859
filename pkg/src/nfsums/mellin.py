"""Numeric Mellin transforms, real-place Bessel transforms, AFE kernels.

Gamma factors follow Gamma_R(s) = pi^(-s/2) Gamma(s/2) and
Gamma_C(s) = 2 (2 pi)^(-s) Gamma(s); the archimedean epsilon factor is
carried as 1 (all checks here are magnitude or decay level).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import loggamma

from .inert import InertFunction, _leggauss
from .nf import FieldError


class QuadratureError(FieldError):
    def __init__(self, msg, achieved=None):
        super().__init__(msg)
        self.achieved = achieved


def mellin_numeric(h: InertFunction, s, tol=1e-10):
    """M(h, s) with a doubled-resolution error estimate.

    Raises QuadratureError when the two resolutions disagree above tol.
    """
    sa = np.atleast_1d(np.asarray(s, dtype=complex))
    base = int(80 + 1.5 * float(np.max(np.abs(sa.imag))) * (h.t_hi - h.t_lo))
    v1 = h.mellin(s, nodes=base)
    v2 = h.mellin(s, nodes=2 * base)
    err = float(np.max(np.abs(np.asarray(v1) - np.asarray(v2))))
    if err > tol * (1.0 + float(np.max(np.abs(np.asarray(v1))))):
        raise QuadratureError(f"Mellin quadrature not converged: {err:.2e}", achieved=err)
    return v2


def mellin_ibp_residual(h: InertFunction, s, m):
    """|M(h,s) - s^-m M((y d/dy)^m h, s)| for the integration-by-parts law."""
    lhs = mellin_numeric(h, s)
    rhs = mellin_numeric(h.log_deriv(m), s) / (-s) ** m
    return abs(lhs - rhs)


@dataclass(frozen=True)
class GammaData:
    """Archimedean parameters of a place: three alphas plus the place type."""

    alphas: tuple
    kind: str = "real"  # 'real' or 'complex'

    def shifted(self, j):
        """Twist shift: sgn^j adds j (real); frequency k adds |k|/2 (complex)."""
        return GammaData(tuple(a + j for a in self.alphas), self.kind)


def log_gamma_R(s):
    return -s / 2.0 * math.log(math.pi) + loggamma(s / 2.0)


def log_gamma_C(s):
    return math.log(2.0) - s * math.log(2.0 * math.pi) + loggamma(s)


def log_gamma_factor(gd: GammaData, s):
    """log of gamma(1 - s, rho, psi) = prod_a Gamma(s + conj a)/Gamma(1 - s + a)."""
    lg = log_gamma_R if gd.kind == "real" else log_gamma_C
    s = np.asarray(s, dtype=complex)
    out = np.zeros_like(s)
    for a in gd.alphas:
        out = out + lg(s + np.conj(a)) - lg(1 - s + a)
    return out


def bessel_transform_real(V: InertFunction, gd: GammaData, y, sigma=1.0,
                          t_max=None, tol=1e-12, sign_component=None):
    """Real-place Bessel transform of an inert V at the point y.

    B(y) = sum_j sgn(y)^j (1/2pi) int gamma(1-s, rho sgn^j) |y|^(1-s) M_j(-s) dt
    on re(s) = sigma; V is supported on y > 0 so M_0 = M_1 = M(V, -s).
    The contour is truncated adaptively off the Mellin decay; the tail
    estimate uses the multiplicative derivative bounds of V.
    """
    if gd.kind != "real":
        raise FieldError("bessel_transform_real is for real places")
    pole_edge = max(abs(np.real(a)) for a in gd.alphas)
    if sigma <= pole_edge:
        worst = max(gd.alphas, key=lambda a: abs(np.real(a)))
        raise FieldError(f"sigma = {sigma} inside pole region of alpha = {worst}")
    ay = abs(y)
    if ay == 0:
        raise FieldError("evaluate at nonzero y")
    if t_max is None:
        key = (tuple(gd.alphas), gd.kind, sigma, round(math.log10(tol)))
        cache = getattr(V, "_tmax_cache", None)
        if cache is None:
            cache = V._tmax_cache = {}
        if key not in cache:
            cache[key] = min(
                _adaptive_tmax(V, gd, sigma, tol), _mellin_support(V, sigma)
            )
        t_max = cache[key]
    n = int(max(2400, 40 * t_max))
    n += n % 2  # even count: grid avoids exact gamma poles on the real axis
    t = np.linspace(-t_max, t_max, n)
    s = sigma + 1j * t
    mell = V.mellin(-s)
    # below the float64 noise floor of the quadrature the Mellin values are
    # garbage and the gamma factor amplifies them; zero them instead
    floor = 3e-16 * max(1.0, float(np.max(np.abs(mell))))
    mell = np.where(np.abs(mell) < floor, 0.0, mell)
    total = 0.0 + 0.0j
    js = (0, 1) if sign_component is None else (sign_component,)
    for j in js:
        gv = np.exp(log_gamma_factor(gd.shifted(j), s))
        integrand = gv * ay ** (1 - s) * mell
        integrand = np.where(np.isfinite(integrand), integrand, 0.0)
        val = np.trapezoid(integrand, t) / (2 * math.pi)
        total += (np.sign(y) ** j) * val
    return complex(total)


def _mellin_support(V, sigma, floor=5e-16):
    """Height beyond which |M(V, -sigma - it)| sits at the noise floor."""
    t = 40.0
    quiet = 0
    while t < 1500:
        m = abs(complex(V.mellin(complex(-sigma, -t))))
        if m < floor:
            quiet += 1
            if quiet >= 2:
                return t + 40.0
        else:
            quiet = 0
        t += 20.0
    return 1500.0


def _adaptive_tmax(V, gd, sigma, tol):
    """Truncation height: measured integrand decay with a derivative guard.

    The Mellin transform of a smooth compact bump decays faster than any
    power, so we grow T until the measured |gamma * M| at T and 1.3 T is
    below tol with margin, falling back to the m = 6 derivative bound.
    """
    if not hasattr(V, "_l1m6"):
        V._l1m6 = V.l1_mult(6)
    c6 = V._l1m6
    t = 60.0
    while t < 1200:
        vals = []
        for tt in (t, 1.3 * t):
            g = float(np.exp(np.real(log_gamma_factor(gd, sigma + 1j * tt))))
            m = abs(complex(V.mellin(complex(-sigma, -tt))))
            vals.append(g * min(m, c6 / tt**6) * tt)
        if max(vals) < 0.01 * tol:
            return 1.3 * t
        t *= 1.4
    return 1200.0


def bessel_decay_report(V: InertFunction, gd: GammaData, y_small, y_large, sigma=1.0):
    """Fitted small-y slope and measured large-y super-polynomial decay."""
    vals_s = np.array([abs(bessel_transform_real(V, gd, y, sigma)) for y in y_small])
    logy = np.log(np.array(y_small))
    slope = float(np.polyfit(logy, np.log(np.maximum(vals_s, 1e-300)), 1)[0])
    vals_l = np.array([abs(bessel_transform_real(V, gd, y, sigma)) for y in y_large])
    # exponent p in |B| ~ y^-p between consecutive large points
    decs = []
    for i in range(len(y_large) - 1):
        if vals_l[i] > 0 and vals_l[i + 1] > 0:
            decs.append(
                -(math.log(vals_l[i + 1]) - math.log(vals_l[i]))
                / (math.log(y_large[i + 1]) - math.log(y_large[i]))
            )
    return {
        "small_slope": slope,
        "small_values": vals_s,
        "large_values": vals_l,
        "large_decay_exponents": decs,
    }


def gamma_ratio_bound_check(gd: GammaData, sigma=1.0, t_lim=100.0, k_lim=100, nt=41):
    """Fit the minimal C with log|gamma(1-s, rho_k)| <= C log((1+|k|)(1+|t|)).

    Complex-place twist by frequency k shifts every parameter by |k|/2.
    Returns the measured exponent, a symmetry residual under k -> -k and
    a tail-monotonicity flag along k at t = 0.
    """
    if gd.kind != "complex":
        raise FieldError("the k-twist sweep is for complex places")
    ts = np.linspace(-t_lim, t_lim, nt)
    ks = np.arange(-k_lim, k_lim + 1, 5)
    best = 0.0
    sym_res = 0.0
    vals_k0 = []
    for k in ks:
        gk = gd.shifted(abs(k) / 2.0)
        lg = np.real(log_gamma_factor(gk, sigma + 1j * ts))
        denom = np.log((1.0 + abs(k)) * (1.0 + np.abs(ts)))
        mask = denom > 0.2
        if np.any(mask):
            best = max(best, float(np.max(lg[mask] / denom[mask])))
        if k >= 0:
            gmk = gd.shifted(abs(-k) / 2.0)
            lgm = np.real(log_gamma_factor(gmk, sigma + 1j * ts))
            sym_res = max(sym_res, float(np.max(np.abs(lg - lgm))))
        if k >= 0:
            vals_k0.append(float(np.real(log_gamma_factor(gk, sigma + 0j))))
    tail = vals_k0[len(vals_k0) // 2:]
    monotone = all(b >= a - 1e-9 for a, b in zip(tail, tail[1:])) or all(
        b <= a + 1e-9 for a, b in zip(tail, tail[1:])
    )
    return {"C_meas": best, "symmetry_residual": sym_res, "tail_monotone": monotone}


# ---------------------------------------------------------------------------
# approximate functional equation kernels


class SmoothCutoff:
    """h: (0, inf) -> [0, 1], h = 1 on (0, 1], 0 on [2, inf), C-infinity."""

    @staticmethod
    def _f(u):
        u = np.asarray(u, dtype=float)
        out = np.zeros_like(u)
        pos = u > 0
        out[pos] = np.exp(-1.0 / u[pos])
        return out

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        a = self._f(2.0 - x)
        b = self._f(x - 1.0)
        with np.errstate(invalid="ignore"):
            out = np.where(x <= 1.0, 1.0, np.where(x >= 2.0, 0.0, a / (a + b)))
        return out if out.shape else float(out)

    def mellin(self, s, nodes=400):
        """M(h, s) = 1/s + integral_1^2 h(y) y^(s-1) dy, for re(s) > 0."""
        s = np.asarray(s, dtype=complex)
        x, w = _leggauss(nodes)
        y = 0.5 * x + 1.5
        hv = self(y)
        out = (np.exp(np.multiply.outer(s - 1, np.log(y))) * (hv * w)).sum(axis=-1) * 0.5
        out = out + 1.0 / s
        return out if out.shape else complex(out)


@dataclass
class AFEKernels:
    """h0, k0 and the window parameters of the localized central integral."""

    n_f: float
    kappa: float
    places: list  # GammaData per archimedean place
    c_pi: float = 1.0
    sigma_default: float = 2.0
    cutoff: SmoothCutoff = field(default_factory=SmoothCutoff)

    def __post_init__(self):
        if not (0 < self.kappa < 0.5):
            raise FieldError("kappa must lie in (0, 1/2)")
        n32 = self.n_f ** (-1.5)
        self.A = n32 * self.n_f ** (-self.kappa)
        self.B = n32 * self.n_f ** (self.kappa)
        self.D = n32

    def h_scaled(self, t, M):
        return self.cutoff(np.asarray(t, dtype=float) / M)

    def h0(self, t):
        """h_B - h_D: values in [0, 1], support in (D, 2B]."""
        return self.h_scaled(t, self.B) - self.h_scaled(t, self.D)

    def h1(self, t):
        return self.h_scaled(t, self.D) - self.h_scaled(t, self.A)

    def gamma_infty(self, s):
        """prod_v gamma_v(1/2 - s) as exp of summed log-gamma ratios."""
        out = np.zeros_like(np.asarray(s, dtype=complex))
        for gd in self.places:
            out = out + log_gamma_factor(gd, np.asarray(s, dtype=complex) + 0.5)
        return np.exp(out)

    def k0(self, t, sigma=None, t_max=200.0, n=6001):
        """Contour integral of M(h1, s) gamma_infty(1/2 - s) (C N^3 t)^s.

        M(h1, s) = (D^s - A^s) M(h, s); poles of the gamma factor sit at
        re(s) <= -1/2 + max|re alpha| < 0, so any sigma > 0 is safe.
        """
        sigma = self.sigma_default if sigma is None else sigma
        if sigma <= 0:
            raise FieldError("k0 contour needs sigma > 0")
        ts = np.linspace(-t_max, t_max, n)
        s = sigma + 1j * ts
        mh = self.cutoff.mellin(s)
        mh1 = (np.exp(s * math.log(self.D)) - np.exp(s * math.log(self.A))) * mh
        amp = np.exp(s * math.log(self.c_pi * self.n_f**3 * t))
        vals = mh1 * self.gamma_infty(s) * amp
        return complex(np.trapezoid(vals, ts) / (2 * math.pi))

    def k0_bound_constant(self, sigma, t_grid):
        """Measured C_sigma = max |k0(t)| / (N^(3/2) t)^sigma over the grid."""
        ratios = []
        for t in t_grid:
            ratios.append(abs(self.k0(t, sigma=sigma)) / (self.n_f**1.5 * t) ** sigma)
        return max(ratios), ratios

    def h_consistency(self, t_grid):
        """max |(h_B - h_A) - (h0 + h1)| over the grid (identically 0)."""
        t = np.asarray(t_grid, dtype=float)
        lhs = self.h_scaled(t, self.B) - self.h_scaled(t, self.A)
        rhs = self.h0(t) + self.h1(t)
        return float(np.max(np.abs(lhs - rhs)))


def afe_kernels(n_f, kappa, places, c_pi=1.0):
    return AFEKernels(n_f=n_f, kappa=kappa, places=list(places), c_pi=c_pi)


def convexity_tail_slope(kappa, n_grid, degree=1, sigma=0.5, t_max=120.0):
    """Slope of the convexity-regime remainder against a synthetic L-bound.

    The short-cutoff contribution at re(s) = 1/2 is
    N * int |M(h_A, s)| |L_syn(1/2 - s)| ds with A = N^(-3/2 - kappa) and
    the synthetic central bound |L_syn| = (1 + |s|)^(3 deg / 2); its decay
    in N must fit the exponent 1/4 - kappa/2.
    """
    cutoff = SmoothCutoff()
    ts = np.linspace(-t_max, t_max, 4001)
    s = sigma + 1j * ts
    base = np.abs(cutoff.mellin(s)) * (1.0 + np.abs(s)) ** (1.5 * degree)
    vals = []
    for n in n_grid:
        A = float(n) ** (-1.5 - kappa)
        m_scaled = np.abs(np.exp(s * math.log(A))) * base
        vals.append(float(n) * np.trapezoid(m_scaled, ts))
    slope = float(np.polyfit(np.log(np.asarray(n_grid, dtype=float)),
                             np.log(np.asarray(vals)), 1)[0])
    return slope, vals
