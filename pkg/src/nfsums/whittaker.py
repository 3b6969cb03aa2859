"""Unramified GL(3) local data: Schur lattices, Hecke relations, zeta checks.

Normalized Whittaker coefficients are Schur polynomials in the Satake
parameters: A(k1, k2) = s_(k1+k2, k2, 0)(alpha).  A(k1, k2) plays the
role of the two-parameter Hecke eigenvalue lambda(p^k1, p^k2); the value
of the Whittaker function at a_1(pi^k) is A(k, 0) q^-k (the only place
the q-power dressing enters, see ``whittaker_a1_value``).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .nf import FieldError

RAMANUJAN_EXP = 5.0 / 14.0


@dataclass(frozen=True)
class SatakeParams:
    alphas: tuple

    def __post_init__(self):
        if len(self.alphas) != 3:
            raise FieldError("need exactly three Satake parameters")

    @property
    def central(self):
        a = self.alphas
        return a[0] * a[1] * a[2]

    def check_ramanujan(self, q):
        bound = q**RAMANUJAN_EXP * (1 + 1e-12)
        return all(abs(a) <= bound and abs(a) >= 1 / bound for a in self.alphas)

    def contragredient(self):
        return SatakeParams(tuple(1 / a for a in self.alphas))

    def elementary(self):
        a1, a2, a3 = self.alphas
        return (a1 + a2 + a3, a1 * a2 + a1 * a3 + a2 * a3, a1 * a2 * a3)


def complete_homogeneous(params: SatakeParams, kmax):
    """h_0..h_kmax by the recursion h_k = e1 h_{k-1} - e2 h_{k-2} + e3 h_{k-3}."""
    e1, e2, e3 = params.elementary()
    h = [1.0 + 0j]
    for k in range(1, kmax + 1):
        v = e1 * h[k - 1]
        if k >= 2:
            v -= e2 * h[k - 2]
        if k >= 3:
            v += e3 * h[k - 3]
        h.append(v)
    return h


def whittaker_value(params: SatakeParams, k1, k2):
    """A(k1, k2) = s_(k1+k2, k2, 0)(alpha); zero off the dominant cone."""
    if k1 < 0 or k2 < 0:
        return 0.0 + 0.0j
    a, b = k1 + k2, k2
    al = params.alphas
    if _distinct(al):
        return _schur_bialternant(al, (a, b, 0))
    # Jacobi-Trudi: s_(a,b,0) = h_a h_b - h_(a+1) h_(b-1)
    h = complete_homogeneous(params, a + 1)
    hb1 = h[b - 1] if b >= 1 else 0.0
    return h[a] * h[b] - h[a + 1] * hb1


def _distinct(al, tol=1e-6):
    return (
        abs(al[0] - al[1]) > tol
        and abs(al[0] - al[2]) > tol
        and abs(al[1] - al[2]) > tol
    )


def _schur_bialternant(al, lam):
    e0, e1, e2 = (lam[0] + 2, lam[1] + 1, lam[2])
    r = [(a**e0, a**e1, a**e2) for a in al]
    det = (
        r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1])
        - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
        + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0])
    )
    den = (al[0] - al[1]) * (al[0] - al[2]) * (al[1] - al[2])
    return det / den


def whittaker_a1_value(params: SatakeParams, k, q):
    """W(a_1(pi^k)) for the spherical vector: A(k,0) q^-k, W(I_3) = 1."""
    return whittaker_value(params, k, 0) * q ** (-k)


def hecke_relation_check(params: SatakeParams, max_exp=8):
    """Residuals of three candidate Hecke identities on the Schur lattice.

    'product': A(m,0) A(0,n) = sum_j w^j A(m-j, n-j)          (standard)
    'displayed': A(m,n) = sum_j w^j A(m-j,0) A(0,n-j)          (as printed)
    'moebius': A(m,n) = A(m,0)A(0,n) - w A(m-1,0)A(0,n-1)      (inverted)

    Returns a dict of max absolute residuals; which of these vanish is
    recorded by the caller, not assumed.
    """
    w = params.central
    res = {"product": 0.0, "displayed": 0.0, "moebius": 0.0}
    A = lambda i, j: whittaker_value(params, i, j)
    for m in range(0, max_exp + 1):
        for n in range(0, max_exp + 1):
            lhs = A(m, 0) * A(0, n)
            rhs = sum(w**j * A(m - j, n - j) for j in range(min(m, n) + 1))
            res["product"] = max(res["product"], abs(lhs - rhs))
            disp = sum(w**j * A(m - j, 0) * A(0, n - j) for j in range(min(m, n) + 1))
            res["displayed"] = max(res["displayed"], abs(A(m, n) - disp))
            moeb = A(m, 0) * A(0, n)
            if min(m, n) >= 1:
                moeb -= w * A(m - 1, 0) * A(0, n - 1)
            res["moebius"] = max(res["moebius"], abs(A(m, n) - moeb))
    return res


def sample_tempered(rng):
    """Tempered Satake triple with trivial central character, Weyl measure.

    Rejection against |Vandermonde|^2 gives the SU(3) conjugacy-class
    density; under it E|s_lambda|^2 = 1, which is what makes synthetic
    Rankin-Selberg sums grow like X^(1+eps) rather than X log^c X.
    """
    while True:
        t1, t2 = rng.uniform(0, 2 * math.pi, size=2)
        a = (cmath.exp(1j * t1), cmath.exp(1j * t2), cmath.exp(-1j * (t1 + t2)))
        disc = abs((a[0] - a[1]) * (a[0] - a[2]) * (a[1] - a[2])) ** 2
        if rng.uniform(0, 27.0) < disc:
            return SatakeParams(a)


# ---------------------------------------------------------------------------
# ideal enumeration and Rankin-Selberg partial sums


def prime_ideals_up_to(ctx, bound):
    """All prime ideals of norm <= bound as (key, norm, PrimeIdealData)."""
    out = []
    p = 2
    while p <= bound:
        if _is_prime(p):
            for i, P in enumerate(ctx.factor_rational_prime(p)):
                if P.norm() <= bound:
                    out.append(((p, i), P.norm(), P))
        p += 1
    out.sort(key=lambda t: (t[1], t[0]))
    return out


def ideals_up_to(ctx, bound):
    """Factored integral ideals of norm <= bound: list of (norm, {key: exp})."""
    primes = prime_ideals_up_to(ctx, bound)
    out = [(1, {})]

    def extend(start, norm, fac):
        for i in range(start, len(primes)):
            key, np_, _ = primes[i]
            if norm * np_ > bound:
                break  # primes sorted by norm
            n = norm * np_
            e = 1
            while n <= bound:
                fac2 = dict(fac)
                fac2[key] = e
                out.append((n, fac2))
                extend(i + 1, n, fac2)
                n *= np_
                e += 1

    extend(0, 1, {})
    return sorted(out, key=lambda t: t[0])


class SatakeField:
    """Seeded assignment of tempered Satake parameters to prime ideals."""

    def __init__(self, seed=0, params=None):
        self.seed = seed
        self._fixed = params
        self._cache = {}

    def at(self, key):
        if self._fixed is not None:
            return self._fixed
        if key not in self._cache:
            rng = np.random.default_rng((self.seed, key[0], key[1]))
            self._cache[key] = sample_tempered(rng)
        return self._cache[key]


def rankin_partial_sum(ctx, satake: SatakeField, X, nbins=12, X_min=100.0):
    """S(X') = sum_{N(a) N(b)^2 <= X'} |lambda(a,b)|^2 on a dyadic grid.

    Returns (grid, sums, slope, band): the fitted growth exponent of
    log S against log X' and its one-sigma band.
    """
    ideals = ideals_up_to(ctx, X)
    cache = {}

    def A_value(key, i, j):
        k = (key, i, j)
        if k not in cache:
            cache[k] = whittaker_value(satake.at(key), i, j)
        return cache[k]

    grid = np.exp(np.linspace(math.log(X_min), math.log(X), nbins))
    sums = np.zeros(nbins)
    bmax = int(math.isqrt(int(X)))
    for nb, fb in ideals:
        if nb > bmax:
            continue
        for na, fa in ideals:
            t = na * nb * nb
            if t > X:
                break
            val = 1.0 + 0j
            for key, eb in fb.items():
                val *= A_value(key, fa.get(key, 0), eb)
            for key, ea in fa.items():
                if key not in fb:
                    val *= A_value(key, ea, 0)
            idx = int(np.searchsorted(grid, t, side="left"))
            sums[idx:] += abs(val) ** 2
    logg = np.log(grid)
    logs = np.log(np.maximum(sums, 1e-300))
    A_ls = np.vstack([logg, np.ones_like(logg)]).T
    coef, res, *_ = np.linalg.lstsq(A_ls, logs, rcond=None)
    slope = float(coef[0])
    dof = max(nbins - 2, 1)
    sigma = math.sqrt(float(res[0]) / dof) if len(res) else 0.0
    sxx = float(((logg - logg.mean()) ** 2).sum())
    band = sigma / math.sqrt(sxx) if sxx > 0 else 0.0
    return grid, sums, slope, band


def rankin_separated_sum(ctx, satake: SatakeField, M, N):
    """sum_{N(a) <= M, N(b) <= N} |lambda(a, b)|^2."""
    ideals_a = ideals_up_to(ctx, M)
    ideals_b = ideals_up_to(ctx, N)
    amax = int(max(math.log2(max(M, 2)), math.log2(max(N, 2)))) + 2
    tables = {}

    def A_table(key):
        if key not in tables:
            p = satake.at(key)
            tables[key] = [
                [whittaker_value(p, i, j) for j in range(amax)] for i in range(amax)
            ]
        return tables[key]

    total = 0.0
    for nb, fb in ideals_b:
        for na, fa in ideals_a:
            val = 1.0 + 0j
            for key, eb in fb.items():
                val *= A_table(key)[fa.get(key, 0)][eb]
            for key, ea in fa.items():
                if key not in fb:
                    val *= A_table(key)[ea][0]
            total += abs(val) ** 2
    return total


# ---------------------------------------------------------------------------
# local zeta and Bessel identities


def local_zeta_check(params: SatakeParams, eta_value=1.0, order=40):
    """Coefficientwise check of sum_k A(k,0) (eta X)^k = prod (1 - a_i eta X)^-1.

    The left side uses the Schur evaluator; the right side inverts the
    degree-3 polynomial by series convolution.  Returns the max residual.
    """
    if order > 40:
        raise FieldError("truncation order capped at 40")
    lhs = [whittaker_value(params, k, 0) * eta_value**k for k in range(order + 1)]
    e1, e2, e3 = params.elementary()
    poly = [1.0 + 0j, -e1 * eta_value, e2 * eta_value**2, -e3 * eta_value**3]
    rhs = _series_invert(poly, order)
    return max(abs(a - b) for a, b in zip(lhs, rhs))


def _series_invert(poly, order):
    inv = [1.0 / poly[0]]
    for k in range(1, order + 1):
        acc = 0.0 + 0.0j
        for j in range(1, min(k, len(poly) - 1) + 1):
            acc += poly[j] * inv[k - j]
        inv.append(-acc / poly[0])
    return inv


def local_bessel_unramified_check(params: SatakeParams, order=40, ring=None):
    """Mellin characterization of the Bessel transform of the new vector.

    Unramified case: B[W] has a_1-coefficients given by the contragredient
    lattice, so its eta-trivial Mellin transform divided by L(pi-tilde, s)
    is identically 1; every ramified eta kills both sides by unit-average
    orthogonality.  Returns (series_residual, orthogonality_max) where the
    second entry is None when no ring is supplied.
    """
    dual = params.contragredient()
    series = [whittaker_value(dual, k, 0) for k in range(order + 1)]
    e1, e2, e3 = dual.elementary()
    poly = [1.0 + 0j, -e1, e2, -e3]
    # product of the series with the polynomial must be the delta at 0
    conv = []
    for k in range(order + 1):
        acc = 0.0 + 0.0j
        for j in range(min(k, 3) + 1):
            acc += poly[j] * series[k - j]
        conv.append(acc)
    resid = max(abs(c - (1.0 if k == 0 else 0.0)) for k, c in enumerate(conv))
    orth = None
    if ring is not None:
        from .residues import enumerate_mult_chars

        orth = 0.0
        for chi in enumerate_mult_chars(ring):
            if chi.is_trivial():
                continue
            s = sum(chi.value(u) for u in ring.units)
            orth = max(orth, abs(s) / ring.unit_count)
    return resid, orth


def shifted_integral_check(ring, params: SatakeParams, eta, psi_conductor=0, kmax=None):
    """Term-by-term audit of the shifted new-vector integral.

    With eta ramified, every k >= 1 term of
    sum_k W(a_1(pi^k)) eta(pi)^k q^-ks * G_k vanishes because the inner
    Gauss sum G_k pairs eta with an additive character of conductor
    a(eta) - k < a(eta); the total collapses to G(eta, psi-shifted) W(I_3).
    Returns a report dict.
    """
    from .residues import AddCharLocal, gauss_sum

    a_eta = ring.char_conductor(eta)
    if a_eta < 1:
        raise FieldError("shifted-integral check needs a ramified eta")
    d_v = ring.ctx.different_exponent(ring.prime)
    s = psi_conductor
    if kmax is None:
        kmax = a_eta + 2
    q = ring.q
    terms = []
    total = 0.0 + 0.0j
    for k in range(kmax + 1):
        # x -> psi(pi^(k - a(eta) + s) x) has shift d + a(eta) - k, conductor a(eta) - k
        shift = d_v + a_eta - k
        cond = ring.psi_conductor(shift)
        if max(a_eta, cond, 1) > ring.level:
            raise FieldError("ring level too shallow for the requested terms")
        gk = gauss_sum(ring, eta, AddCharLocal(ring, shift))
        wk = whittaker_a1_value(params, k, q)
        terms.append((k, gk, wk))
        total += wk * gk  # s = 0 specialization of q^-ks
    g0 = terms[0][1]
    tail = max(abs(g) for k, g, _ in terms[1:]) if kmax >= 1 else 0.0
    return {
        "a_eta": a_eta,
        "terms": terms,
        "total": total,
        "expected": g0,  # G * W(I_3), W(I_3) = 1
        "tail_max": tail,
        "residual": abs(total - g0),
    }


def _is_prime(n):
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True
