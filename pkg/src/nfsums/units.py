"""Unit-lattice algorithms: box counts, balanced generators, fundamental domain.

The unit group data (roots of unity, fundamental units) comes from the
field configuration file and is verified here, never computed from
scratch.  Log coordinates use the normalized absolute values, so each
unit's log vector sums to zero.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import mpmath as mp
import numpy as np

from .nf import FieldElement, FieldError, IdealHNF, NumberFieldCtx, PrimeIdealData


class BalanceError(FieldError):
    def __init__(self, msg, best=None, defect=None):
        super().__init__(msg)
        self.best = best
        self.defect = defect


class PrecisionError(FieldError):
    def __init__(self, msg, achieved=None):
        super().__init__(msg)
        self.achieved = achieved


@dataclass
class UnitGroupData:
    ctx: NumberFieldCtx
    zeta: FieldElement
    zeta_order: int
    fundamental_units: list

    def __post_init__(self):
        self.rank = self.ctx.num_places - 1
        if len(self.fundamental_units) != self.rank:
            raise FieldError(
                f"expected {self.rank} fundamental units, got {len(self.fundamental_units)}"
            )
        self.log_lattice = np.array(
            [self.ctx.embed_log(u) for u in self.fundamental_units]
        ).reshape(self.rank, self.ctx.num_places)
        self.validate()

    def validate(self):
        if (self.zeta**self.zeta_order) != self.ctx.one:
            raise FieldError("root of unity has wrong order (not annihilated)")
        for q in set(_prime_factors(self.zeta_order)):
            if (self.zeta ** (self.zeta_order // q)) == self.ctx.one:
                raise FieldError("root of unity order not minimal")
        for u in self.fundamental_units:
            if abs(u.norm()) != 1:
                raise FieldError(f"declared unit {u} has |norm| != 1")
        for row in self.log_lattice:
            if abs(float(row.sum())) > 1e-9:
                raise FieldError("unit log vector does not sum to 0")
        if self.rank > 0:
            s = np.linalg.svd(self.log_lattice, compute_uv=False)
            if s.min() < 1e-9:
                raise FieldError("unit log lattice is degenerate")

    def unit_from_exponents(self, ks, zeta_pow=0):
        u = self.zeta**zeta_pow if zeta_pow else self.ctx.one
        for k, eps in zip(ks, self.fundamental_units):
            if k:
                u = u * eps**k
        return u


@dataclass
class ClassGroupData:
    ctx: NumberFieldCtx
    representatives: list  # IdealHNF, first one is O_F

    def validate(self, coprime_primes=()):
        for I in self.representatives:
            if not I.contains(self.ctx.one):
                raise FieldError(
                    "class representative is not anti-integral (must contain O_F)"
                )
            for P in coprime_primes:
                if P.ideal_valuation(I) != 0:
                    raise FieldError("class representative not coprime to required prime")
        return True


def embed_log(ctx, x, bits=53):
    """log|x|_v over archimedean places at the requested bit precision.

    Verifies the product formula against the exact norm to 2^-40 relative
    error and raises PrecisionError otherwise.
    """
    if bits < 53:
        raise FieldError("requested precision below 53 bits")
    dps = int(bits / 3.32) + 10
    logs = ctx.embed_log(x, dps=dps)
    target = math.log(abs(float(x.norm()))) if x.norm() != 0 else None
    if target is None:
        raise FieldError("log embedding of zero")
    err = abs(sum(logs) - target) / max(1.0, abs(target))
    if err > 2.0**-40:
        raise PrecisionError(f"product formula residual {err:.3e}", achieved=err)
    return logs


def count_units_in_box(units: UnitGroupData, lower, upper, pivot_index=0):
    """Exact count of units with t_v <= |o|_v <= T_v off the pivot place.

    Enumerates the unit log lattice inside the box and verifies every
    witness at doubled precision.  Returns (count, witnesses) where the
    witnesses are one unit per lattice point (roots of unity excluded
    from the list but included in the count).
    """
    ctx = units.ctx
    places = [i for i in range(ctx.num_places) if i != pivot_index]
    if len(lower) != len(places) or len(upper) != len(places):
        raise FieldError("box must be indexed by the non-pivot places")
    if any(t <= 0 for t in lower) or any(t <= 0 for t in upper):
        raise FieldError("box bounds must be positive")
    if units.rank == 0:
        if any(l > u for l, u in zip(lower, upper)):
            return 0, []
        # only roots of unity; all have |o|_v = 1
        ok = all(l <= 1.0 <= u for l, u in zip(lower, upper)) if places else True
        return (units.zeta_order if ok else 0), []
    y = np.log(np.array(lower, dtype=float))
    Y = np.log(np.array(upper, dtype=float))
    if np.any(y > Y):
        return 0, []
    if not np.all(np.isfinite(y)) or not np.all(np.isfinite(Y)):
        raise FieldError("unbounded enumeration region")
    M = units.log_lattice[:, places]  # rank x rank
    Minv = np.linalg.inv(M)
    corners = []
    for bits in itertools.product(*[(0, 1)] * len(places)):
        w = np.array([Y[i] if b else y[i] for i, b in enumerate(bits)])
        corners.append(w @ Minv)
    corners = np.array(corners)
    lo = np.floor(corners.min(axis=0)).astype(int) - 1
    hi = np.ceil(corners.max(axis=0)).astype(int) + 1
    count = 0
    witnesses = []
    for k in itertools.product(*[range(a, b + 1) for a, b in zip(lo, hi)]):
        u = units.unit_from_exponents(k)
        logs = ctx.embed_log(u, dps=2 * ctx.dps)
        inside = all(
            y[i] - 1e-12 <= logs[v] <= Y[i] + 1e-12 for i, v in enumerate(places)
        )
        if inside:
            count += units.zeta_order
            witnesses.append(u)
    return count, witnesses


def balanced_generator(units: UnitGroupData, gamma, targets, delta):
    """Unit multiple of gamma with |o*gamma|_v within the delta window of T_v.

    Requires prod(T_v) = |N(gamma)|.  Rounds the log defect into the unit
    lattice (least squares + local search), then verifies the window
    exactly; falls back to an exhaustive exponent sweep of radius 8.
    """
    ctx = units.ctx
    gamma = ctx.elem(gamma)
    n_abs = abs(float(gamma.norm()))
    if n_abs == 0:
        raise FieldError("gamma must be nonzero")
    if abs(math.log(float(np.prod([float(t) for t in targets]))) - math.log(n_abs)) > 1e-8:
        raise FieldError("targets must multiply to |N(gamma)|")
    window = delta * (ctx.num_places - 1) * math.log(max(n_abs, math.e))
    logs_g = np.array(ctx.embed_log(gamma))
    log_t = np.log(np.array([float(t) for t in targets]))
    defect = logs_g - log_t  # sums to ~0

    def check(o):
        logs = np.array(ctx.embed_log(o * gamma))
        d = np.abs(logs - log_t)
        return d.max(), o * gamma

    if units.rank == 0:
        d, og = check(ctx.one)
        if d <= window + 1e-9:
            return og
        raise BalanceError("no unit can rebalance (rank 0)", best=og, defect=d)

    M = units.log_lattice  # rank x places
    sol, *_ = np.linalg.lstsq(M.T, -defect, rcond=None)
    base = np.round(sol).astype(int)
    best = None
    for off in itertools.product((-1, 0, 1), repeat=units.rank):
        k = base + np.array(off)
        d, og = check(units.unit_from_exponents(list(k)))
        if best is None or d < best[0]:
            best = (d, og)
        if d <= window + 1e-9:
            return og
    for k in itertools.product(range(-8, 9), repeat=units.rank):
        d, og = check(units.unit_from_exponents(list(k)))
        if best is None or d < best[0]:
            best = (d, og)
        if d <= window + 1e-9:
            return og
    raise BalanceError(
        f"no unit within window {window:.4f}; best defect {best[0]:.4f}",
        best=best[1],
        defect=best[0],
    )


def balanced_targets(ctx, norm_abs):
    """Equal-size targets T_v = |N|^(n_v/d) with prod T_v = |N|."""
    d = ctx.degree
    return [float(norm_abs) ** (ctx.place_dim(i) / d) for i in range(ctx.num_places)]


def fundamental_domain_E_contains(units: UnitGroupData, x_places, tol=1e-9):
    """Membership of a norm-one archimedean point in the domain E.

    ``x_places`` lists one float/complex value per archimedean place.
    Returns (status, coords) with status one of 'inside', 'outside',
    'boundary'; coords are the coefficients of l(x) in the basis
    {l(eps_i)} restricted off the pivot place (the first place).
    """
    ctx = units.ctx
    if len(x_places) != ctx.num_places:
        raise FieldError("need one value per archimedean place")
    mods = []
    for i, v in enumerate(x_places):
        m = abs(v)
        mods.append(m if ctx.places[i][0] == "real" else m * m)
    total = float(np.prod(mods))
    if abs(total - 1.0) > 1e-6:
        raise FieldError(f"point is not on the norm-one surface (|x| = {total:.3g})")

    sector = 2 * math.pi / units.zeta_order
    a0 = math.atan2(float(np.imag(x_places[0])), float(np.real(x_places[0])))
    if a0 < -tol:
        a0 += 2 * math.pi
    arg_ok = -tol <= a0 <= sector + tol
    arg_boundary = abs(a0 - sector) <= tol

    if units.rank == 0:
        coords = []
        inside = arg_ok
    else:
        places = list(range(1, ctx.num_places))
        M = units.log_lattice[:, places]
        lx = np.log(np.array([mods[i] for i in places]))
        coords = list(np.linalg.solve(M.T, lx))
        inside = arg_ok and all(-tol <= c < 1 - tol for c in coords)
    on_boundary = arg_boundary or any(
        abs(c) <= tol or abs(c - 1) <= tol for c in coords
    )
    if inside and not on_boundary:
        status = "inside"
    elif on_boundary and (inside or arg_ok):
        status = "boundary"
    else:
        status = "outside"
    # arg exactly 0 (or coords exactly 0) counts as contained: half-open faces
    if status == "boundary" and a0 <= tol and all(c <= tol for c in coords) and arg_ok:
        if all(c >= -tol for c in coords):
            status = "inside"
    return status, coords


def class_reps_validate(units: UnitGroupData, class_data: ClassGroupData, q_prime: PrimeIdealData,
                        conductor_primes=(), delta=0.45):
    """Validate class representatives and construct the balanced alpha_q.

    Checks anti-integrality and coprimality of every representative,
    locates the representative I with q * I^{-1} principal, extracts a
    generator alpha_q with N(q) <= N(alpha_q) <= max N(I^{-1}) N(q), and
    rebalances it.  Returns a report dict.
    """
    ctx = units.ctx
    class_data.validate(coprime_primes=(q_prime, *conductor_primes))
    found = None
    for I in class_data.representatives:
        J = q_prime.ideal.multiply(I.inverse())
        gen = J.find_generator()
        if gen is not None:
            found = (I, J, gen)
            break
    if found is None:
        raise FieldError("no representative makes q * I^{-1} principal")
    I, J, alpha = found
    n_alpha = abs(alpha.norm())
    n_q = q_prime.norm()
    max_inv = max(float(R.inverse().norm()) for R in class_data.representatives)
    if not (n_q <= n_alpha <= max_inv * n_q + 1e-9):
        raise FieldError(f"alpha_q norm {n_alpha} outside [{n_q}, {max_inv * n_q}]")
    if q_prime.valuation(alpha) != 1:
        raise FieldError("v_q(alpha_q) != 1")
    targets = balanced_targets(ctx, n_alpha)
    if math.log(float(n_alpha)) > 0 and delta * (ctx.num_places) < 1:
        try:
            alpha_bal = balanced_generator(units, alpha, targets, delta)
        except BalanceError:
            alpha_bal = alpha
    else:
        alpha_bal = alpha
    return {
        "representative": I,
        "alpha_q": alpha_bal,
        "alpha_raw": alpha,
        "norm_alpha": n_alpha,
        "norm_q": n_q,
        "logs": ctx.embed_log(alpha_bal),
        "targets": [math.log(t) for t in targets],
    }


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
