"""The exponent min-max program that produces the saving 1/36.

All bookkeeping is in exponents of N(q).  An ExponentVector carries
(x_K, x_L, x_Delta, tau) with T = N^(-3/2 + tau); the two bound
exponents are

  e_F = 1 - 1/2 + (3/2)(x_D + x_L) + (-3/4 + tau/2)
        + (1/2) max(-x_L - x_K, -x_D/2 - x_L, (3/2 - tau) - (5/2) x_D - 2 x_L)
  e_O = 1 - 1/2 + (3/4 - tau/2) - (x_D + x_K + x_L)/2

subject to C1: x_D >= x_K - x_L + 1/2 - tau and C2: x_K + x_L <= x_D.
The program minimizes sup_tau min_xD max(e_F, e_O) over (x_K, x_L);
epsilon terms are dropped (the result holds for every kappa below the
optimum).  A float grid locates the optimum; the active equalities are
then solved exactly in rationals.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .nf import FieldError

HALF = Fraction(1, 2)


@dataclass(frozen=True)
class ExponentVector:
    x_k: Fraction
    x_l: Fraction
    x_d: Fraction
    tau: Fraction = Fraction(0)

    def feasible(self, eps=Fraction(0)):
        errors = []
        if not (eps <= self.x_k <= 1 - eps):
            errors.append("x_K out of range")
        if not (eps <= self.x_l <= 1 - eps):
            errors.append("x_L out of range")
        if not (0 < self.x_d < 1):
            errors.append("x_Delta out of (0, 1)")
        if self.x_d < self.x_k - self.x_l + HALF - self.tau:
            errors.append("C1 violated: x_D < x_K - x_L + 1/2 - tau")
        if self.x_k + self.x_l > self.x_d:
            errors.append("C2 violated: x_K + x_L > x_D")
        return errors


@dataclass(frozen=True)
class BoundExponents:
    e_f: Fraction
    e_o: Fraction

    @property
    def worst(self):
        return max(self.e_f, self.e_o)


def bound_exponents(v: ExponentVector) -> BoundExponents:
    """Exact rational (e_F, e_O); raises listing violated constraints."""
    errs = v.feasible()
    if errs:
        raise FieldError("infeasible exponent vector: " + "; ".join(errs))
    return _bounds_unchecked(v.x_k, v.x_l, v.x_d, v.tau)


def _bounds_unchecked(x_k, x_l, x_d, tau):
    inner = max(
        -x_l - x_k,
        -x_d / 2 - x_l,
        (Fraction(3, 2) - tau) - Fraction(5, 2) * x_d - 2 * x_l,
    )
    e_f = HALF + Fraction(3, 2) * (x_d + x_l) + (-Fraction(3, 4) + tau / 2) + inner / 2
    e_o = HALF + (Fraction(3, 4) - tau / 2) - (x_d + x_k + x_l) / 2
    return BoundExponents(e_f, e_o)


def _best_xd(x_k, x_l, tau):
    """Exact min over feasible x_Delta of max(e_F, e_O) at fixed (x_K, x_L, tau).

    Every active expression is affine in x_D (e_F increasing, e_O
    decreasing), so the optimum sits at the C1/C2 lower bound or at an
    intersection of e_O with one of the three e_F pieces.
    """
    lo = max(x_k - x_l + HALF - tau, x_k + x_l)
    candidates = []
    if lo < 1:
        candidates.append(lo)
    # e_O = e_F piecewise: solve against each max-branch
    # common part: e_F = c0 + (3/2) x_d + b_i/2 + m_i x_d /2 ; e_O = d0 - x_d/2
    c0 = HALF + Fraction(3, 2) * x_l - Fraction(3, 4) + tau / 2
    d0 = HALF + Fraction(3, 4) - tau / 2 - (x_k + x_l) / 2
    branches = [
        (-x_l - x_k, Fraction(0)),
        (-x_l, -HALF),
        (Fraction(3, 2) - tau - 2 * x_l, -Fraction(5, 2)),
    ]
    for b, m in branches:
        # c0 + (3/2 + m/2) x_d + b/2 = d0 - x_d/2
        denom = Fraction(3, 2) + m / 2 + HALF
        if denom != 0:
            x_d = (d0 - c0 - b / 2) / denom
            if lo <= x_d < 1:
                candidates.append(x_d)
    best = None
    for x_d in candidates:
        if not (0 < x_d < 1):
            continue
        b = _bounds_unchecked(x_k, x_l, x_d, tau)
        if best is None or b.worst < best[1].worst:
            best = (x_d, b)
    return best  # possibly None when infeasible


def value_at(x_k, x_l, kappa_range_top, tau_checks=8):
    """sup over tau in [0, top] of the best-x_Delta worst exponent, exact."""
    taus = {Fraction(0), Fraction(kappa_range_top)}
    for i in range(1, tau_checks):
        taus.add(Fraction(kappa_range_top) * i / tau_checks)
    worst = None
    arg = None
    for tau in sorted(taus):
        got = _best_xd(Fraction(x_k), Fraction(x_l), tau)
        if got is None:
            return None, None
        x_d, b = got
        if worst is None or b.worst > worst:
            worst = b.worst
            arg = ExponentVector(Fraction(x_k), Fraction(x_l), x_d, tau)
    return worst, arg


def _grid_scan(resolution, kappa_top):
    """Float scan of (x_K, x_L) at tau = 0 with the candidate-x_D trick."""
    n = int(round(0.5 * resolution))
    xs = np.arange(1, n + 1) / resolution  # (0, 1/2]
    xk = xs[:, None] * np.ones_like(xs)[None, :]
    xl = np.ones_like(xs)[:, None] * xs[None, :]
    best = np.full(xk.shape, np.inf)
    tau = 0.0
    lo = np.maximum(xk - xl + 0.5 - tau, xk + xl)
    c0 = 0.5 + 1.5 * xl - 0.75 + tau / 2
    d0 = 0.5 + 0.75 - tau / 2 - (xk + xl) / 2
    branch_b = [(-xl - xk, 0.0), (-xl, -0.5), (1.5 - tau - 2 * xl, -2.5)]
    cands = [lo]
    for b, m in branch_b:
        denom = 1.5 + m / 2 + 0.5
        cands.append((d0 - c0 - b / 2) / denom)
    for x_d in cands:
        ok = (x_d >= lo - 1e-12) & (x_d < 1) & (x_d > 0)
        inner = np.maximum.reduce(
            [-xl - xk, -x_d / 2 - xl, (1.5 - tau) - 2.5 * x_d - 2 * xl]
        )
        e_f = 0.5 + 1.5 * (x_d + xl) + (-0.75 + tau / 2) + inner / 2
        e_o = 0.5 + 0.75 - tau / 2 - (x_d + xk + xl) / 2
        val = np.where(ok, np.maximum(e_f, e_o), np.inf)
        best = np.minimum(best, val)
    return xs, best


def optimize_kappa(resolution=1800, kappa_top=Fraction(1, 36), refine_span=2):
    """Locate and exactly refine the optimum of the exponent program.

    Returns a dict with the optimal ExponentVector, the balanced bound
    exponents and kappa = 3/4 - optimum.  The float grid at tau = 0
    proposes a cell; candidates on the surrounding rational grid are
    evaluated exactly including the adversarial tau sweep; the winner is
    then polished by solving the active equality system in rationals.
    """
    if resolution > 1800:
        raise FieldError("resolution finer than 1/1800 is unnecessary and slow")
    xs, grid = _grid_scan(resolution, float(kappa_top))
    i, j = np.unravel_index(np.argmin(grid), grid.shape)
    best = None
    for di in range(-refine_span, refine_span + 1):
        for dj in range(-refine_span, refine_span + 1):
            xi, xj = i + di, j + dj
            if not (0 <= xi < len(xs) and 0 <= xj < len(xs)):
                continue
            x_k = Fraction(xi + 1, resolution)
            x_l = Fraction(xj + 1, resolution)
            worst, arg = value_at(x_k, x_l, kappa_top)
            if worst is None:
                continue
            if best is None or worst < best[0]:
                best = (worst, arg)
    worst, arg = best
    exact = _polish(arg, kappa_top)
    if exact is not None:
        worst_p, arg_p = exact
        if worst_p <= worst:
            worst, arg = worst_p, arg_p
    bounds = bound_exponents(arg)
    return {
        "optimum": arg,
        "bounds": bounds,
        "kappa": Fraction(3, 4) - worst,
        "worst_exponent": worst,
        "grid_value": float(grid[i, j]),
    }


def _polish(arg, kappa_top):
    """Solve the saddle equalities exactly: balanced e_F = e_O, C1 and C2 tight.

    At the paper's optimum the active system at tau = 0 is
      x_D = x_K - x_L + 1/2   (C1 tight)
      branch 1 = branch 3 of the e_F max
      e_F = e_O,
    three affine equations in (x_K, x_L, x_D).
    """
    tau = Fraction(0)
    # unknowns (x_k, x_l, x_d): rows of A z = rhs
    # C1: x_d - x_k + x_l = 1/2
    # branch1 = branch3: -x_l - x_k = 3/2 - 5/2 x_d - 2 x_l -> 5/2 x_d + x_l - x_k = 3/2
    # e_f(branch1) = e_o:
    #   1/2 + 3/2(x_d + x_l) - 3/4 + (-x_l - x_k)/2 = 1/2 + 3/4 - (x_d + x_k + x_l)/2
    #   -> 2 x_d + 3/2 x_l = 3/2  (the x_k terms cancel)
    A = [
        [Fraction(-1), Fraction(1), Fraction(1)],
        [Fraction(-1), Fraction(1), Fraction(5, 2)],
        [Fraction(0), Fraction(3, 2), Fraction(2)],
    ]
    rhs = [HALF, Fraction(3, 2), Fraction(3, 2)]
    sol = _solve3(A, rhs)
    if sol is None:
        return None
    x_k, x_l, x_d = sol
    v = ExponentVector(x_k, x_l, x_d, tau)
    if v.feasible():
        return None
    worst, arg = value_at(x_k, x_l, kappa_top)
    return worst, arg


def _solve3(A, rhs):
    import copy

    a = [row[:] + [r] for row, r in zip(copy.deepcopy(A), rhs)]
    n = 3
    for col in range(n):
        piv = next((i for i in range(col, n) if a[i][col] != 0), None)
        if piv is None:
            return None
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        a[col] = [x * inv for x in a[col]]
        for i in range(n):
            if i != col and a[i][col] != 0:
                f = a[i][col]
                a[i] = [x - f * y for x, y in zip(a[i], a[col])]
    return [a[i][n] for i in range(n)]


def constrained_equal_kl(resolution=1800, kappa_top=Fraction(1, 36)):
    """Best kappa when x_K = x_L is forced (strictly worse than the optimum)."""
    best = None
    for i in range(1, resolution // 2):
        x = Fraction(i, resolution)
        worst, arg = value_at(x, x, kappa_top)
        if worst is None:
            continue
        if best is None or worst < best[0]:
            best = (worst, arg)
    return Fraction(3, 4) - best[0], best[1]
