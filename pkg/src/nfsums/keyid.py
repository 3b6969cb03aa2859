"""The amplified Poisson key identity, verified exactly for black-box periods.

The identity decomposes a character-averaged period sum into a lattice
side and a dual (Fourier) side,

    N(q)^(-1/2) LHS = F - O,

with LHS = sum_I chi(I) sum_a chi_q(a) G(a, I) over residue classes
a in (O/q)^x and class representatives I, for ANY bounded function G.
The F-side sums the test function V0 over lattice points delta scaled
by Delta; the O-side sums the Fourier transform of V0 over the dual
lattice against the additive character pairing.  Only Poisson summation
and character orthogonality enter, so the residual is pure numerics:
lattice truncation of the dual side plus the quadrature behind the
archimedean Fourier transforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import j0

from .inert import InertFunction, _leggauss
from .nf import FieldError
from .residues import ResidueRing, additive_char_rot, build_residue_ring, enumerate_mult_chars, rot_to_complex
from .units import balanced_generator, balanced_targets


# ---------------------------------------------------------------------------
# archimedean components of V0


class RealBump:
    """Positive bump on (0, infinity); forces total positivity of delta."""

    def __init__(self, lo=0.5, hi=2.5):
        self.f = InertFunction.bump(lo, hi)
        self.lo, self.hi = lo, hi

    def value(self, x):
        x = float(x)
        return float(self.f(x)) if x > 0 else 0.0

    def hat(self, w):
        return complex(self.f.fourier(float(w)))

    def hat_batch(self, ws):
        return np.asarray(self.f.fourier(np.asarray(ws, dtype=float)), dtype=complex)

    def hat_radius(self, tol):
        """R with |hat V(w)| <= tol for |w| >= R, by chunked scan."""
        last_live = 0.0
        quiet = 0
        for k in range(20):
            w = np.linspace(25.0 * k, 25.0 * (k + 1), 251)
            vals = np.abs(self.f.fourier(w))
            above = np.where(vals > tol)[0]
            if len(above):
                last_live = float(w[above[-1]])
                quiet = 0
            else:
                quiet += 1
                if quiet >= 2:
                    return last_live + 1.0
        raise FieldError(f"hat tail above {tol} at radius 500; enlarge the scan")


class ComplexRadialBump:
    """Radial positive bump on C^x; the hat is a J0 (Hankel) transform."""

    def __init__(self, lo=0.5, hi=2.5):
        self.f = InertFunction.bump(lo, hi)
        self.lo, self.hi = lo, hi
        self._quads = {}

    def _quad(self, rho_max):
        # resolve the J0 oscillation: about 2 rho (hi - lo) cycles
        nodes = int(min(6016, max(512, 20 * rho_max * (self.hi - self.lo))))
        nodes = -(-nodes // 128) * 128
        key = nodes
        if key not in self._quads:
            x, w = _leggauss(nodes)
            r = 0.5 * (self.hi - self.lo) * x + 0.5 * (self.hi + self.lo)
            wq = w * 0.5 * (self.hi - self.lo)
            self._quads[key] = (r, self.f(r) * r * wq)
        return self._quads[key]

    def value(self, z):
        return float(self.f(abs(complex(z))))

    def hat(self, w):
        """2 * int V(z) e^(-4 pi i re(zw)) dA = 4 pi int V(r) J0(4 pi r |w|) r dr."""
        rho = abs(complex(w))
        r, frw = self._quad(rho)
        return complex(4.0 * math.pi * np.sum(frw * j0(4.0 * math.pi * r * rho)))

    def hat_batch(self, ws):
        rho = np.abs(np.asarray(ws, dtype=complex))
        r, frw = self._quad(float(np.max(rho)) if rho.size else 1.0)
        ker = j0(4.0 * math.pi * np.outer(rho, r))
        return (4.0 * math.pi * ker @ frw).astype(complex)

    def hat_radius(self, tol):
        last_live = 0.0
        quiet = 0
        for k in range(16):
            w = np.linspace(25.0 * k, 25.0 * (k + 1), 251)
            vals = np.abs(self.hat_batch(w))
            above = np.where(vals > tol)[0]
            if len(above):
                last_live = float(w[above[-1]])
                quiet = 0
            else:
                quiet += 1
                if quiet >= 2:
                    return last_live + 0.5
        raise FieldError(f"hat tail above {tol} at radius 400; enlarge the scan")


def _is_prime(n):
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def _int_val(n, p):
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def _coord_valuation(P, coords):
    """v_P of an integral element given by integer power-basis coordinates."""
    from .hnf import reduce_mod

    if not any(coords):
        raise FieldError("infinite valuation")
    v = 0
    while True:
        basis = P.power(v + 1).num
        if any(reduce_mod(basis, coords)):
            return v
        v += 1


@dataclass
class TestFunctionV0:
    """Product test function: finite indicators times archimedean bumps.

    ``conductor_primes`` lists primes where the finite component is the
    unit indicator 1_{O_v^x} rather than 1_{O_v}.  ``norm`` is fixed at
    build time so that the global hat value at 0 is exactly 1.
    """

    field: object
    arch: list
    conductor_primes: list = field(default_factory=list)
    norm: float = 1.0

    def __post_init__(self):
        ctx = self.field.ctx
        self._diff_primes = []
        disc = abs(ctx.discriminant)
        for p in range(2, disc + 1):
            if disc % p == 0 and _is_prime(p):
                for P in ctx.factor_rational_prime(p):
                    d = ctx.different_exponent(P)
                    if d > 0:
                        self._diff_primes.append((P, d))
        hat0 = 1.0
        for P, d in self._diff_primes:
            hat0 *= float(P.norm()) ** (-d / 2.0)
        for P in self.conductor_primes:
            q = P.norm()
            d = ctx.different_exponent(P)
            hat0 *= (1.0 - 1.0 / q)  # extra unit-indicator factor at 0
        for b in self.arch:
            hat0 *= abs(b.hat(0.0))
        self.norm = 1.0 / hat0

    def value(self, delta, delta_scale):
        """V0(delta / Delta) for an integral field element delta."""
        ctx = self.field.ctx
        for P in self.conductor_primes:
            if P.valuation(delta) != 0:
                return 0.0
        out = self.norm
        for i, b in enumerate(self.arch):
            x = ctx.embed(delta, i)
            x = float(x) if ctx.places[i][0] == "real" else complex(x)
            out *= b.value(x / delta_scale[i])
            if out == 0.0:
                return 0.0
        return out

    def hat_fin(self, xi, q_prime):
        """Product of finite-place Fourier factors at xi (xi nonzero in F).

        Includes the v_q factor 1 at v(xi) >= -1 (the phase is handled by
        the caller) and the |D|^(1/2) volumes at ramified places.
        """
        ctx = self.field.ctx
        out = 1.0
        for P, d in self._diff_primes:
            v = P.valuation(xi)
            if v < -d:
                return 0.0
            out *= float(P.norm()) ** (-d / 2.0)
        for P in self.conductor_primes:
            q = P.norm()
            d = ctx.different_exponent(P)
            v = P.valuation(xi)
            if v >= -d:
                out *= 1.0 - 1.0 / q
            elif v == -d - 1:
                out *= -1.0 / q
            else:
                return 0.0
        if q_prime.valuation(xi) < -1:
            return 0.0
        return out

    def hat_arch(self, xi, delta_scale):
        ctx = self.field.ctx
        out = self.norm
        for i, b in enumerate(self.arch):
            x = ctx.embed(xi, i)
            x = float(x) if ctx.places[i][0] == "real" else complex(x)
            out *= b.hat(x * delta_scale[i])
        return out


def build_V0(field, delta_scale, conductor_primes=(), bump_lo=0.5, bump_hi=2.5):
    """V0 with positive inert archimedean bumps and hat(0) = 1.

    ``delta_scale`` lists Delta_v per archimedean place (the per-place
    scale, not the normalized absolute value).
    """
    ctx = field.ctx
    arch = []
    for i in range(ctx.num_places):
        if ctx.places[i][0] == "real":
            arch.append(RealBump(bump_lo, bump_hi))
        else:
            arch.append(ComplexRadialBump(bump_lo, bump_hi))
    v0 = TestFunctionV0(field=field, arch=arch, conductor_primes=list(conductor_primes))
    if len(delta_scale) != ctx.num_places:
        raise FieldError("delta_scale must list one positive per archimedean place")
    if any(d <= 0 for d in delta_scale):
        raise FieldError("Delta components must be positive")
    return v0


def delta_norm(field, delta_scale):
    """|Delta| = prod Delta_v^(n_v) (normalized absolute values)."""
    ctx = field.ctx
    out = 1.0
    for i, d in enumerate(delta_scale):
        out *= float(d) ** ctx.place_dim(i)
    return out


# ---------------------------------------------------------------------------
# characters


@dataclass
class CharacterChi:
    """chi of conductor q: residue character, class values, trivial at infinity."""

    ring: ResidueRing
    chi_q: object  # MultChar on (O/q)^x
    class_values: list  # unit-modulus complex, one per class representative

    def unit_compatibility(self, units_data):
        """Max deviation of chi_q from 1 on totally positive unit images.

        For fields with no real place every unit is totally positive; for
        real fields the squares of the generators are used (totally
        positive lifting multiplies by a square of a unit).
        """
        ctx = self.ring.ctx
        gens = [units_data.zeta] + list(units_data.fundamental_units)
        worst = 0.0
        for u in gens:
            tot_pos = all(
                ctx.places[i][0] == "complex" or float(ctx.embed(u, i)) > 0
                for i in range(ctx.num_places)
            )
            test = u if tot_pos else u * u
            if self.ring.prime.valuation(test) != 0:
                raise FieldError("unit not coprime to q (impossible)")
            val = rot_to_complex(self.chi_q.rot(self.ring.reduce_elem(test)))
            worst = max(worst, abs(val - 1.0))
        return worst

    def conductor_is_q(self):
        return (not self.chi_q.is_trivial()) and self.ring.char_conductor(self.chi_q) == 1


def unit_compatible_chars(field, ring, include_trivial=False):
    """Characters of (O/q)^x trivial on the totally positive unit images."""
    ctx = field.ctx
    gens = []
    for u in [field.units.zeta] + list(field.units.fundamental_units):
        tot_pos = all(
            ctx.places[i][0] == "complex" or float(ctx.embed(u, i)) > 0
            for i in range(ctx.num_places)
        )
        gens.append(u if tot_pos else u * u)
    images = [ring.reduce_elem(g) for g in gens]
    out = []
    for chi in enumerate_mult_chars(ring):
        if chi.is_trivial() and not include_trivial:
            continue
        if all(chi.rot(im) == 0 for im in images):
            out.append(chi)
    return out


# ---------------------------------------------------------------------------
# the key identity


class KeyIdentityFrame:
    """Precomputed geometry of the identity for one (field, q, Delta, V0).

    Holds the V0-weighted lattice points, the dual lattice points with
    their Fourier weights, and the additive phase matrix over residue
    classes; evaluating the two sides for a particular (chi, G) is then a
    handful of dense products, so randomized G-trials are cheap.
    """

    def __init__(self, field, ring: ResidueRing, v0: TestFunctionV0, delta_scale,
                 tail_tol=1e-10):
        ctx = field.ctx
        P_q = ring.prime
        if ctx.different_exponent(P_q) != 0:
            raise FieldError("q must be coprime to the different")
        self.field = field
        self.ring = ring
        self.v0 = v0
        self.delta_scale = list(delta_scale)
        self.tail_tol = tail_tol
        self.n_q = P_q.norm()
        self.dnorm = delta_norm(field, delta_scale)
        units = ring.units
        self.unit_index = {u: i for i, u in enumerate(units)}
        self.inv_perm = np.array([self.unit_index[ring.inv_unit(u)] for u in units])

        # lattice side: V0-support points and their residue classes
        hi = max(b.hi for b in v0.arch)
        radii = [hi * delta_scale[i] * 1.0000001 for i in range(ctx.num_places)]
        self.f_items = []  # (unit_index, V0 value)
        for delta, _ in ctx.ideal_one().lattice_points_in_box(radii):
            val = v0.value(delta, delta_scale)
            if val == 0.0:
                continue
            if P_q.valuation(delta) != 0:
                raise FieldError(
                    "V0 support touched a q-divisible delta; shrink |Delta|"
                )
            self.f_items.append((self.unit_index[ring.reduce_elem(delta)], val))

        # dual side: Fourier weights and additive phases, xi != 0.
        # On the dual lattice D^-1 q^-1 (prod cond^-1) the support conditions
        # of hat_fin hold identically, so the finite factor is a constant
        # except for the per-point case split at conductor primes.
        dual = ctx.different_ideal().inverse().multiply(P_q.ideal.inverse())
        for P in v0.conductor_primes:
            dual = dual.multiply(P.ideal.inverse())
        tol_scan = tail_tol / (10.0 * max(1.0, len(units)))
        dual_radii = [
            b.hat_radius(tol_scan) / delta_scale[i] for i, b in enumerate(v0.arch)
        ]
        dual_basis = dual.basis_elements()
        zmat = np.asarray(dual.box_combos(dual_radii), dtype=np.int64)
        if zmat.size == 0:
            zmat = zmat.reshape(0, ctx.degree)
        # batched archimedean hats
        basis_emb = [
            np.array([complex(ctx.embed(b, i)) for b in dual_basis])
            for i in range(ctx.num_places)
        ]
        arch_vals = np.full(len(zmat), v0.norm, dtype=complex)
        for i, b in enumerate(v0.arch):
            if len(zmat) == 0:
                break
            ws = (zmat @ basis_emb[i]) * delta_scale[i]
            if ctx.places[i][0] == "real":
                ws = ws.real
            arch_vals *= b.hat_batch(ws)
        fin_const = 1.0
        for P, d in v0._diff_primes:
            fin_const *= float(P.norm()) ** (-d / 2.0)
        fin_vals = np.full(len(zmat), fin_const)
        if v0.conductor_primes:
            int_basis = np.array(dual.num, dtype=np.int64)  # coords of den*xi
            den = dual.den
            for P in v0.conductor_primes:
                qn, d = P.norm(), ctx.different_exponent(P)
                vden = P.e * _int_val(den, P.p)
                for row in range(len(zmat)):
                    x = list(map(int, zmat[row] @ int_basis))
                    v = _coord_valuation(P, x) - vden
                    if v >= -d:
                        fin_vals[row] *= 1.0 - 1.0 / qn
                    elif v == -d - 1:
                        fin_vals[row] *= -1.0 / qn
                    else:
                        fin_vals[row] = 0.0
        weights = arch_vals * fin_vals
        keep = np.abs(weights) >= tail_tol / 1000.0
        zk = zmat[keep]
        self.o_weights = weights[keep]
        # additive rotations are linear in the dual coordinates
        rot_table = np.array(
            [
                [
                    float(additive_char_rot(P_q, b * ctx.elem([int(j == i) for j in range(ctx.degree)])))
                    for b in dual_basis
                ]
                for i in range(ctx.degree)
            ]
        )  # shape (coord i of a-lift, dual basis j)
        coords_units = np.array([[int(c) for c in u] for u in units], dtype=float)
        if len(zk):
            rots = zk.astype(float) @ rot_table.T  # (points, degree)
            self.o_phases = np.exp(2j * np.pi * (rots @ coords_units.T))
        else:
            self.o_phases = np.zeros((0, len(units)), dtype=complex)

    def evaluate(self, chi: CharacterChi, G):
        """Return the report dict for one character and one black box G."""
        ring = self.ring
        units = ring.units
        nu = len(units)
        reps = self.field.class_data.representatives
        g_mat = np.array(
            [[complex(G(i, j)) for j in range(len(reps))] for i in range(nu)]
        )
        chi_vals = np.array([rot_to_complex(chi.chi_q.rot(u)) for u in units])
        cls = np.array([complex(c) for c in chi.class_values])
        lhs = complex(cls @ (chi_vals @ g_mat))
        g_cls = g_mat @ cls  # sum_I chi(I) G(a, I), indexed by a

        f_raw = 0.0 + 0.0j
        for di, val in self.f_items:
            f_raw += np.conj(chi_vals[di]) * val * g_cls[self.inv_perm[di]]
        f_side = (self.n_q**0.5 / self.dnorm) * f_raw

        chibar_g = np.conj(chi_vals) * g_cls[self.inv_perm]  # indexed by a
        o_side = complex(self.o_weights @ (self.o_phases @ chibar_g)) * self.n_q**-0.5

        residual = abs(self.n_q**-0.5 * lhs - (f_side - o_side))
        return {
            "lhs": lhs,
            "f_side": f_side,
            "o_side": o_side,
            "residual": residual,
            "scaled_residual": residual / (1.0 + abs(lhs)),
            "n_dual_terms": len(self.o_weights),
            "n_lattice_terms": len(self.f_items),
        }


def key_identity_sides(field, chi: CharacterChi, v0: TestFunctionV0, delta_scale,
                       G, tail_tol=1e-10):
    """One-shot evaluation; build a KeyIdentityFrame for repeated trials."""
    frame = KeyIdentityFrame(field, chi.ring, v0, delta_scale, tail_tol=tail_tol)
    return frame.evaluate(chi, G)


def a_delta_profile(field, chi: CharacterChi, v0: TestFunctionV0, delta_scale):
    """The coefficients a_delta = chi-bar(delta) V0(delta/Delta) / |Delta|.

    Returns sum |a_delta|, max |a_delta| |Delta|, and the dual tail
    sum_{xi != 0} hat V0(xi Delta), which measures how far sum |a_delta|
    sits from hat V0(0) = 1.
    """
    ctx = field.ctx
    ring = chi.ring
    dnorm = delta_norm(field, delta_scale)
    hi = max(b.hi for b in v0.arch)
    radii = [hi * delta_scale[i] * 1.0000001 for i in range(ctx.num_places)]
    total = 0.0
    biggest = 0.0
    count = 0
    for delta, _ in ctx.ideal_one().lattice_points_in_box(radii):
        val = v0.value(delta, delta_scale)
        if val == 0.0:
            continue
        a = val / dnorm  # |chi| = 1
        total += abs(a)
        biggest = max(biggest, abs(a) * dnorm)
        count += 1
    # dual check without the q-structure: sum over D^-1 of hat V0(xi Delta)
    dual = ctx.different_ideal().inverse()
    tol = 1e-12
    dual_radii = [b.hat_radius(tol) / delta_scale[i] for i, b in enumerate(v0.arch)]
    fin_const = 1.0
    for P, d in v0._diff_primes:
        fin_const *= float(P.norm()) ** (-d / 2.0)
    tail = 0.0
    pts = dual.lattice_points_in_box(dual_radii)
    if pts:
        zmat = np.array([z for _, z in pts], dtype=float)
        basis = dual.basis_elements()
        arch_vals = np.full(len(pts), v0.norm, dtype=complex)
        for i, b in enumerate(v0.arch):
            emb = np.array([complex(ctx.embed(bb, i)) for bb in basis])
            ws = (zmat @ emb) * delta_scale[i]
            if ctx.places[i][0] == "real":
                ws = ws.real
            arch_vals *= b.hat_batch(ws)
        tail = float(np.abs(arch_vals * fin_const).sum())
    return {
        "sum_abs": total,
        "max_scaled": biggest,
        "support_size": count,
        "dual_tail": tail,
        "poisson_gap": abs(total - 1.0),
    }


@dataclass
class AmplifierData:
    """Generators and coefficients of the two amplifier prime sets."""

    k_gens: list
    l_gens: list
    b_coeffs: dict
    c_coeffs: dict
    k_window: tuple
    l_window: tuple
    warnings: list


def amplifier_build(field, chi: CharacterChi, k_size, l_size, units_data=None,
                    eps=0.05):
    """Principal primes in dyadic windows with balanced generators.

    b_k = chi_q(k) / #K and c_l = chi_q(l)-bar / #L, so both normalization
    sums equal 1 exactly; requires disjoint windows.
    """
    ctx = field.ctx
    ring = chi.ring
    n_q = ring.prime.norm()
    units_data = units_data or field.units
    if not (k_size / l_size >= 2.0 or l_size / k_size >= 2.0):
        raise FieldError("amplifier windows must be separated")

    def window_gens(size):
        lo, hi = size / 2.0, size
        gens = []
        p = 2
        while p <= hi:
            if _is_prime(p):
                for P in ctx.factor_rational_prime(p):
                    if not (lo < P.norm() <= hi):
                        continue
                    if P.ideal == ring.prime.ideal:
                        continue
                    g = P.ideal.find_generator()
                    if g is None:
                        continue
                    n = abs(g.norm())
                    try:
                        g = balanced_generator(
                            units_data, g, balanced_targets(ctx, n), 0.45
                        )
                    except FieldError:
                        pass
                    gens.append(g)
            p += 1
        return gens, (lo, hi)

    k_gens, k_win = window_gens(k_size)
    l_gens, l_win = window_gens(l_size)
    warnings = []
    if not k_gens or not l_gens:
        raise FieldError("empty prime window for the amplifier")
    if len(k_gens) < k_size ** (1 - eps) / 10:
        warnings.append(f"#K = {len(k_gens)} below |K|^(1-eps)")
    if len(l_gens) < l_size ** (1 - eps) / 10:
        warnings.append(f"#L = {len(l_gens)} below |L|^(1-eps)")
    k_set = {g.coords for g in k_gens}
    if any(g.coords in k_set for g in l_gens):
        raise FieldError("amplifier windows overlap")
    b = {}
    for g in k_gens:
        val = rot_to_complex(chi.chi_q.rot(ring.reduce_elem(g)))
        b[g.coords] = val / len(k_gens)
    c = {}
    for g in l_gens:
        val = rot_to_complex(chi.chi_q.rot(ring.reduce_elem(g)))
        c[g.coords] = np.conj(val) / len(l_gens)
    return AmplifierData(k_gens, l_gens, b, c, k_win, l_win, warnings)


def amplifier_normalization(field, chi: CharacterChi, amp: AmplifierData):
    """(sum_k b_k chi-bar(k), sum_l c_l chi(l)); both must be exactly 1."""
    ring = chi.ring
    s_b = 0.0 + 0.0j
    for g in amp.k_gens:
        val = rot_to_complex(chi.chi_q.rot(ring.reduce_elem(g)))
        s_b += amp.b_coeffs[g.coords] * np.conj(val)
    s_c = 0.0 + 0.0j
    for g in amp.l_gens:
        val = rot_to_complex(chi.chi_q.rot(ring.reduce_elem(g)))
        s_c += amp.c_coeffs[g.coords] * val
    return complex(s_b), complex(s_c)
