"""Exact integer lattice linear algebra: Hermite normal form, membership, duals.

Lattices are rows of integer matrices (lists of lists).  Everything here is
exact; no floats.  Matrices are small (degree <= 4), so plain Euclidean
row reduction is fast enough.
"""

from __future__ import annotations

from fractions import Fraction


def hnf(rows):
    """Row-style HNF of an integer matrix given as a list of rows.

    Returns an upper-triangular-by-columns canonical basis of the row
    lattice: pivots positive, entries above each pivot reduced to
    [0, pivot).  Zero rows are dropped.
    """
    m = [list(r) for r in rows]
    if not m:
        return []
    ncols = len(m[0])
    pivot_row = 0
    for col in range(ncols):
        # Euclidean elimination below pivot_row in this column.
        while True:
            nz = [i for i in range(pivot_row, len(m)) if m[i][col] != 0]
            if not nz:
                break
            i_min = min(nz, key=lambda i: abs(m[i][col]))
            m[pivot_row], m[i_min] = m[i_min], m[pivot_row]
            done = True
            for i in range(pivot_row + 1, len(m)):
                if m[i][col] != 0:
                    q = m[i][col] // m[pivot_row][col]
                    m[i] = [a - q * b for a, b in zip(m[i], m[pivot_row])]
                    if m[i][col] != 0:
                        done = False
            if done:
                break
        if pivot_row < len(m) and m[pivot_row][col] != 0:
            if m[pivot_row][col] < 0:
                m[pivot_row] = [-a for a in m[pivot_row]]
            p = m[pivot_row][col]
            for i in range(pivot_row):
                q = m[i][col] // p
                if q:
                    m[i] = [a - q * b for a, b in zip(m[i], m[pivot_row])]
            pivot_row += 1
    return [r for r in m[:pivot_row]]


def det_upper(rows):
    """Determinant of a square upper-triangular-pivot HNF basis."""
    d = 1
    for i, r in enumerate(rows):
        d *= r[i]
    return d


def solve_integer(rows, target):
    """Solve z @ rows == target over the integers, or return None.

    ``rows`` need not be reduced; uses HNF with transform tracking.
    """
    m = [list(r) for r in rows]
    n = len(m)
    u = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    ncols = len(m[0]) if m else 0
    pivot_row = 0
    pivots = []
    for col in range(ncols):
        while True:
            nz = [i for i in range(pivot_row, n) if m[i][col] != 0]
            if not nz:
                break
            i_min = min(nz, key=lambda i: abs(m[i][col]))
            m[pivot_row], m[i_min] = m[i_min], m[pivot_row]
            u[pivot_row], u[i_min] = u[i_min], u[pivot_row]
            done = True
            for i in range(pivot_row + 1, n):
                if m[i][col] != 0:
                    q = m[i][col] // m[pivot_row][col]
                    m[i] = [a - q * b for a, b in zip(m[i], m[pivot_row])]
                    u[i] = [a - q * b for a, b in zip(u[i], u[pivot_row])]
                    if m[i][col] != 0:
                        done = False
            if done:
                break
        if pivot_row < n and m[pivot_row][col] != 0:
            if m[pivot_row][col] < 0:
                m[pivot_row] = [-a for a in m[pivot_row]]
                u[pivot_row] = [-a for a in u[pivot_row]]
            pivots.append((pivot_row, col))
            pivot_row += 1
    # Back-substitute target against the triangular system.
    t = list(target)
    coeff = [0] * n
    for i, col in pivots:
        if t[col] % m[i][col] != 0:
            return None
        q = t[col] // m[i][col]
        coeff[i] = q
        t = [a - q * b for a, b in zip(t, m[i])]
    if any(t):
        return None
    # coeff is in the reduced basis; map back through u.
    out = [0] * n
    for i in range(n):
        if coeff[i]:
            out = [a + coeff[i] * b for a, b in zip(out, u[i])]
    return out


def in_lattice(basis, vec):
    """Exact membership of an integer vector in the row lattice of ``basis``."""
    return solve_integer(basis, vec) is not None


def reduce_mod(basis, vec):
    """Canonical representative of ``vec`` modulo the full-rank HNF ``basis``.

    ``basis`` must be a square HNF (pivots on the diagonal).  Pivots are
    processed in ascending order, so row i never disturbs coordinates
    already reduced; the result lies in the box prod [0, basis[i][i]).
    """
    v = list(vec)
    n = len(basis)
    for i in range(n):
        p = basis[i][i]
        q = v[i] // p
        if q:
            v = [a - q * b for a, b in zip(v, basis[i])]
    return v


def mat_inv_fraction(rows):
    """Exact inverse of a square matrix, returned with Fraction entries."""
    n = len(rows)
    a = [[Fraction(x) for x in r] + [Fraction(int(i == j)) for j in range(n)]
         for i, r in enumerate(rows)]
    for col in range(n):
        piv = next(i for i in range(col, n) if a[i][col] != 0)
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        a[col] = [x * inv for x in a[col]]
        for i in range(n):
            if i != col and a[i][col] != 0:
                f = a[i][col]
                a[i] = [x - f * y for x, y in zip(a[i], a[col])]
    return [r[n:] for r in a]


def lattice_solve_fraction(basis, vec):
    """Coordinates of ``vec`` (Fractions ok) in the basis rows, as Fractions."""
    inv = mat_inv_fraction(basis)
    n = len(basis)
    return [sum(Fraction(vec[j]) * inv[j][i] for j in range(n)) for i in range(n)]
