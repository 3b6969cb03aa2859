"""Exact integer lattice algebra underneath everything else."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nfsums.hnf import hnf, in_lattice, mat_inv_fraction, reduce_mod, solve_integer

matrices = st.lists(
    st.lists(st.integers(-9, 9), min_size=3, max_size=3), min_size=3, max_size=6
)


def _rank(rows):
    return np.linalg.matrix_rank(np.array(rows, dtype=float)) if rows else 0


@given(matrices)
@settings(max_examples=120, deadline=None)
def test_hnf_canonical_under_row_shuffle(rows):
    h1 = hnf(rows)
    h2 = hnf(list(reversed(rows)))
    assert h1 == h2


@given(matrices)
@settings(max_examples=80, deadline=None)
def test_hnf_spans_same_lattice(rows):
    h = hnf(rows)
    for r in rows:
        assert solve_integer(h, r) is not None
    for r in h:
        assert solve_integer(rows, r) is not None


def test_reduce_mod_canonical():
    basis = [[2, 1, 0], [0, 3, 1], [0, 0, 5]]
    seen = set()
    for v in [(0, 0, 0), (2, 1, 0), (5, 7, 3), (-4, -4, -4), (1, 2, 3)]:
        r = tuple(reduce_mod(basis, list(v)))
        assert 0 <= r[0] < 2 and 0 <= r[1] < 3 and 0 <= r[2] < 5
        diff = [a - b for a, b in zip(v, r)]
        assert in_lattice(basis, diff)
        seen.add(r)
    # two vectors in the same coset reduce identically
    a = reduce_mod(basis, [7, 8, 9])
    b = reduce_mod(basis, [7 + 2, 8 + 1, 9])
    assert a == b


def test_solve_and_inverse():
    rows = [[2, 0, 1], [1, 3, 0], [0, 1, 4]]
    z = solve_integer(rows, [3, 3, 1])
    assert z is not None
    got = [sum(zi * ri[j] for zi, ri in zip(z, rows)) for j in range(3)]
    assert got == [3, 3, 1]
    assert solve_integer([[2, 0], [0, 2]], [1, 0]) is None
    inv = mat_inv_fraction(rows)
    ident = [
        [sum(rows[i][k] * inv[k][j] for k in range(3)) for j in range(3)]
        for i in range(3)
    ]
    assert ident == [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
