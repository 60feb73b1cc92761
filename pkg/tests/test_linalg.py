from itertools import permutations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gkfuse import linalg as la
from gkfuse.scalar import ONE, ZERO, Scalar


def matrices(rows=st.integers(1, 4), cols=st.integers(1, 4)):
    return st.tuples(rows, cols).flatmap(
        lambda rc: st.lists(st.lists(st.integers(-3, 3), min_size=rc[1], max_size=rc[1]),
                            min_size=rc[0], max_size=rc[0]))


def det_oracle(m):
    """Leibniz expansion over all permutations."""
    n = len(m)
    total = Scalar(0)
    for p in permutations(range(n)):
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if p[i] > p[j])
        term = Scalar(-1 if inv % 2 else 1)
        for i in range(n):
            term = term * Scalar.coerce(m[i][p[i]])
        total = total + term
    return total


@given(matrices())
def test_rank_nullity(m):
    m = la.mat(m)
    ker = la.kernel(m, len(m[0]))
    assert la.rank(m) + len(ker) == len(m[0])
    for v in ker:
        assert la.is_zero_vec(la.mat_vec(m, v))


@given(matrices(rows=st.just(3), cols=st.just(3)))
def test_inverse_iff_nonzero_determinant(m):
    m = la.mat(m)
    if det_oracle(m) == ZERO:
        assert la.rank(m) < 3
    else:
        inv = la.inverse(m)
        assert la.mat_mul(m, inv) == la.identity(3) == la.mat_mul(inv, m)


@given(matrices(), st.data())
def test_solve_linear_consistent(m, data):
    m = la.mat(m)
    x = data.draw(st.lists(st.integers(-3, 3), min_size=len(m[0]), max_size=len(m[0])))
    b = la.mat_vec(m, la.vec(x))
    sol = la.solve_linear(m, b)
    assert sol.consistent
    assert la.mat_vec(m, sol.particular) == b


@given(matrices(), matrices())
def test_kron_mixed_product(a, b):
    a, b = la.mat(a), la.mat(b)
    ia, ib = la.identity(len(a[0])), la.identity(len(b[0]))
    # (A (x) B)(I (x) I) = A (x) B
    assert la.mat_mul(la.kron(a, b), la.kron(ia, ib)) == la.kron(a, b)


def test_span_membership():
    basis = [la.vec([1, 0, 1]), la.vec([0, 1, 1])]
    assert la.span_membership(la.vec([1, 1, 2]), basis).in_span
    assert not la.span_membership(la.vec([0, 0, 1]), basis).in_span


def test_block_diag_and_transpose():
    m = la.block_diag([[ONE]], [[ONE, ONE], [ZERO, ONE]])
    assert la.shape(m) == (3, 3)
    assert la.transpose(la.transpose(m)) == m


def test_inverse_of_singular_raises():
    with pytest.raises((ValueError, ZeroDivisionError)):
        la.inverse(la.mat([[1, 2], [2, 4]]))
