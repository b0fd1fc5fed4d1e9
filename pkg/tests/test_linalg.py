"""Tests for the exact integer matrix routines."""

import pytest

from og6_lattice.linalg import adjugate_int, det_int, identity, matmul


@pytest.mark.parametrize(
    "A",
    [
        [[5]],
        [[2, 1], [1, 2]],
        [[4, 2, 1], [2, 6, -3], [1, -3, 32]],
        [[30, 14, -15, 9], [14, 30, 11, -13], [-15, 11, 32, 7], [9, -13, 7, 32]],
    ],
)
def test_adjugate_times_matrix_is_det_identity(A):
    adj = adjugate_int(A)
    d = det_int(A)

    n = len(A)
    expected = [[d * x for x in row] for row in identity(n)]
    assert matmul(A, adj) == expected
    assert matmul(adj, A) == expected
    assert all(isinstance(x, int) for row in adj for x in row)


def test_adjugate_of_a_singular_matrix():
    assert adjugate_int([[1, 2], [2, 4]]) == [[4, -2], [-2, 1]]
