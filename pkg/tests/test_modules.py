import pytest
from hypothesis import given
from hypothesis import strategies as st

from builders import C, D2, Z2, z2_special_corner
from gkfuse import linalg as la
from gkfuse.algebra import AlgebraError, hom_from_images, identity_hom, matrix_algebra
from gkfuse.equivariance import trivial_action, trivial_group
from gkfuse.modules import (canonical_matrix_corner, compose_corners, compute_adjointables, compute_compacts,
                            corner_embedding, free_module, iso_corner)


@given(st.integers(1, 3))
def test_compacts_of_free_module_over_field(k):
    # oracle: K(C^k) = M_k(C) has dimension k^2
    m = free_module(C, trivial_action(trivial_group(), 1), k)
    assert m.check() is None
    assert compute_compacts(m).dim == k * k
    assert compute_adjointables(m).dim == k * k


def test_free_module_over_d2():
    m = free_module(D2, trivial_action(Z2, 2), 2)
    assert m.check() is None
    # over D2 the compacts of D2^2 are M_2(D2), dimension 8
    assert compute_compacts(m).dim == 8


@pytest.mark.parametrize("n", [1, 2, 3])
def test_canonical_corner(n):
    e = canonical_matrix_corner(D2, trivial_action(Z2, 2), n)
    assert e.check() is None
    assert e.target.same_as(matrix_algebra(n, D2))
    assert e.klass == "very_special"
    assert e.corner_pos == n - 1


def test_corner_position():
    e = canonical_matrix_corner(C, trivial_action(Z2, 1), 2, pos=0)
    assert e.hom.matrix == la.mat([[1], [0], [0], [0]])


def test_special_corner_from_module_data():
    e = z2_special_corner()
    assert e.check() is None
    assert e.klass == "special"


def test_iso_corner_requires_bijection():
    t = trivial_action(Z2, 1)
    assert iso_corner(C, t, C, identity_hom(C), t).check() is None
    with pytest.raises(AlgebraError):
        iso_corner(C, t, D2, hom_from_images(C, D2, [[1, 1]]), trivial_action(Z2, 2))


def test_compose_with_identity_corner():
    t = trivial_action(Z2, 1)
    ident = iso_corner(C, t, C, identity_hom(C), t)
    e = canonical_matrix_corner(C, t, 2)
    assert compose_corners(ident, e) is e
    comp = compose_corners(e, canonical_matrix_corner(matrix_algebra(2, C), trivial_action(Z2, 4), 2))
    assert comp.kind == "composite" and comp.klass == "very_special"
    assert comp.hom.is_injective()


def test_corner_into_compacts():
    m = free_module(C, trivial_action(Z2, 1), 1)
    e = corner_embedding(C, trivial_action(Z2, 1), m)
    assert e.check() is None
    # compacts of a free module are identified with matrices: K(C (+) C) = M_2(C)
    assert e.kind == "canonical_matrix" and e.n == 2
    assert e.target.dim == 4
