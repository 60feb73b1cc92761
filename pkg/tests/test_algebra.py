import pytest
from hypothesis import given
from hypothesis import strategies as st

from gkfuse import linalg as la
from gkfuse.algebra import (Algebra, AlgebraError, AlgebraHom, OperatorAlgebra, Registry, amplify, base_field,
                            check_algebra, corner_hom, diagonal_algebra, direct_sum, hom_from_images,
                            identity_hom, matrix_algebra, matrix_units, plus, subalgebra, tensor, zero_hom)

C = base_field("C")
D2 = diagonal_algebra(2, "D2")
M2 = matrix_units(2)

small = st.integers(-2, 2)


def vec_of(dim):
    return st.lists(small, min_size=dim, max_size=dim).map(la.vec)


def test_standard_algebras_pass_checks():
    for a in (C, D2, M2, matrix_algebra(2, D2), tensor(D2, M2), direct_sum(C, M2), plus(D2)):
        rep = check_algebra(a)
        assert rep.ok, a.label
        assert rep.associative


def test_nonassociative_table_reports_witness():
    # b0 b0 = b1, b1 b0 = b1, b0 b1 = 0: (b0 b0) b0 = b1 but b0 (b0 b0) = 0
    a = Algebra("bad", 2, {(0, 0, 1): 1, (1, 0, 1): 1})
    rep = check_algebra(a)
    assert not rep.associative
    i, j, k = rep.assoc_witness
    lhs = a.mul(a.mul(a.basis(i), a.basis(j)), a.basis(k))
    rhs = a.mul(a.basis(i), a.mul(a.basis(j), a.basis(k)))
    assert lhs != rhs


def test_nilpotent_algebra_is_not_quadratik():
    a = Algebra("N2", 2, {(0, 0, 1): 1})
    rep = check_algebra(a)
    assert rep.associative and not rep.quadratik and not rep.ok
    with pytest.raises(AlgebraError):
        Registry().register(a)


def test_wrong_unit_is_reported():
    a = Algebra("D2u", 2, {(0, 0, 0): 1, (1, 1, 1): 1}, unit=[1, 0])
    assert check_algebra(a).unit_witness == 1


def test_units():
    assert D2.unit == la.vec([1, 1])
    assert M2.unit == la.vec([1, 0, 0, 1])
    assert direct_sum(C, D2).unit == la.vec([1, 1, 1])
    Dp = plus(D2)
    assert Dp.dim == 3 and Dp.unit == la.vec([0, 0, 1])


@given(vec_of(4), vec_of(4))
def test_matrix_units_multiply_like_matrices(x, y):
    def as_mat(v):
        return [[v[0], v[1]], [v[2], v[3]]]
    prod = la.mat_mul(as_mat(x), as_mat(y))
    assert M2.mul(x, y) == [prod[0][0], prod[0][1], prod[1][0], prod[1][1]]


@given(vec_of(8), vec_of(8), vec_of(8))
def test_matrix_algebra_associative_on_elements(x, y, z):
    A = matrix_algebra(2, D2)
    assert A.mul(A.mul(x, y), z) == A.mul(x, A.mul(y, z))


def test_tensor_and_matrix_dimensions():
    assert tensor(D2, M2).dim == 8
    assert matrix_algebra(3, C).dim == 9


def test_corner_and_amplified_homs_are_multiplicative():
    h = corner_hom(D2, 2, 1)
    assert h.is_multiplicative() and h.is_injective()
    amp = amplify(identity_hom(D2), 2)
    assert amp.is_multiplicative()
    assert amp.matrix == la.identity(8)


def test_hom_checks():
    h = hom_from_images(C, D2, [[1, 1]])
    assert h.is_multiplicative() and h.is_injective() and not h.is_surjective()
    bad = AlgebraHom(C, D2, [[2], [0]])
    assert bad.multiplicativity_witness() is not None
    assert zero_hom(C, D2).is_zero()
    with pytest.raises(la.DimensionError):
        AlgebraHom(C, D2, [[1]])


def test_then_composes_in_diagram_order():
    f = hom_from_images(C, D2, [[1, 1]])
    g = AlgebraHom(D2, C, [[0, 1]])
    assert f.then(g).matrix == la.mat([[1]])


def test_subalgebra_of_diagonal():
    sub, incl = subalgebra(direct_sum(D2, D2), [[1, 0, 1, 0], [0, 1, 0, 1]], "diag")
    assert sub.dim == 2 and incl.is_multiplicative() and check_algebra(sub).ok


def test_operator_algebra_coords():
    ops = OperatorAlgebra("D2ops", 2, [D2.left_matrix(D2.basis(k)) for k in range(2)])
    assert ops.dim == 2
    assert ops.contains(la.identity(2))
    assert not ops.contains(la.mat([[0, 1], [0, 0]]))


def test_registry_round_trip():
    r = Registry()
    r.register(D2)
    assert r.get("D2") is D2
    assert "D2" in r.labels()
