import pytest
from hypothesis import given
from hypothesis import strategies as st

from builders import D2, Z2, diag, simple_element, speciality_cases
from gkfuse import linalg as la
from gkfuse.algebra import AlgebraError, diagonal_algebra
from gkfuse.equivariance import (GAction, SemigroupG, adjoint_action, build_c_algebra, check_action,
                                 classify_speciality, cyclic_group, equivariance_witness, restrict_action,
                                 semilattice, trivial_action, trivial_group)

SWAP = [[0, 1], [1, 0]]


@pytest.mark.parametrize("G", [trivial_group(), cyclic_group(2), cyclic_group(3), semilattice(), semilattice(("1", "e"))])
def test_semigroups_satisfy_inverse_laws(G):
    assert G.check() is None
    for g in range(len(G)):
        gs = G.star(g)
        assert G.mul(G.mul(g, gs), g) == g


def test_broken_table_is_rejected():
    # star of the non-unit element is wrong: g g* g = g fails
    G = SemigroupG(["1", "g"], [["1", "g"], ["g", "g"]], ["1", "1"], "1")
    assert G.check() is not None


def test_groups_and_idempotents():
    assert cyclic_group(3).is_group
    L = semilattice()
    assert not L.is_group and len(L.idempotents) == 2


def test_c_algebra_examples():
    assert build_c_algebra(Z2).algebra.dim == 1
    assert build_c_algebra(trivial_group()).algebra.dim == 1
    c = build_c_algebra(semilattice())
    A = c.algebra
    assert A.dim == 2
    e = c.idempotents.index(1)
    assert A.mul(A.basis(e), A.basis(e)) == A.basis(e)


def test_c_algebra_products_follow_idempotents():
    G = semilattice(("1", "e"))
    c = build_c_algebra(G)
    idem = c.idempotents
    for i, e in enumerate(idem):
        for j, f in enumerate(idem):
            assert c.algebra.mul(c.algebra.basis(i), c.algebra.basis(j)) == c.algebra.basis(idem.index(G.mul(e, f)))


def test_check_action_examples():
    assert check_action(trivial_action(Z2, 2), D2).ok
    assert check_action(GAction(Z2, 2, [la.identity(2), SWAP]), D2).ok
    L = semilattice()
    proj = diag(1, 0)
    assert check_action(GAction(L, 2, [la.identity(2), proj]), D2).ok


def test_check_action_witnesses():
    rep = check_action(GAction(Z2, 2, [la.identity(2), diag(2, 1)]), D2)
    assert not rep.ok and rep.failure[0] in ("semigroup law", "multiplicativity")
    rep = check_action(GAction(Z2, 2, [diag(1, -1), la.identity(2)]), D2)
    assert not rep.ok and rep.failure[0] == "unit acts nontrivially"


@given(st.integers(2, 4))
def test_cyclic_permutation_actions_are_valid(n):
    G = cyclic_group(n)
    D = diagonal_algebra(n)
    shift = [[1 if r == (c + 1) % n else 0 for c in range(n)] for r in range(n)]
    maps = [la.identity(n)]
    for _ in range(n - 1):
        maps.append(la.mat_mul(shift, maps[-1]))
    act = GAction(G, n, maps)
    assert check_action(act, D).ok


def test_restrict_action():
    act = GAction(Z2, 2, [la.identity(2), SWAP])
    r = restrict_action(act, [[1, 1]])
    assert r.dim == 1 and r.at(1) == la.mat([[1]])
    with pytest.raises(AlgebraError):
        restrict_action(act, [[1, 0]])


def test_equivariance_witness():
    from gkfuse.algebra import identity_hom
    a = GAction(Z2, 2, [la.identity(2), SWAP])
    assert equivariance_witness(identity_hom(D2), a, a) is None
    assert equivariance_witness(identity_hom(D2), a, trivial_action(Z2, 2)) is not None


def test_adjoint_action_is_an_action():
    s = GAction(Z2, 2, [la.identity(2), SWAP], "module")
    t = GAction(Z2, 1, [la.identity(1), la.identity(1)], "module")
    basis, act = adjoint_action(s, t)
    assert len(basis) == 2
    assert check_action(act).ok


def test_standard_space_is_very_special():
    z = simple_element()
    assert classify_speciality(z.space, J=z.ideal_basis()).kind == "very_special"


def test_speciality_cases_split_as_constructed():
    special, violating = speciality_cases()
    assert all(classify_speciality(sp, J=J).kind == "special" for sp, J, _, _ in special)
    assert all(classify_speciality(sp, J=J).kind == "neither" for sp, J, _, _ in violating)
