import pytest

from builders import (C, D2, Z2, simple_element, split_sequences, wide_element, z2_element,
                      z2_special_corner)
from gkfuse import linalg as la
from gkfuse.algebra import AlgebraError, AlgebraHom, hom_from_images, identity_hom, zero_hom
from gkfuse.equivariance import trivial_action
from gkfuse.fusion import (COND_CORNER, COND_SPLIT, FLAVORS, ROWS, STUB, TABLE, ApproxUnit, FusionRefused,
                           Refusal, dispatch, fuse_hom_left, fuse_hom_right, fuse_inv_corner_left,
                           fuse_inv_corner_right, fuse_split, fuse_unitization_split, right_linear_operators)
from gkfuse.modules import CornerEmbedding, canonical_matrix_corner, iso_corner
from gkfuse.sequences import SplitExactSeq, validate_l1
from gkfuse.words import MorphismWord, level_one_word, normalize

DIAG = hom_from_images(C, D2, [[1, 1]])


def _ops(z, h, v):
    return z.space.operator(h(v))


@pytest.mark.parametrize("middle", [False, True])
def test_hom_left_matches_operators(middle):
    z = wide_element()
    r, cert = fuse_hom_left(DIAG, z, middle=middle)
    assert cert.ok and validate_l1(r).ok
    assert r.A.same_as(C) and r.B.same_as(z.B)
    if not middle:
        # oracle: same ambient space, so operators must agree with z.s(phi(c))
        for rh, zh in ((r.s_plus, z.s_plus), (r.s_minus, z.s_minus)):
            assert r.space.operator(rh.column(0)) == z.space.operator(zh(DIAG.column(0)))


def test_hom_left_with_zero_hom_is_zero_element():
    r, cert = fuse_hom_left(zero_hom(C, D2), wide_element())
    assert cert.ok and r.is_zero_element()


def test_hom_left_rejects_wrong_target():
    with pytest.raises(AlgebraError):
        fuse_hom_left(identity_hom(D2), simple_element())


def test_hom_right_identity_and_projection():
    z = wide_element()
    r, cert = fuse_hom_right(z, identity_hom(D2))
    assert cert.ok and validate_l1(r).ok
    p = AlgebraHom(D2, C, [[1, 0]])
    r2, c2 = fuse_hom_right(z, p)
    assert c2.ok and validate_l1(r2).ok and r2.B.same_as(C)


def test_hom_right_into_bigger_algebra():
    r, cert = fuse_hom_right(simple_element(), DIAG)
    assert cert.ok and validate_l1(r).ok and r.B.same_as(D2)


def test_inverse_corner_left_trivial_group():
    z = simple_element()
    e = canonical_matrix_corner(C, trivial_action(z.G, 1), 2)
    u, cert = fuse_inv_corner_left(e, z)
    assert cert.ok and validate_l1(u).ok
    assert u.A.same_as(e.target)


def test_inverse_corner_left_special_route():
    u, cert = fuse_inv_corner_left(z2_special_corner(), z2_element())
    assert cert.ok and u.speciality().kind == "special"


def test_inverse_corner_left_generalized_without_factorization_refuses():
    z = simple_element()
    e = canonical_matrix_corner(C, trivial_action(z.G, 1), 2)
    g = CornerEmbedding(e.hom, e.alpha, e.delta, "generalized", n=2)
    with pytest.raises(FusionRefused, match="e · u"):
        fuse_inv_corner_left(g, z)


def test_inverse_corner_left_factored():
    z = simple_element()
    e = canonical_matrix_corner(C, trivial_action(z.G, 1), 2)
    g = CornerEmbedding(e.hom, e.alpha, e.delta, "generalized", n=2,
                        factorization=(identity_hom(e.target), e))
    w, chain = fuse_inv_corner_left(g, z)
    assert chain.ok and validate_l1(w).ok


def test_inverse_corner_right():
    z = simple_element()
    t = trivial_action(z.G, 1)
    u, cert = fuse_inv_corner_right(z, iso_corner(C, t, C, identity_hom(C), t))
    assert cert.ok and validate_l1(u).ok


def test_unitization_split():
    v, chain = fuse_unitization_split(simple_element())
    assert chain.ok and validate_l1(v).ok


def test_split_fusion_two_terms_and_refusal():
    v = wide_element()
    i = AlgebraHom(C, D2, [[1], [0]], "i")
    seq = SplitExactSeq(i, AlgebraHom(D2, C, [[0, 1]], "f"), AlgebraHom(C, D2, [[0], [1]], "s"))
    u, _ = fuse_hom_left(i, v)
    with pytest.raises(FusionRefused) as exc:
        fuse_split(seq, u=u)
    assert COND_SPLIT in str(exc.value)
    res = fuse_split(seq, u=u, v=v)
    assert len(res.terms) == 2
    assert all(c.ok for c in res.certificates)


def test_approx_unit_checks():
    assert ApproxUnit(D2, [[1, 0], [1, 1]]).check() is None
    assert ApproxUnit(D2, [[1, 0]]).check() is not None  # top is not a unit
    assert ApproxUnit(D2, [[0, 1], [1, 0]]).check() is not None  # not increasing
    assert ApproxUnit(D2, [[1, 0], [1, 1]]).index([1, 0]) == 1


def test_right_linear_operators_dimension():
    # oracle: right-linear maps of a unital algebra are left multiplications
    from builders import M2
    for A in (C, D2, M2):
        assert len(right_linear_operators(A)) == A.dim


def test_dispatch_table_shape():
    assert tuple(TABLE) == ROWS
    assert all(len(TABLE[r]) == len(FLAVORS) for r in ROWS)
    assert TABLE["e^-1.z"][2] == COND_CORNER and TABLE["D_s.z"][2] == COND_SPLIT


def test_dispatch_refusals_are_returned():
    z = simple_element()
    r = dispatch("kappa.z", "very_special", z, z)
    assert isinstance(r, Refusal) and r.reason == STUB
    r = dispatch("D_A.z", "general", z)
    assert isinstance(r, Refusal) and r.to_json()["refused"]
    with pytest.raises(ValueError):
        dispatch("nope", "general", z)


def test_diagram_fact_closes_under_normalization():
    # both sides of the certified square r . id = phi . z reach one normal form
    r, cert = fuse_hom_left(DIAG, wide_element())
    fact = cert.fact()
    top = MorphismWord.of(*fact.lhs)
    bottom = MorphismWord(top.source, top.target, fact.rhs)
    assert normalize(top, [fact]).same_as(normalize(bottom, [fact]))
    assert level_one_word(r).shape() == ["hom", "split", "inv_corner"]
