import pytest

from builders import C, D2, Z2, simple_element, split_sequences, wide_element
from gkfuse import linalg as la
from gkfuse.algebra import AlgebraError, AlgebraHom, check_algebra
from gkfuse.equivariance import trivial_action
from gkfuse.sequences import (derive_f, make_l1, middle_space, oplus_algebra, require_valid, unitization_sequence,
                              validate_l1, zero_element, zeta)


def test_constructed_sequences_are_split_exact():
    for seq in split_sequences():
        assert seq.check() is None, seq.label


def test_broken_split_is_reported():
    seq = split_sequences()[0]
    bad = type(seq)(seq.iota, seq.f, seq.iota)  # iota is not a section of f
    assert bad.check() is not None


def test_unitization_sequence_with_group_action():
    swap = trivial_action(Z2, 2)
    seq = unitization_sequence(D2, swap)
    assert seq.check() is None
    assert seq.X.dim == 3


def test_tensor_of_sequence():
    seq = split_sequences()[0].tensor(2)
    assert seq.check() is None and seq.X.dim == 8


def test_simple_elements_validate():
    for z in (simple_element(), wide_element()):
        cert = validate_l1(z)
        assert cert.ok, cert.failures
        assert z.very_special


def test_s_plus_outside_ideal_fails_condition_d():
    # s_+ = s_- + something not in J: s_+(1) = (0, 2) is not multiplicative either
    z = make_l1(C, C, D2, C, [[1]], [[1], [0]], [[0], [1]], [[1], [0]], label="bad")
    cert = validate_l1(z)
    assert not cert.ok
    assert {label for label, _ in cert.failures} <= set("abcdefg")
    with pytest.raises(AlgebraError):
        require_valid(z)


def test_not_a_direct_sum_fails_condition_c():
    z = make_l1(C, C, D2, C, [[1]], [[1], [0]], [[1], [0]], [[1], [0]], label="bad")
    cert = validate_l1(z)
    assert not cert.ok and "c" in {label for label, _ in cert.failures}


def test_zero_element():
    z = zero_element(D2)
    assert validate_l1(z).ok
    assert z.is_zero_element()
    assert not simple_element().is_zero_element()


def test_derived_quotient_map():
    z = simple_element()
    f = derive_f(z.iota, z.s_minus)
    assert la.is_zero_mat(la.mat_mul(f.matrix, z.iota.matrix))
    assert la.mat_mul(f.matrix, z.s_minus.matrix) == la.identity(1)


def test_middle_space_and_twisted_sum():
    z = wide_element()
    ms = middle_space(z.iota, z.s_plus)
    assert check_algebra(ms.algebra).ok
    assert ms.ideal_hom().is_multiplicative() and ms.graph_hom().is_multiplicative()
    assert ms.first_projection().is_multiplicative()
    alg, _ = oplus_algebra(z.iota, z.s_plus)
    assert check_algebra(alg).associative
    zz, zi = zeta(z.iota, z.s_plus, ms, alg)
    assert zz.is_multiplicative() and zi.is_multiplicative()
    assert la.mat_mul(zz.matrix, zi.matrix) == la.identity(alg.dim)


def test_relabel_keeps_data():
    z = simple_element()
    w = z.relabel("other")
    assert w.label == "other" and w.s_plus.matrix == z.s_plus.matrix
