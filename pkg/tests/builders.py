"""Small constructed instances shared by the test modules."""
from gkfuse import linalg as la
from gkfuse.algebra import (AlgebraHom, base_field, diagonal_algebra, direct_sum, hom_from_images,
                            matrix_algebra, matrix_units, sum_injections, sum_projections)
from gkfuse.equivariance import GAction, M2Space, cyclic_group, regular_ambient, trivial_action, trivial_group
from gkfuse.fusion import ApproxUnit
from gkfuse.modules import canonical_matrix_corner
from gkfuse.sequences import SplitExactSeq, make_l1, standard_space, unitization_sequence

C = base_field("C")
D2 = diagonal_algebra(2, "D2")
D3 = diagonal_algebra(3, "D3")
M2 = matrix_units(2)
Z2 = cyclic_group(2)


def diag(*xs):
    n = len(xs)
    return [[xs[i] if i == j else 0 for j in range(n)] for i in range(n)]


def unit_matrix(n, i, j):
    return [[1 if (r, c) == (i, j) else 0 for c in range(n)] for r in range(n)]


def simple_element(s_plus=((1,), (1,)), label="z"):
    """C -> C through D2: J = first coordinate, s_- the second, s_+ given."""
    return make_l1(C, C, D2, C, [[1]], [[1], [0]], [[0], [1]], [list(r) for r in s_plus], label=label)


def wide_element(label="v"):
    """D2 -> D2 through D2 + D2 with s_+ the diagonal."""
    X = direct_sum(D2, D2, "D2+D2")
    return make_l1(D2, D2, X, D2, la.identity(2), [[1, 0], [0, 1], [0, 0], [0, 0]],
                   [[0, 0], [0, 0], [1, 0], [0, 1]], [[1, 0], [0, 1], [1, 0], [0, 1]], label=label)


def z2_element(label="w"):
    """The wide element over Z/2 with trivial actions."""
    X = direct_sum(D2, D2, "D2+D2")
    return make_l1(D2, D2, X, D2, la.identity(2), [[1, 0], [0, 1], [0, 0], [0, 0]],
                   [[0, 0], [0, 0], [1, 0], [0, 1]], [[1, 0], [0, 1], [1, 0], [0, 1]],
                   space=standard_space(X, G=Z2), alpha=trivial_action(Z2, 2), label=label)


def z2_special_corner():
    """Canonical corner of M_2(D2) over Z/2 given by W_g in M_2(D2+), not very special."""
    one, zero = [0, 0, 1], [0, 0, 0]
    W = [[[one, zero], [zero, one]], [[[0, -2, 1], zero], [zero, one]]]
    return canonical_matrix_corner(D2, trivial_action(Z2, 2), 2, W=W)


def direct_sum_sequence(J, A, twist=None):
    """J -> J + A -> A; with twist h: A -> J the split is a -> (h(a), a)."""
    X = direct_sum(J, A, f"({J.label}+{A.label})")
    iota, ia = sum_injections(J, A, X)
    _, f = sum_projections(J, A, X)
    if twist is None:
        s = ia
    else:
        s = hom_from_images(A, X, [list(twist(A.basis(k))) + A.basis(k) for k in range(A.dim)], "s_twist")
    return SplitExactSeq(iota, f, s, f"{J.label}>{X.label}>{A.label}")


def split_sequences():
    """Twenty split exact sequences with middle algebra of dimension at most 8."""
    D1 = C
    M2C = matrix_algebra(2, C, "M2")
    algs = [D1, D2, M2C]
    out = []
    for J in algs:
        for A in algs:
            out.append(direct_sum_sequence(J, A))
    # twisted splits a -> (h(a), a) through unital homs into J
    out.append(direct_sum_sequence(D2, C, twist=lambda v: [v[0], v[0]]))
    out.append(direct_sum_sequence(D3, C, twist=lambda v: [v[0], v[0], v[0]]))
    out.append(direct_sum_sequence(M2C, C, twist=lambda v: [v[0], 0, 0, v[0]]))
    out.append(direct_sum_sequence(D2, D2, twist=lambda v: [v[1], v[0]]))
    out.append(direct_sum_sequence(M2C, D2, twist=lambda v: [v[0], 0, 0, v[1]]))
    out.append(direct_sum_sequence(D3, D2, twist=lambda v: [v[0], v[1], 0]))
    for A in (C, D2, D3, M2C):
        out.append(unitization_sequence(A))
    out.append(direct_sum_sequence(C, C).tensor(2))
    assert len(out) == 20
    return out


def _z2_space(X, t1):
    n, rep, _ = regular_ambient(X)
    S = GAction(Z2, n, [la.identity(n), la.identity(n)], "module")
    T = GAction(Z2, n, [la.identity(n), t1], "module")
    return M2Space(X, n, rep, S, T)


def speciality_cases():
    """(space, J basis, expected special?) over Z/2 with S trivial and T_g = u.

    Here the operator T_g S_g* - 1 is u - 1, so speciality holds exactly when u - 1
    lies in J; the diagonal cases make that a support condition."""
    special, violating = [], []
    for m in (2, 3, 4):
        X = diagonal_algebra(m)
        for k in range(m):
            u = [1] * m
            u[k] = -1
            sp = _z2_space(X, diag(*u))
            special.append((sp, [X.basis(k)], u, k))
            violating.append((sp, [X.basis((k + 1) % m)], u, (k + 1) % m))
    M = matrix_units(2)
    # left multiplication by diag(1, -1) on the matrix units e_ij, index 2i + j
    spM = _z2_space(M, la.kron(diag(1, -1), la.identity(2)))
    special.append((spM, M.basis_vectors(), None, None))
    violating.append((spM, [], None, None))
    return special, violating


def approx_unit_cases():
    """Five (A, chain, phi_ops, space_dim, alpha, S, lam) instances for the adjointable extension."""
    out = []
    out.append((D3, [[1, 0, 0], [1, 1, 0], [1, 1, 1]], [unit_matrix(3, i, i) for i in range(3)], 3,
                None, None, 1))
    sw = [[0, 1], [1, 0]]
    alpha = GAction(Z2, 2, [la.identity(2), sw])
    S = GAction(Z2, 2, [la.identity(2), sw], "module")
    out.append((D2, [[1, 1]], [unit_matrix(2, 0, 0), unit_matrix(2, 1, 1)], 2, alpha, S, 2))
    ops = [M2.left_matrix(M2.basis(i)) for i in range(4)]
    out.append((M2, [[1, 0, 0, 0], [1, 0, 0, 1]], ops, 4, None, None, 1))
    # non-unital phi: D2 into the first two coordinates of C^3
    out.append((D2, [[1, 0], [1, 1]], [unit_matrix(3, 0, 0), unit_matrix(3, 1, 1)], 3, None, None, 3))
    # M_2 amplified: a -> a (x) 1 on C^2 (x) C^2, equivariant for conjugation by diag(1, -1)
    amp = [la.kron(unit_matrix(2, i, j), la.identity(2)) for i in range(2) for j in range(2)]
    flip = diag(1, -1)
    conj = la.kron(flip, flip)  # on matrix units e_ij -> (-1)^(i+j) e_ij
    alphaM = GAction(Z2, 4, [la.identity(4), conj])
    Sm = GAction(Z2, 4, [la.identity(4), la.kron(flip, la.identity(2))], "module")
    out.append((M2, [[1, 0, 0, 0], [1, 0, 0, 1]], amp, 4, alphaM, Sm, 1))
    return [(A, ApproxUnit(A, chain), ops_, V, al, s, lam) for A, chain, ops_, V, al, s, lam in out]


def commutation_cases():
    """Five (very special corner of X, sequence J -> X -> A) pairs over the trivial group."""
    seqs = split_sequences()
    picks = [seqs[0], seqs[1], seqs[4], seqs[9], seqs[15]]
    out = []
    for k, seq in enumerate(picks):
        n = 2 if k % 2 == 0 else 3
        eM = canonical_matrix_corner(seq.X, trivial_action(trivial_group(), seq.X.dim), n)
        out.append((eM, seq))
    return out


# acceptance criterion number -> (passed, title), printed by the terminal summary hook
ACCEPTANCE = {}
