"""Split-exact sequences, middle spaces, twisted sums and level-one elements."""
from __future__ import annotations

from dataclasses import dataclass, field

from . import linalg as la
from .algebra import (Algebra, AlgebraError, AlgebraHom, Subspace, direct_sum, hom_from_images,
                      identity_hom, ideal_witness, plus, subalgebra)
from .equivariance import (GAction, M2Space, NotCornerInvariant, Speciality, check_action,
                           classify_speciality, equivariance_witness, restrict_action,
                           trivial_action, trivial_group)
from .modules import CornerEmbedding, iso_corner
from .scalar import ONE, ZERO


# --- split-exact sequences -------------------------------------------------------

class SplitExactSeq:
    """J --iota--> X --f--> A with a split s: A -> X."""

    def __init__(self, iota: AlgebraHom, f: AlgebraHom, s: AlgebraHom, label=None,
                 actions: tuple | None = None):
        self.iota, self.f, self.s = iota, f, s
        self.J, self.X, self.A = iota.source, iota.target, f.target
        self.label = label or f"S[{self.X.label}]"
        self.actions = actions  # (on J, on X, on A) or None

    def check(self):
        """None if the sequence is split exact (and equivariant when actions are given)."""
        iota, f, s = self.iota, self.f, self.s
        if not (iota.target.same_as(f.source) and s.source.same_as(f.target)
                and s.target.same_as(self.X)):
            return ("maps do not compose",)
        for name, h in (("iota", iota), ("f", f), ("s", s)):
            w = h.multiplicativity_witness()
            if w is not None:
                return (f"{name} not multiplicative", w)
        if not iota.is_injective():
            return ("iota not injective", iota.kernel()[0])
        img = [iota.column(i) for i in range(self.J.dim)]
        w = ideal_witness(self.X, img)
        if w is not None:
            return ("iota(J) not an ideal", w)
        fs = s.then(f)
        if fs.matrix != la.identity(self.A.dim):
            return ("f o s is not the identity",)
        ker = Subspace(self.X, f.kernel())
        if ker.dim != self.J.dim or not ker.contains_all(img):
            return ("ker f differs from iota(J)",)
        if self.actions is not None:
            aj, ax, aa = self.actions
            for name, h, p, q in (("iota", iota, aj, ax), ("f", f, ax, aa), ("s", s, aa, ax)):
                w = equivariance_witness(h, p, q)
                if w is not None:
                    return (f"{name} not equivariant", w)
        return None

    def tensor(self, n: int) -> "SplitExactSeq":
        """(M_n J, M_n X, M_n A) with the amplified maps."""
        from .algebra import amplify, matrix_algebra
        J, X, A = (matrix_algebra(n, a) for a in (self.J, self.X, self.A))
        acts = None
        if self.actions is not None:
            from .equivariance import tensor_action
            t = trivial_action(self.actions[0].G, n * n)
            acts = tuple(tensor_action(t, a) for a in self.actions)
        return SplitExactSeq(amplify(self.iota, n, J, X), amplify(self.f, n, X, A),
                             amplify(self.s, n, A, X), f"{self.label}(x)M{n}", acts)

    def __repr__(self):
        return f"SplitExactSeq({self.label}: {self.J.label} -> {self.X.label} -> {self.A.label})"


def unitization_sequence(A: Algebra, alpha: GAction | None = None) -> SplitExactSeq:
    """0 -> A -> A+ -> C -> 0 split by c -> c*1 (groups only for the action)."""
    Ap = plus(A)
    C = Algebra("C", 1, {(0, 0, 0): 1}, [1])
    d = A.dim
    iota = hom_from_images(A, Ap, [la.unit_vec(d + 1, k) for k in range(d)], f"incl[{A.label}]")
    f = AlgebraHom(Ap, C, [[ZERO] * d + [ONE]], f"quot[{A.label}]")
    s = hom_from_images(C, Ap, [la.unit_vec(d + 1, d)], f"unit[{A.label}]")
    acts = None
    if alpha is not None:
        if not alpha.G.is_group:
            raise AlgebraError("unitization split needs a group action")
        ap = GAction(alpha.G, d + 1, [la.block_diag(alpha.at(g), [[ONE]]) for g in range(len(alpha.G))])
        acts = (alpha, ap, trivial_action(alpha.G, 1))
    return SplitExactSeq(iota, f, s, f"U[{A.label}]", acts)


# --- middle space and twisted sum -----------------------------------------------

@dataclass
class MiddleSpace:
    """M box_s A inside M (+) A, basis (iota(j_k), 0) then (s(a_k), a_k)."""
    algebra: Algebra
    inclusion: AlgebraHom  # into M (+) A
    ambient: Algebra
    iota: AlgebraHom  # J -> M
    s: AlgebraHom  # A -> M
    action: GAction | None = None

    @property
    def J(self) -> Algebra:
        return self.iota.source

    @property
    def A(self) -> Algebra:
        return self.s.source

    def ideal_hom(self) -> AlgebraHom:
        """j -> (iota(j), 0)."""
        n = self.algebra.dim
        return hom_from_images(self.J, self.algebra, [la.unit_vec(n, k) for k in range(self.J.dim)],
                               f"j[{self.algebra.label}]")

    def graph_hom(self) -> AlgebraHom:
        """a -> (s(a), a)."""
        n, dj = self.algebra.dim, self.J.dim
        return hom_from_images(self.A, self.algebra, [la.unit_vec(n, dj + k) for k in range(self.A.dim)],
                               f"graph[{self.algebra.label}]")

    def first_projection(self) -> AlgebraHom:
        """(m, a) -> m."""
        dm = self.ambient.dim - self.A.dim
        M = self.iota.target
        pr = AlgebraHom(self.ambient, M, [[ONE if c == r else ZERO for c in range(self.ambient.dim)]
                                          for r in range(dm)], "pr1")
        return self.inclusion.then(pr, f"pr1[{self.algebra.label}]")

    def second_projection(self) -> AlgebraHom:
        """(m, a) -> a."""
        n, dj = self.algebra.dim, self.J.dim
        return AlgebraHom(self.algebra, self.A, [[ONE if c == dj + r else ZERO for c in range(n)]
                                                 for r in range(self.A.dim)],
                          f"pr2[{self.algebra.label}]")


def _ideal_like_witness(M: Algebra, jvecs, svecs):
    """J J, J s(A), s(A) J inside J; None when they are."""
    sub = Subspace(M, jvecs)
    for p, x in enumerate(jvecs):
        for q, y in enumerate(jvecs):
            if not sub.contains(M.mul(x, y)):
                return ("J J", p, q)
        for q, y in enumerate(svecs):
            if not sub.contains(M.mul(x, y)):
                return ("J s(A)", p, q)
            if not sub.contains(M.mul(y, x)):
                return ("s(A) J", q, p)
    return None


def middle_space(iota: AlgebraHom, s: AlgebraHom, label=None, gamma: GAction | None = None,
                 alpha: GAction | None = None) -> MiddleSpace:
    M, J, A = iota.target, iota.source, s.source
    if not s.target.same_as(M):
        raise AlgebraError("split and ideal live in different algebras")
    jvecs = [iota.column(k) for k in range(J.dim)]
    svecs = [s.column(k) for k in range(A.dim)]
    w = _ideal_like_witness(M, jvecs, svecs)
    if w is not None:
        raise AlgebraError(f"J is not an ideal for the split: product {w}")
    amb = direct_sum(M, A, f"({M.label}+{A.label})")
    vecs = [v + [ZERO] * A.dim for v in jvecs] + [v + la.unit_vec(A.dim, k) for k, v in enumerate(svecs)]
    alg, incl = subalgebra(amb, vecs, label or f"{M.label}[]{A.label}")
    action = None
    if gamma is not None and alpha is not None:
        big = GAction(gamma.G, amb.dim, [la.block_diag(gamma.at(g), alpha.at(g))
                                         for g in range(len(gamma.G))])
        action = restrict_action(big, vecs, alg.label)
    return MiddleSpace(alg, incl, amb, iota, s, action)


def oplus_algebra(iota: AlgebraHom, s: AlgebraHom, label=None, delta: GAction | None = None,
                  alpha: GAction | None = None):
    """J (+)_s A with (j1+a1)(j2+a2) = j1 j2 + j1 s(a2) + s(a1) j2 (+) a1 a2.

    Returns (algebra, action or None)."""
    M, J, A = iota.target, iota.source, s.source
    jvecs = [iota.column(k) for k in range(J.dim)]
    svecs = [s.column(k) for k in range(A.dim)]
    w = _ideal_like_witness(M, jvecs, svecs)
    if w is not None:
        raise AlgebraError(f"J is not an ideal for the split: product {w}")
    solver = la.SpanSolver(jvecs, M.dim)
    dj, da = J.dim, A.dim
    consts = {}

    def put(i, j, vec_j, vec_a):
        for k, c in enumerate(vec_j):
            if c:
                consts[(i, j, k)] = consts.get((i, j, k), ZERO) + c
        for k, c in enumerate(vec_a):
            if c:
                consts[(i, j, dj + k)] = consts.get((i, j, dj + k), ZERO) + c

    def pull(v):
        r = solver.solve(v)
        if not r.in_span:
            raise AlgebraError("product left the ideal")
        return r.coords

    for p in range(dj):
        for q in range(dj):
            put(p, q, J.product_of_basis(p, q), [])
        for q in range(da):
            put(p, dj + q, pull(M.mul(jvecs[p], svecs[q])), [])
            put(dj + q, p, pull(M.mul(svecs[q], jvecs[p])), [])
    for p in range(da):
        for q in range(da):
            put(dj + p, dj + q, [], A.product_of_basis(p, q))
    alg = Algebra(label or f"{J.label}(+){A.label}", dj + da, consts)
    action = None
    if delta is not None and alpha is not None:
        action = GAction(delta.G, dj + da, [la.block_diag(delta.at(g), alpha.at(g))
                                            for g in range(len(delta.G))])
    return alg, action


def zeta(iota: AlgebraHom, s: AlgebraHom, ms: MiddleSpace | None = None, oplus: Algebra | None = None):
    """The isomorphism J (+)_s A -> M box_s A, j (+) a -> j + s(a) (+) a, and its inverse."""
    ms = ms or middle_space(iota, s)
    oplus = oplus or oplus_algebra(iota, s)[0]
    n = oplus.dim
    # both carriers use the coordinates (j, a)
    z = AlgebraHom(oplus, ms.algebra, la.identity(n), "zeta")
    zi = AlgebraHom(ms.algebra, oplus, la.identity(n), "zeta^-1")
    for h in (z, zi):
        w = h.multiplicativity_witness()
        if w is not None:
            raise AlgebraError(f"{h.label} not multiplicative at {w}")
    return z, zi


# --- level-one elements ------------------------------------------------------------

def derive_f(iota: AlgebraHom, s_minus: AlgebraHom, label=None) -> AlgebraHom:
    """f(iota(j) + s_-(a)) = a."""
    X, J, A = iota.target, iota.source, s_minus.source
    cols = [iota.column(k) for k in range(J.dim)] + [s_minus.column(k) for k in range(A.dim)]
    if len(cols) != X.dim:
        raise AlgebraError("X is not the direct sum iota(J) + s_-(A): dimensions differ")
    basis_mat = la.from_columns(cols, X.dim)
    try:
        inv = la.inverse(basis_mat)
    except (ValueError, ZeroDivisionError):
        raise AlgebraError("X is not the direct sum iota(J) + s_-(A)") from None
    m = inv[J.dim:] if A.dim else []
    f = AlgebraHom(X, A, m, label or f"f[{X.label}]")
    w = f.multiplicativity_witness()
    if w is not None:
        raise AlgebraError(f"derived quotient map not multiplicative at {w}")
    return f


@dataclass
class FactoredCorner:
    """e^-1 = phi . f^-1 with phi: J -> M_n(B) an injective hom and f: B -> M_n(B) canonical."""
    phi: AlgebraHom
    f: CornerEmbedding


class L1Element:
    """B --e--> J --iota--> X <==s_+,s_-== A together with an M2-space on X.

    The associated morphism goes from A to B."""

    def __init__(self, e: CornerEmbedding | None, iota: AlgebraHom, s_minus: AlgebraHom,
                 s_plus: AlgebraHom, space: M2Space, alpha: GAction, label="z",
                 factored: FactoredCorner | None = None, delta_J: GAction | None = None):
        self.e = e
        self.factored = factored
        self.iota = iota
        self.s_minus = s_minus
        self.s_plus = s_plus
        self.space = space
        self.alpha = alpha
        self.label = label
        self._delta_J = delta_J
        self._f = None
        self._spec = None
        self._cert = None

    @property
    def J(self) -> Algebra:
        return self.iota.source

    @property
    def X(self) -> Algebra:
        return self.iota.target

    @property
    def A(self) -> Algebra:
        return self.s_minus.source

    @property
    def B(self) -> Algebra:
        if self.e is not None:
            return self.e.source
        return self.factored.f.source

    @property
    def G(self):
        return self.alpha.G

    @property
    def delta_J(self) -> GAction:
        if self.e is not None:
            return self.e.delta
        if self._delta_J is None:
            self._delta_J = restrict_action(self.space.gamma_minus,
                                            [self.iota.column(k) for k in range(self.J.dim)], "J")
        return self._delta_J

    @property
    def f(self) -> AlgebraHom:
        if self._f is None:
            self._f = derive_f(self.iota, self.s_minus)
        return self._f

    def ideal_basis(self) -> list:
        return [self.iota.column(k) for k in range(self.J.dim)]

    def speciality(self) -> Speciality:
        if self._spec is None:
            self._spec = classify_speciality(self.space, J=self.ideal_basis())
        return self._spec

    @property
    def very_special(self) -> bool:
        return self.speciality().kind == "very_special"

    def is_zero_element(self) -> bool:
        """s_+ = s_- (the degenerate element, zero in the theory)."""
        return self.s_plus.matrix == self.s_minus.matrix

    def relabel(self, label) -> "L1Element":
        z = L1Element(self.e, self.iota, self.s_minus, self.s_plus, self.space, self.alpha, label,
                      self.factored, self._delta_J)
        z._f, z._spec, z._cert = self._f, self._spec, self._cert
        return z

    def __repr__(self):
        return f"L1Element({self.label}: {self.A.label} -> {self.B.label} via {self.X.label})"


@dataclass
class L1Certificate:
    ok: bool
    failures: list = field(default_factory=list)  # (condition label, witness)
    notes: list = field(default_factory=list)

    def __bool__(self):
        return self.ok

    @property
    def first(self):
        return self.failures[0] if self.failures else None


def validate_l1(z: L1Element) -> L1Certificate:
    """Conditions (a)-(g) of an extended double split-exact sequence."""
    fails = []
    notes = []
    X, J, A = z.X, z.J, z.A
    # (a)
    if z.e is not None:
        w = z.e.check()
        if w is not None:
            fails.append(("a", w))
        elif not z.e.target.same_as(J):
            fails.append(("a", ("corner target is not the ideal", z.e.target.label, J.label)))
    else:
        fc = z.factored
        if fc is None:
            fails.append(("a", ("no corner embedding",)))
        else:
            w = fc.f.check()
            if w is not None:
                fails.append(("a", w))
            if not fc.phi.is_injective() or fc.phi.multiplicativity_witness() is not None:
                fails.append(("a", ("factor hom not an injective hom",)))
            if not (fc.phi.source.same_as(J) and fc.phi.target.same_as(fc.f.target)):
                fails.append(("a", ("factor hom does not connect the ideal to the corner target",)))
            notes.append("corner given in factored form")
    # (b)
    if not z.iota.is_injective():
        fails.append(("b", ("iota not injective", z.iota.kernel()[0])))
    else:
        w = z.iota.multiplicativity_witness()
        if w is not None:
            fails.append(("b", ("iota not multiplicative", w)))
        w = ideal_witness(X, z.ideal_basis())
        if w is not None:
            fails.append(("b", ("iota(J) not an ideal", w)))
    # (c)
    cols = z.ideal_basis() + [z.s_minus.column(k) for k in range(A.dim)]
    if len(cols) != X.dim or len(la.row_basis(cols, X.dim)) != X.dim:
        fails.append(("c", ("X is not the direct sum iota(J) + s_-(A)", len(cols), X.dim)))
    # (d)
    jsub = Subspace(X, z.ideal_basis())
    for name, h in (("s_-", z.s_minus), ("s_+", z.s_plus)):
        if not h.is_injective():
            fails.append(("d", (f"{name} not injective", h.kernel()[0])))
        w = h.multiplicativity_witness()
        if w is not None:
            fails.append(("d", (f"{name} not multiplicative", w)))
    for k in range(A.dim):
        diff = la.vec_sub(z.s_plus.column(k), z.s_minus.column(k))
        if not jsub.contains(diff):
            fails.append(("d", ("s_+(a) - s_-(a) not in iota(J)", k)))
            break
    # (e)
    rep = z.space.check()
    if not rep.ok:
        fails.append(("e", rep.failure))
    if fails:
        return L1Certificate(False, fails, notes)
    G = z.G
    delta = z.space.delta()
    M2 = z.space.m2_algebra()
    d = X.dim
    for name, corner, gam in (("f1", 0, z.space.gamma_minus), ("f2", 3, z.space.gamma_plus)):
        h = hom_from_images(X, M2, [[ZERO] * (corner * d) + X.basis(k) + [ZERO] * ((3 - corner) * d)
                                    for k in range(d)], name)
        w = equivariance_witness(h, gam, delta)
        if w is not None:
            fails.append(("e", (f"{name} not equivariant", w)))
    # (f)
    for name, h, gam in (("s_-", z.s_minus, z.space.gamma_minus), ("s_+", z.s_plus, z.space.gamma_plus)):
        w = equivariance_witness(h, z.alpha, gam)
        if w is not None:
            fails.append(("f", (f"{name} not equivariant", w)))
    w = equivariance_witness(z.iota, z.delta_J, z.space.gamma_minus)
    if w is not None:
        fails.append(("f", ("iota not equivariant", w)))
    if z.e is not None:
        if z.e.alpha.G is not G and len(z.e.alpha.G) != len(G):
            fails.append(("f", ("corner and element use different semigroups",)))
    # (g)
    for g in range(len(G)):
        base = z.space.block(0, 0, g)
        for i in range(2):
            for j in range(2):
                blk = z.space.block(i, j, g)
                for v in jsub.basis:
                    if not jsub.contains(la.mat_vec(blk, v)):
                        fails.append(("g", ("M2(J) not invariant", G.elements[g], i + 1, j + 1)))
                        break
                for k in range(d):
                    diff = la.vec_sub(la.mat_vec(blk, X.basis(k)), la.mat_vec(base, X.basis(k)))
                    if not jsub.contains(diff):
                        fails.append(("g", ("quotient action not of the form id (x) alpha",
                                            G.elements[g], i + 1, j + 1, k)))
                        break
    if not fails:
        # the quotient action must be alpha itself
        f = z.f
        for g in range(len(G)):
            for k in range(d):
                x = X.basis(k)
                if f(z.space.gamma_minus.apply(g, x)) != z.alpha.apply(g, f(x)):
                    fails.append(("g", ("quotient action differs from alpha", G.elements[g], k)))
                    break
    cert = L1Certificate(not fails, fails, notes)
    z._cert = cert
    return cert


def require_valid(z: L1Element) -> L1Element:
    cert = z._cert or validate_l1(z)
    if not cert.ok:
        label, wit = cert.first
        raise AlgebraError(f"{z.label}: condition ({label}) fails: {wit}")
    return z


# --- convenient constructors -----------------------------------------------------

def standard_space(X: Algebra, gamma: GAction | None = None, G=None, S: GAction | None = None,
                   T: GAction | None = None) -> M2Space:
    """M2-space on X acting on itself (or on its unitization) by left multiplication.

    With gamma given, S = T = gamma on that ambient (extended by the identity on the
    adjoined unit); explicit S, T override."""
    from .equivariance import regular_ambient
    n, rep, plus_alg = regular_ambient(X)
    G = G or (gamma.G if gamma is not None else (S.G if S is not None else trivial_group()))
    if gamma is not None:
        if plus_alg is not None and not G.is_group:
            raise AlgebraError("regular ambient through the unitization needs a group")
        maps = [gamma.at(g) if plus_alg is None else la.block_diag(gamma.at(g), [[ONE]])
                for g in range(len(G))]
        base = GAction(G, n, maps, "module")
        S = S or base
        T = T or base
    S = S or trivial_action(G, n, "module")
    T = T or trivial_action(G, n, "module")
    return M2Space(X, n, rep, S, T)


def make_l1(B: Algebra, J: Algebra, X: Algebra, A: Algebra, e_matrix, iota_matrix, sm_matrix,
            sp_matrix, space: M2Space | None = None, alpha: GAction | None = None,
            beta: GAction | None = None, label="z", e: CornerEmbedding | None = None) -> L1Element:
    """Build an element from matrices; an unspecified corner must be an isomorphism."""
    G = space.G if space is not None else (alpha.G if alpha is not None else trivial_group())
    space = space or standard_space(X, G=G)
    alpha = alpha or trivial_action(G, A.dim)
    iota = AlgebraHom(J, X, iota_matrix, "iota")
    sm = AlgebraHom(A, X, sm_matrix, "s_-")
    sp = AlgebraHom(A, X, sp_matrix, "s_+")
    if e is None:
        delta = restrict_action(space.gamma_minus, [iota.column(k) for k in range(J.dim)], "J")
        hom = AlgebraHom(B, J, e_matrix, "e")
        beta = beta or _pull_action(hom, delta)
        e = iso_corner(B, beta, J, hom, delta)
    return L1Element(e, iota, sm, sp, space, alpha, label)


def _pull_action(hom: AlgebraHom, delta: GAction) -> GAction:
    inv = la.inverse(hom.matrix)
    return GAction(delta.G, hom.source.dim,
                   [la.mat_mul(inv, la.mat_mul(delta.at(g), hom.matrix)) for g in range(len(delta.G))])


def zero_element(A: Algebra, alpha: GAction | None = None, label="0") -> L1Element:
    """s_+ = s_- = id with J = 0: the zero morphism A -> 0."""
    G = alpha.G if alpha is not None else trivial_group()
    alpha = alpha or trivial_action(G, A.dim)
    Z = Algebra("0", 0)
    iota = AlgebraHom(Z, A, la.zeros(A.dim, 0), "iota")
    ident = identity_hom(A, "s")
    space = standard_space(A, alpha)
    e = iso_corner(Z, trivial_action(G, 0), Z, identity_hom(Z), trivial_action(G, 0))
    return L1Element(e, iota, ident, ident, space, alpha, label)
