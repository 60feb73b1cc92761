"""Finite unital inverse semigroups, their actions, and M2-spaces."""
from __future__ import annotations

from dataclasses import dataclass, field

from . import linalg as la
from .algebra import (Algebra, AlgebraError, OperatorAlgebra, Subspace, hom_from_images, matrix_algebra,
                      plus, tensor_vec, matrix_unit_vec)
from .scalar import ONE, ZERO, Scalar


class SemigroupG:
    def __init__(self, elements, mult, star, unit):
        self.elements = list(elements)
        self.index = {g: i for i, g in enumerate(self.elements)}
        n = len(self.elements)
        self.mult = [[self._idx(mult[i][j]) for j in range(n)] for i in range(n)]
        self.star_of = [self._idx(s) for s in star]
        self.unit = self._idx(unit)

    def _idx(self, g):
        return g if isinstance(g, int) else self.index[g]

    def __len__(self):
        return len(self.elements)

    def mul(self, g, h) -> int:
        return self.mult[self._idx(g)][self._idx(h)]

    def star(self, g) -> int:
        return self.star_of[self._idx(g)]

    @property
    def idempotents(self) -> list:
        return [g for g in range(len(self)) if self.mult[g][g] == g]

    @property
    def is_group(self) -> bool:
        return self.idempotents == [self.unit]

    def check(self):
        """None when the inverse semigroup laws hold, else a description of the failure."""
        n = len(self)
        for g in range(n):
            for h in range(n):
                for k in range(n):
                    if self.mul(self.mul(g, h), k) != self.mul(g, self.mul(h, k)):
                        return ("associativity", g, h, k)
        for g in range(n):
            if self.mul(self.unit, g) != g or self.mul(g, self.unit) != g:
                return ("unit", g)
            gs = self.star(g)
            if self.mul(self.mul(g, gs), g) != g or self.mul(self.mul(gs, g), gs) != gs:
                return ("inverse", g)
            if self.star(gs) != g:
                return ("involution", g)
        idem = self.idempotents
        for e in idem:
            for f in idem:
                if self.mul(e, f) != self.mul(f, e):
                    return ("idempotents commute", e, f)
        return None

    def __repr__(self):
        return f"SemigroupG({self.elements})"


def trivial_group() -> SemigroupG:
    return SemigroupG(["1"], [["1"]], ["1"], "1")


def cyclic_group(n: int) -> SemigroupG:
    names = [f"g{i}" if i else "1" for i in range(n)]
    mult = [[names[(i + j) % n] for j in range(n)] for i in range(n)]
    star = [names[(-i) % n] for i in range(n)]
    return SemigroupG(names, mult, star, "1")


def semilattice(names=("1", "e")) -> SemigroupG:
    """Chain of idempotents 1 > e > ...; the product of two is the smaller one."""
    names = list(names)
    mult = [[names[max(i, j)] for j in range(len(names))] for i in range(len(names))]
    return SemigroupG(names, mult, names, names[0])


@dataclass
class CAlgebra:
    algebra: Algebra
    chi: "GAction"
    idempotents: list


class GAction:
    """One linear map per semigroup element on a carrier of dimension `dim`."""

    def __init__(self, G: SemigroupG, dim: int, maps, kind: str = "algebra"):
        self.G = G
        self.dim = dim
        if isinstance(maps, dict):
            maps = [maps[g] for g in G.elements]
        self.maps = [[list(r) for r in m] for m in maps]
        if len(self.maps) != len(G):
            raise ValueError("an action needs one map per semigroup element")
        self.kind = kind

    def at(self, g) -> list:
        return self.maps[self.G._idx(g)]

    def apply(self, g, v) -> list:
        if self.dim == 0:
            return []
        return la.mat_vec(self.at(g), v)

    def __repr__(self):
        return f"GAction({self.kind}, dim={self.dim}, |G|={len(self.G)})"


def trivial_action(G: SemigroupG, dim: int, kind="algebra") -> GAction:
    return GAction(G, dim, [la.identity(dim) for _ in range(len(G))], kind)


def build_c_algebra(G: SemigroupG) -> CAlgebra:
    idem = G.idempotents
    pos = {e: i for i, e in enumerate(idem)}
    consts = {}
    for e in idem:
        for f in idem:
            consts[(pos[e], pos[f], pos[G.mul(e, f)])] = 1
    unit = la.unit_vec(len(idem), pos[G.unit])
    alg = Algebra("c" if len(idem) > 1 else "C", len(idem), consts, unit)
    maps = []
    for g in range(len(G)):
        gs = G.star(g)
        cols = [la.unit_vec(len(idem), pos[G.mul(G.mul(g, e), gs)]) for e in idem]
        maps.append(la.from_columns(cols, len(idem)))
    return CAlgebra(alg, GAction(G, len(idem), maps), idem)


@dataclass
class ActionReport:
    ok: bool
    failure: tuple | None = None

    def __bool__(self):
        return self.ok


def check_action(act: GAction, algebra: Algebra | None = None, module=None,
                 base_action: GAction | None = None) -> ActionReport:
    """Semigroup-hom law, plus multiplicativity and compatibility for algebra actions,
    or the module laws for an action on a right module over (A, alpha)."""
    G = act.G
    n = len(G)
    ident = la.identity(act.dim)
    if act.at(G.unit) != ident:
        return ActionReport(False, ("unit acts nontrivially",))
    for g in range(n):
        for h in range(n):
            if act.dim and la.mat_mul(act.at(g), act.at(h)) != act.at(G.mul(g, h)):
                return ActionReport(False, ("semigroup law", G.elements[g], G.elements[h]))
    if algebra is not None:
        if algebra.dim != act.dim:
            raise la.DimensionError("action and algebra dimensions differ")
        basis = algebra.basis_vectors()
        for g in range(n):
            imgs = [act.apply(g, b) for b in basis]
            for i in range(algebra.dim):
                for j in range(algebra.dim):
                    if act.apply(g, algebra.product_of_basis(i, j)) != algebra.mul(imgs[i], imgs[j]):
                        return ActionReport(False, ("multiplicativity", G.elements[g], i, j))
        for e in G.idempotents:
            imgs = [act.apply(e, b) for b in basis]
            for i in range(algebra.dim):
                for j in range(algebra.dim):
                    if algebra.mul(imgs[i], basis[j]) != algebra.mul(basis[i], imgs[j]):
                        return ActionReport(False, ("compatibility", G.elements[e], i, j))
    if module is not None:
        alpha = base_action
        A = module.algebra
        for g in range(n):
            for xi in range(module.dim):
                x = la.unit_vec(module.dim, xi)
                sx = act.apply(g, x)
                for k in range(A.dim):
                    a = A.basis(k)
                    if act.apply(g, module.act(x, a)) != module.act(sx, alpha.apply(g, a)):
                        return ActionReport(False, ("module law", G.elements[g], xi, k))
        for e in G.idempotents:
            for xi in range(module.dim):
                x = la.unit_vec(module.dim, xi)
                for k in range(A.dim):
                    a = A.basis(k)
                    if module.act(act.apply(e, x), a) != module.act(x, alpha.apply(e, a)):
                        return ActionReport(False, ("module compatibility", G.elements[e], xi, k))
    return ActionReport(True)


def equivariance_witness(h, alpha: GAction, beta: GAction):
    """First (g, basis index) where h o alpha_g != beta_g o h, else None."""
    for g in range(len(alpha.G)):
        for i in range(h.source.dim):
            b = h.source.basis(i)
            if h(alpha.apply(g, b)) != beta.apply(g, h(b)):
                return (alpha.G.elements[g], i)
    return None


def restrict_action(act: GAction, basis, label="restriction") -> GAction:
    """Action on span(basis) in its coordinates; raises if the span is not invariant."""
    solver = la.SpanSolver(basis, act.dim)
    maps = []
    for g in range(len(act.G)):
        cols = []
        for v in basis:
            r = solver.solve(act.apply(g, v))
            if not r.in_span:
                raise AlgebraError(f"{label}: subspace not invariant under {act.G.elements[g]}")
            cols.append(r.coords)
        maps.append(la.from_columns(cols, len(basis)))
    return GAction(act.G, len(basis), maps, act.kind)


def direct_sum_action(a: GAction, b: GAction) -> GAction:
    return GAction(a.G, a.dim + b.dim, [la.block_diag(a.at(g), b.at(g)) for g in range(len(a.G))],
                   a.kind)


def tensor_action(a: GAction, b: GAction) -> GAction:
    return GAction(a.G, a.dim * b.dim, [la.kron(a.at(g), b.at(g)) for g in range(len(a.G))], a.kind)


def adjoint_action(s: GAction, t: GAction, basis=None) -> tuple:
    """ad(S,T)_g(X) = T_g X S_{g*} on operators E -> F, restricted to span(basis) when given.

    Returns (operator basis, action in coordinates of that basis)."""
    G = s.G
    de, df = s.dim, t.dim
    if basis is None:
        basis = [[[ONE if (r, c) == (i, j) else ZERO for c in range(de)] for r in range(df)]
                 for i in range(df) for j in range(de)]
    flat = [[x for row in m for x in row] for m in basis]
    solver = la.SpanSolver(flat, de * df)
    maps = []
    for g in range(len(G)):
        sg_star = s.at(G.star(g))
        cols = []
        for m in basis:
            img = la.mat_mul(la.mat_mul(t.at(g), m), sg_star)
            r = solver.solve([x for row in img for x in row])
            if not r.in_span:
                raise AlgebraError(f"hom space not invariant under ad at {G.elements[g]}")
            cols.append(r.coords)
        maps.append(la.from_columns(cols, len(basis)))
    return basis, GAction(G, len(basis), maps, "module")


# --- M2-spaces -----------------------------------------------------------------

class NotCornerInvariant(AlgebraError):
    pass


class M2Space:
    """The action ad(S (+) T) on M_2(X) for X realized by a faithful representation
    rho on an ambient space V, with module actions S, T on V."""

    def __init__(self, X: Algebra, space_dim: int, rep, S: GAction, T: GAction):
        self.X = X
        self.space_dim = space_dim
        self.rep = [[list(r) for r in m] for m in rep]
        if len(self.rep) != X.dim:
            raise la.DimensionError("representation needs one operator per basis vector")
        self.S = S
        self.T = T
        self.G = S.G
        flat = [[x for row in m for x in row] for m in self.rep]
        self._solver = la.SpanSolver(flat, space_dim * space_dim)
        self._blocks = {}

    def operator(self, x) -> list:
        acc = la.zeros(self.space_dim, self.space_dim)
        for c, m in zip(x, self.rep):
            if c:
                acc = la.mat_add(acc, la.mat_scale(c, m))
        return acc

    def pull(self, op):
        """Coordinates in X of an operator lying in rho(X), else None."""
        r = self._solver.solve([x for row in op for x in row])
        return r.coords if r.in_span else None

    def rep_witness(self):
        """None if rho is an injective algebra hom."""
        if not self._solver.independent:
            return ("rho not injective",)
        X = self.X
        for i in range(X.dim):
            for j in range(X.dim):
                lhs = self.operator(X.product_of_basis(i, j))
                if lhs != la.mat_mul(self.rep[i], self.rep[j]):
                    return ("rho not multiplicative", i, j)
        return None

    def _pair(self, i, j, g):
        left = self.S if i == 0 else self.T
        right = self.S if j == 0 else self.T
        return left.at(g), right.at(self.G.star(g))

    def conj(self, i, j, g, op) -> list:
        p, q = self._pair(i, j, g)
        return la.mat_mul(la.mat_mul(p, op), q)

    def block(self, i: int, j: int, g: int) -> list:
        """Matrix on X of delta^{ij}_g (0-based corner indices)."""
        key = (i, j, g)
        if key not in self._blocks:
            cols = []
            for k in range(self.X.dim):
                c = self.pull(self.conj(i, j, g, self.rep[k]))
                if c is None:
                    raise NotCornerInvariant(
                        f"corner ({i + 1},{j + 1}) not invariant under {self.G.elements[g]} "
                        f"(basis vector {k})")
                cols.append(c)
            self._blocks[key] = la.from_columns(cols, self.X.dim)
        return self._blocks[key]

    def corner_action(self, i: int, j: int) -> GAction:
        return GAction(self.G, self.X.dim, [self.block(i, j, g) for g in range(len(self.G))])

    @property
    def gamma_minus(self) -> GAction:
        return self.corner_action(0, 0)

    @property
    def gamma_plus(self) -> GAction:
        return self.corner_action(1, 1)

    def m2_algebra(self) -> Algebra:
        if not hasattr(self, "_m2"):
            self._m2 = matrix_algebra(2, self.X)
        return self._m2

    def delta(self) -> GAction:
        """The action on M_2(X) in the basis e_ij (x) b_k."""
        d = self.X.dim
        maps = []
        for g in range(len(self.G)):
            m = la.zeros(4 * d, 4 * d)
            for i in range(2):
                for j in range(2):
                    blk = self.block(i, j, g)
                    off = (2 * i + j) * d
                    for r in range(d):
                        for c in range(d):
                            m[off + r][off + c] = blk[r][c]
            maps.append(m)
        return GAction(self.G, 4 * d, maps)

    def check(self) -> ActionReport:
        w = self.rep_witness()
        if w is not None:
            return ActionReport(False, w)
        try:
            delta = self.delta()
        except NotCornerInvariant as exc:
            return ActionReport(False, ("not corner-invariant", str(exc)))
        return check_action(delta, self.m2_algebra())


def regular_ambient(X: Algebra):
    """A faithful representation of X: left multiplication on X if that is injective,
    otherwise on the abstract unitization X+."""
    mats = [X.left_matrix(X.basis(i)) for i in range(X.dim)]
    flat = [[x for row in m for x in row] for m in mats]
    if la.SpanSolver(flat, X.dim * X.dim).independent:
        return X.dim, mats, None
    Xp = plus(X)
    mats = [Xp.left_matrix(Xp.basis(i)) for i in range(X.dim)]
    return Xp.dim, mats, Xp


# --- speciality -------------------------------------------------------------------

@dataclass
class Extension:
    """A G-action on M_n of a unitized carrier extending the given action."""
    algebra: Algebra
    action: GAction
    inclusion: object
    report: ActionReport
    notes: list = field(default_factory=list)


@dataclass
class Speciality:
    kind: str  # very_special | special | neither
    factors: tuple | None = None
    extension: Extension | None = None
    witness: dict | None = None

    def __str__(self):
        return self.kind


def factor_tensor_action(n: int, A: Algebra, delta: GAction, corner: int | None = None):
    """Try delta_g = sigma_g (x) alpha_g on M_n (x) A. Returns (sigma, alpha) or None."""
    d = A.dim
    G = delta.G
    corner = n - 1 if corner is None else corner
    pos = corner * n + corner
    sig_maps, alpha_maps = [], []
    for g in range(len(G)):
        acols = []
        for k in range(d):
            img = delta.apply(g, tensor_vec(matrix_unit_vec(n, corner, corner), A.basis(k)))
            # must stay in the chosen corner
            for p in range(n * n):
                if p != pos and any(img[p * d:(p + 1) * d]):
                    return None
            acols.append(img[pos * d:(pos + 1) * d])
        alpha_g = la.from_columns(acols, d)
        alpha_imgs = [la.mat_vec(alpha_g, A.basis(k)) for k in range(d)]
        scols = []
        for p in range(n * n):
            # unknown sigma_g(e_p) in M_n: n*n scalars; equations for every basis a_k
            rows, rhs = [], []
            for k in range(d):
                img = delta.apply(g, tensor_vec(la.unit_vec(n * n, p), A.basis(k)))
                for q in range(n * n):
                    for r in range(d):
                        row = [ZERO] * (n * n)
                        row[q] = alpha_imgs[k][r]
                        rows.append(row)
                        rhs.append(img[q * d + r])
            sol = la.solve_linear(rows, rhs) if rows else la.Solution(True, [ZERO] * (n * n))
            if not sol.consistent:
                return None
            scols.append(sol.particular)
        sig_maps.append(la.from_columns(scols, n * n))
        alpha_maps.append(alpha_g)
    sigma = GAction(G, n * n, sig_maps)
    alpha = GAction(G, d, alpha_maps)
    return sigma, alpha


def unital_extension(n: int, A: Algebra, delta: GAction) -> Extension:
    """For unital A, extend delta to M_n(A+) through M_n(A+) = M_n(A) (+) M_n(C),
    acting trivially on the second summand."""
    one = A.unit
    Ap = plus(A)
    big = matrix_algebra(n, Ap)
    d, dp = A.dim, Ap.dim
    G = delta.G
    maps = []
    for g in range(len(G)):
        cols = []
        for p in range(n * n):
            for k in range(dp):
                out = [ZERO] * (n * n * dp)
                if k < d:
                    src = tensor_vec(la.unit_vec(n * n, p), A.basis(k))
                    img = delta.apply(g, src)
                else:
                    src = tensor_vec(la.unit_vec(n * n, p), one)
                    img = la.vec_sub(delta.apply(g, src), src)
                    out[p * dp + d] = ONE
                for q in range(n * n):
                    for r in range(d):
                        if img[q * d + r]:
                            out[q * dp + r] = out[q * dp + r] + img[q * d + r]
                cols.append(out)
        maps.append(la.from_columns(cols, n * n * dp))
    act = GAction(G, n * n * dp, maps)
    incl_cols = []
    for p in range(n * n):
        for k in range(d):
            v = [ZERO] * (n * n * dp)
            v[p * dp + k] = ONE
            incl_cols.append(v)
    small = matrix_algebra(n, A)
    incl = hom_from_images(small, big, incl_cols, "incl")
    return Extension(big, act, incl, check_action(act, big), ["unital carrier: trivial on M_n(C)"])


def classify_matrix_action(n: int, A: Algebra, delta: GAction) -> Speciality:
    f = factor_tensor_action(n, A, delta)
    if f is not None:
        return Speciality("very_special", f)
    if A.is_unital:
        ext = unital_extension(n, A, delta)
        if ext.report.ok:
            return Speciality("special", extension=ext)
    return Speciality("neither", witness={"reason": "no factorization and no unit; "
                                          "speciality needs an ambient module action"})


def classify_speciality(space: M2Space, J=None, Z=None) -> Speciality:
    """Very special / special / neither for an M2-space, deciding speciality with the
    block criterion: J and Z invariant under the upper-left corner action, and
    delta21_g(1) - delta11_g(1), delta12_g(1) - delta11_g(1) in J, where 1 is the
    identity of the ambient operator algebra."""
    X = space.X
    G = space.G
    nG = len(G)
    for g in range(nG):
        for i in range(2):
            for j in range(2):
                space.block(i, j, g)  # raises NotCornerInvariant
    # very special: delta = sigma (x) alpha with sigma diagonal on M_2
    scal = []
    very = True
    for g in range(nG):
        d11 = space.block(0, 0, g)
        if space.block(1, 1, g) != d11:
            very = False
            break
        c = _scalar_ratio(space.block(0, 1, g), d11)
        c2 = _scalar_ratio(space.block(1, 0, g), d11)
        if c is None or c2 is None or (c * c2 != ONE and not la.is_zero_mat(d11)):
            very = False
            break
        scal.append((c, c2))
    if very:
        sig = []
        for c, c2 in scal:
            m = la.identity(4)
            m[1][1], m[2][2] = c, c2
            sig.append(m)
        return Speciality("very_special", (GAction(G, 4, sig), space.gamma_minus))

    Jb = [list(v) for v in (J if J is not None else [])]
    Zb = [list(v) for v in (Z if Z is not None else X.basis_vectors())]
    Jsub = Subspace(X, Jb)
    Zsub = Subspace(X, Zb)
    n = space.space_dim
    ident = la.identity(n)
    for g in range(nG):
        d11 = space.block(0, 0, g)
        for v in Jsub.basis:
            if not Jsub.contains(la.mat_vec(d11, v)):
                return Speciality("neither", witness={"g": G.elements[g], "condition": "J invariance",
                                                      "element": la.mat_vec(d11, v)})
        for v in Zsub.basis:
            if not Zsub.contains(la.mat_vec(d11, v)):
                return Speciality("neither", witness={"g": G.elements[g], "condition": "Z invariance",
                                                      "element": la.mat_vec(d11, v)})
        one11 = space.conj(0, 0, g, ident)
        for (i, j), name in (((1, 0), "delta21(1)-delta11(1)"), ((0, 1), "delta12(1)-delta11(1)")):
            diff = la.mat_sub(space.conj(i, j, g, ident), one11)
            coords = space.pull(diff)
            if coords is None or not Jsub.contains(coords):
                return Speciality("neither", witness={"g": G.elements[g], "condition": name,
                                                      "operator": diff,
                                                      "element": coords})
    ext = lemma_extension(space, Jsub, Zsub)
    return Speciality("special", extension=ext)


def _scalar_ratio(m, base):
    """c with m = c*base, or None."""
    c = None
    for rm, rb in zip(m, base):
        for x, y in zip(rm, rb):
            if y:
                r = x / y
                if c is None:
                    c = r
                elif c != r:
                    return None
            elif x:
                return None
    return ONE if c is None else c


def lemma_extension(space: M2Space, Jsub: Subspace, Zsub: Subspace) -> Extension:
    """Restriction of ad(S (+) T) to M_2(Z+) where Z+ = rho(Z) + C*id, with checks for
    corner invariance, the action laws, invariance of M_2(J) and the quotient format."""
    n = space.space_dim
    zmats = [space.operator(v) for v in Zsub.basis]
    zp = OperatorAlgebra("Z+", n, zmats + [la.identity(n)])
    Zp = zp.algebra
    G = space.G
    d = Zp.dim
    blocks = {}
    for g in range(len(G)):
        for i in range(2):
            for j in range(2):
                cols = []
                for k in range(d):
                    c = zp.coords(space.conj(i, j, g, zp.mats[k]))
                    if c is None:
                        raise AlgebraError("extension corner not invariant; criterion inconsistent")
                    cols.append(c)
                blocks[(i, j, g)] = la.from_columns(cols, d)
    maps = []
    for g in range(len(G)):
        m = la.zeros(4 * d, 4 * d)
        for i in range(2):
            for j in range(2):
                off = (2 * i + j) * d
                blk = blocks[(i, j, g)]
                for r in range(d):
                    for c in range(d):
                        m[off + r][off + c] = blk[r][c]
        maps.append(m)
    big = matrix_algebra(2, Zp)
    act = GAction(G, 4 * d, maps)
    rep = check_action(act, big)
    notes = []
    # J inside Z+ coordinates
    jz = [zp.coords(space.operator(v)) for v in Jsub.basis]
    jsub = Subspace(Zp, jz)
    for g in range(len(G)):
        for i in range(2):
            for j in range(2):
                blk = blocks[(i, j, g)]
                for v in jsub.basis:
                    if not jsub.contains(la.mat_vec(blk, v)):
                        rep = ActionReport(False, ("M2(J) not invariant", G.elements[g], i, j))
                for k in range(d):
                    diff = la.vec_sub(la.mat_vec(blk, la.unit_vec(d, k)),
                                      la.mat_vec(blocks[(0, 0, g)], la.unit_vec(d, k)))
                    if not jsub.contains(diff):
                        rep = ActionReport(False, ("quotient not of the form id(x)alpha",
                                                   G.elements[g], i, j, k))
    notes.append(f"Z+ has dimension {d}")
    zop = OperatorAlgebra("Z", n, zmats)
    small = matrix_algebra(2, zop.algebra)
    zimgs = [zp.coords(m) for m in zop.mats]
    incl_cols = [tensor_vec(la.unit_vec(4, p), zimgs[k]) for p in range(4) for k in range(len(zimgs))]
    incl = hom_from_images(small, big, incl_cols, "incl[M2(Z)]")
    return Extension(big, act, incl, rep, notes)
