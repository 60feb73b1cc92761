"""Functional modules, their compact and adjointable operators, corner embeddings."""
from __future__ import annotations

import threading
from dataclasses import dataclass, field

from . import linalg as la
from .algebra import (Algebra, AlgebraError, AlgebraHom, OperatorAlgebra, hom_from_images,
                      matrix_algebra, matrix_unit_vec, plus, tensor_vec)
from .equivariance import (GAction, Speciality, check_action, classify_matrix_action,
                           factor_tensor_action, trivial_action)
from .scalar import ONE, ZERO


class FunctionalModule:
    """Right A-module E (a vector space of dimension dim) with right action matrices
    R_k (xi . a_k = R_k xi), module action S and a spanning set of functionals E -> A."""

    def __init__(self, A: Algebra, alpha: GAction, dim: int, right, S: GAction, theta, label="E"):
        self.algebra = A
        self.alpha = alpha
        self.dim = dim
        self.right = [[list(r) for r in m] for m in right]
        self.S = S
        self.theta = [[list(r) for r in m] for m in theta]
        self.label = label
        self.free_rank = None

    def act(self, x, a) -> list:
        acc = [ZERO] * self.dim
        for c, m in zip(a, self.right):
            if c:
                acc = la.vec_add(acc, la.vec_scale(c, la.mat_vec(m, x)))
        return acc

    def right_op(self, a) -> list:
        acc = la.zeros(self.dim, self.dim)
        for c, m in zip(a, self.right):
            if c:
                acc = la.mat_add(acc, la.mat_scale(c, m))
        return acc

    def functional_span(self):
        flat = [[x for row in f for x in row] for f in self.theta]
        return la.SpanSolver(la.row_basis([f for f in flat if any(f)], self.algebra.dim * self.dim)
                             if flat else [], self.algebra.dim * self.dim)

    def check(self):
        """None if all module invariants hold, else a witness tuple."""
        A, n = self.algebra, self.dim
        for i in range(A.dim):
            for j in range(A.dim):
                lhs = la.mat_mul(self.right[j], self.right[i]) if n else []
                rhs = self.right_op(A.product_of_basis(i, j))
                if n and lhs != rhs:
                    return ("right module law", i, j)
        for p, f in enumerate(self.theta):
            for xi in range(n):
                x = la.unit_vec(n, xi)
                fx = la.mat_vec(f, x)
                for k in range(A.dim):
                    if la.mat_vec(f, self.act(x, A.basis(k))) != A.mul(fx, A.basis(k)):
                        return ("functional not A-linear", p, xi, k)
        span = self.functional_span()
        for p, f in enumerate(self.theta):
            for k in range(A.dim):
                af = la.mat_mul(A.left_matrix(A.basis(k)), f) if n else f
                if not span.contains([x for row in af for x in row]):
                    return ("functionals not closed under left multiplication", p, k)
            for g in range(len(self.S.G)):
                gs = self.S.G.star(g)
                img = la.mat_mul(la.mat_mul(self.alpha.at(g), f), self.S.at(gs)) if n else f
                if not span.contains([x for row in img for x in row]):
                    return ("functionals not G-invariant", p, self.S.G.elements[g])
            for e in self.S.G.idempotents:
                for xi in range(n):
                    x = la.unit_vec(n, xi)
                    if la.mat_vec(f, self.S.apply(e, x)) != self.alpha.apply(e, la.mat_vec(f, x)):
                        return ("functional not E-equivariant", p, xi)
        rep = check_action(self.S, module=self, base_action=self.alpha)
        if not rep.ok:
            return rep.failure
        return None


def free_module(A: Algebra, alpha: GAction, k: int, S: GAction | None = None, label=None) -> FunctionalModule:
    """A^k with coordinatewise right multiplication and functionals xi -> b . xi_i."""
    d = A.dim
    right = [la.block_diag(*([A.right_matrix(A.basis(c))] * k)) for c in range(d)] if k else \
        [[] for _ in range(d)]
    theta = []
    for i in range(k):
        for c in range(d):
            f = la.zeros(d, k * d)
            lm = A.left_matrix(A.basis(c))
            for r in range(d):
                for s in range(d):
                    f[r][i * d + s] = lm[r][s]
            theta.append(f)
    if S is None:
        S = GAction(alpha.G, k * d, [la.block_diag(*([alpha.at(g)] * k)) if k else []
                                     for g in range(len(alpha.G))], "module")
    m = FunctionalModule(A, alpha, k * d, right, S, theta, label or f"{A.label}^{k}")
    m.free_rank = k
    return m


def zero_module(A: Algebra, alpha: GAction) -> FunctionalModule:
    return free_module(A, alpha, 0, label="0")


def module_sum_with_algebra(m: FunctionalModule) -> FunctionalModule:
    """E (+) A with action S (+) alpha and functionals theta (+) A."""
    A, d, n = m.algebra, m.algebra.dim, m.dim
    right = [la.block_diag(m.right[c], A.right_matrix(A.basis(c))) if n else A.right_matrix(A.basis(c))
             for c in range(d)]
    theta = []
    for f in m.theta:
        theta.append([list(row) + [ZERO] * d for row in f])
    for c in range(d):
        lm = A.left_matrix(A.basis(c))
        theta.append([[ZERO] * n + list(row) for row in lm])
    S = GAction(m.S.G, n + d, [la.block_diag(m.S.at(g), m.alpha.at(g)) if n else m.alpha.at(g)
                               for g in range(len(m.S.G))], "module")
    out = FunctionalModule(A, m.alpha, n + d, right, S, theta, f"{m.label}+{A.label}")
    if m.free_rank is not None:
        out.free_rank = m.free_rank + 1
    return out


class ModuleOperators(OperatorAlgebra):
    def __init__(self, label, module: FunctionalModule, mats, kind):
        super().__init__(label, module.dim, mats, kind)
        self.module = module
        self.gaction = self._ad_action()

    def _ad_action(self) -> GAction:
        S = self.module.S
        G = S.G
        maps = []
        for g in range(len(G)):
            cols = []
            for m in self.mats:
                img = la.mat_mul(la.mat_mul(S.at(g), m), S.at(G.star(g)))
                c = self.coords(img)
                if c is None:
                    raise AlgebraError(f"{self.algebra.label}: not invariant under {G.elements[g]}")
                cols.append(c)
            maps.append(la.from_columns(cols, self.dim) if self.dim else [])
        return GAction(G, self.dim, maps)


_cache_lock = threading.Lock()
_cache: dict = {}


def _cached(key, build):
    with _cache_lock:
        if key in _cache:
            return _cache[key]
    value = build()
    with _cache_lock:
        return _cache.setdefault(key, value)


def compute_compacts(m: FunctionalModule, label=None) -> ModuleOperators:
    """span of the elementary operators xi . phi."""
    def build():
        mats = []
        for xi in range(m.dim):
            x = la.unit_vec(m.dim, xi)
            for f in m.theta:
                cols = [m.act(x, [row[j] for row in f]) for j in range(m.dim)]
                mats.append(la.from_columns(cols, m.dim))
        return ModuleOperators(label or f"K({m.label})", m, mats, "compacts")
    return _cached(("K", id(m), label), build)


def compute_adjointables(m: FunctionalModule, label=None) -> ModuleOperators:
    """Operators T that are A-linear, commute with S_e, and satisfy phi o T in span(theta)."""
    def build():
        n, d = m.dim, m.algebra.dim
        if n == 0:
            return ModuleOperators(label or f"L({m.label})", m, [], "adjointables")
        span_basis = la.row_basis([[x for row in f for x in row] for f in m.theta], d * n) if m.theta else []
        nt = n * n
        nc = len(span_basis)
        rows = []

        def t_index(r, c):
            return r * n + c

        # A-linearity: T R_k - R_k T = 0
        for k in range(d):
            R = m.right[k]
            for r in range(n):
                for c in range(n):
                    row = [ZERO] * (nt + nc * n)
                    for s in range(n):
                        if R[s][c]:
                            row[t_index(r, s)] = row[t_index(r, s)] + R[s][c]
                        if R[r][s]:
                            row[t_index(s, c)] = row[t_index(s, c)] - R[r][s]
                    rows.append(row)
        for e in m.S.G.idempotents:
            Se = m.S.at(e)
            for r in range(n):
                for c in range(n):
                    row = [ZERO] * (nt + nc * n)
                    for s in range(n):
                        if Se[s][c]:
                            row[t_index(r, s)] = row[t_index(r, s)] + Se[s][c]
                        if Se[r][s]:
                            row[t_index(s, c)] = row[t_index(s, c)] - Se[r][s]
                    rows.append(row)
        # phi_p o T = sum_q c_{pq} basis_q for every functional basis element p
        for p, fflat in enumerate(span_basis):
            f = [fflat[i * n:(i + 1) * n] for i in range(d)]
            for a in range(d):
                for c in range(n):
                    row = [ZERO] * (nt + nc * n)
                    for s in range(n):
                        if f[a][s]:
                            row[t_index(s, c)] = f[a][s]
                    for q in range(nc):
                        coef = span_basis[q][a * n + c]
                        if coef:
                            row[nt + p * nc + q] = -coef
                    rows.append(row)
        sols = la.kernel(rows, nt + nc * n) if rows else la.identity(nt + nc * n)
        tparts = la.row_basis([s[:nt] for s in sols if any(s[:nt])], nt)
        mats = [[t[r * n:(r + 1) * n] for r in range(n)] for t in tparts]
        return ModuleOperators(label or f"L({m.label})", m, mats, "adjointables")
    return _cached(("L", id(m), label), build)


@dataclass
class CornerEmbedding:
    """An injective equivariant hom e: (A, alpha) -> (J, delta) of corner type."""
    hom: AlgebraHom
    alpha: GAction
    delta: GAction
    kind: str  # canonical_matrix | generalized
    n: int | None = None
    module: FunctionalModule | None = None
    sigma: GAction | None = None
    W: list | None = None
    factorization: tuple | None = None  # (phi: J -> M_n(A), f: canonical corner) with e^-1 = phi . f^-1
    operators: OperatorAlgebra | None = None
    notes: list = field(default_factory=list)
    parts: tuple = ()
    pos: int | None = None  # diagonal position of a canonical corner, default n - 1
    _spec: Speciality | None = None

    @property
    def corner_pos(self) -> int:
        return self.n - 1 if self.pos is None else self.pos

    @property
    def source(self) -> Algebra:
        return self.hom.source

    @property
    def target(self) -> Algebra:
        return self.hom.target

    @property
    def label(self) -> str:
        return self.hom.label

    def speciality(self) -> Speciality:
        if self._spec is None:
            if self.kind == "composite":
                kind = self.klass if self.klass == "very_special" else "neither"
                self._spec = Speciality(kind, witness={"reason": "composite corner"})
            elif self.kind == "canonical_matrix":
                if self.sigma is not None:
                    self._spec = Speciality("very_special", (self.sigma, self.alpha))
                else:
                    sp = classify_matrix_action(self.n, self.source, self.delta)
                    if sp.kind == "neither" and self.W is not None:
                        sp = Speciality("special", witness={"reason": "module action over the unitization"})
                    self._spec = sp
            else:
                self._spec = Speciality("neither", witness={"reason": "generalized corner"})
        return self._spec

    @property
    def klass(self) -> str:
        """generalized | canonical_matrix | special | very_special."""
        if self.kind == "composite":
            ks = {p.klass for p in self.parts}
            return "very_special" if ks == {"very_special"} else "generalized"
        if self.kind != "canonical_matrix":
            return "generalized"
        return {"very_special": "very_special", "special": "special"}.get(self.speciality().kind,
                                                                         "canonical_matrix")

    def check(self):
        """None if the corner is an injective equivariant hom; else witness."""
        from .equivariance import equivariance_witness
        w = self.hom.multiplicativity_witness()
        if w is not None:
            return ("corner not multiplicative", w)
        if not self.hom.is_injective():
            return ("corner not injective", self.hom.kernel()[0])
        w = equivariance_witness(self.hom, self.alpha, self.delta)
        if w is not None:
            return ("corner not equivariant", w)
        rep = check_action(self.delta, self.target)
        if not rep.ok:
            return ("target action invalid",) + tuple(rep.failure)
        return None


def compose_corners(first: CornerEmbedding, second: CornerEmbedding) -> CornerEmbedding:
    """second o first as one corner (its inverse is second^-1 . first^-1 read left to right)."""
    if not first.target.same_as(second.source):
        raise AlgebraError("corners do not compose")
    hom = first.hom.then(second.hom, f"{second.label}o{first.label}")
    if first.source.same_as(first.target) and first.hom.matrix == la.identity(first.source.dim):
        return second
    return CornerEmbedding(hom, first.alpha, second.delta, "composite", parts=(first, second))


def corner_embedding(A: Algebra, alpha: GAction, m: FunctionalModule) -> CornerEmbedding:
    """e(a)(xi (+) b) = 0 (+) ab into the compacts of E (+) A."""
    F = module_sum_with_algebra(m)
    K = compute_compacts(F, f"K({m.label}+{A.label})")
    n, d = m.dim, A.dim
    images = []
    for k in range(d):
        lm = A.left_matrix(A.basis(k))
        op = la.block_diag(la.zeros(n, n), lm) if n else lm
        c = K.coords(op)
        if c is None:
            raise AlgebraError("corner image is not a compact operator")
        images.append(c)
    hom = hom_from_images(A, K.algebra, images, f"e[{A.label};{m.label}]")
    ker = hom.kernel()
    if ker:
        raise AlgebraError(f"corner embedding not injective; kernel vector {ker[0]}")
    ce = CornerEmbedding(hom, alpha, K.gaction, "generalized", module=m, operators=K)
    if m.dim == 0:
        ce.kind = "canonical_matrix"
        ce.n = 1
    elif m.free_rank is not None:
        # identify K(A^k (+) A) with M_{k+1}(A) and classify there
        nn = m.free_rank + 1
        ce.kind = "canonical_matrix"
        ce.n = nn
        ce.notes.append("compacts of a free module identified with matrices")
        canon = canonical_matrix_corner(A, alpha, nn)
        delta = _pull_ad_to_matrices(A, nn, F)
        ce.hom = canon.hom
        ce.delta = delta
        ce.operators = None
        ce.module = m
        f = factor_tensor_action(nn, A, delta)
        if f is not None:
            ce.sigma = f[0]
    return ce


def _matrix_unit_operator(A: Algebra, n: int, i: int, j: int, a) -> list:
    """Operator on A^n (column vectors, index block*d + r): xi_i += a * xi_j."""
    d = A.dim
    op = la.zeros(n * d, n * d)
    lm = A.left_matrix(a)
    for r in range(d):
        for s in range(d):
            op[i * d + r][j * d + s] = lm[r][s]
    return op


def _pull_ad_to_matrices(A: Algebra, n: int, F: FunctionalModule) -> GAction:
    d = A.dim
    ops = []
    for i in range(n):
        for j in range(n):
            for k in range(d):
                ops.append(_matrix_unit_operator(A, n, i, j, A.basis(k)))
    flat = [[x for row in m for x in row] for m in ops]
    solver = la.SpanSolver(flat, (n * d) ** 2)
    if not solver.independent:
        raise AlgebraError("left multiplication on the free module is not faithful")
    G = F.S.G
    maps = []
    for g in range(len(G)):
        cols = []
        for op in ops:
            img = la.mat_mul(la.mat_mul(F.S.at(g), op), F.S.at(G.star(g)))
            r = solver.solve([x for row in img for x in row])
            if not r.in_span:
                raise AlgebraError("matrix algebra not invariant under the module action")
            cols.append(r.coords)
        maps.append(la.from_columns(cols, n * n * d))
    return GAction(G, n * n * d, maps)


def canonical_matrix_corner(A: Algebra, alpha: GAction, n: int, sigma: GAction | None = None,
                            W=None, target: Algebra | None = None, label=None,
                            pos: int | None = None) -> CornerEmbedding:
    """a -> e_nn (x) a in M_n(A), with action sigma (x) alpha (very special) or
    m -> W_g alpha_g(m) W_{g*} for W_g in M_n(A+) (groups only)."""
    d = A.dim
    J = target or matrix_algebra(n, A)
    p = n - 1 if pos is None else pos
    images = [tensor_vec(matrix_unit_vec(n, p, p), A.basis(k)) for k in range(d)]
    hom = hom_from_images(A, J, images, label or (f"e{n}[{A.label}]" if p == n - 1 else f"e{n},{p}[{A.label}]"))
    G = alpha.G
    if W is None:
        if sigma is None:
            sigma = trivial_action(G, n * n)
        maps = [la.kron(sigma.at(g), alpha.at(g)) for g in range(len(G))]
        delta = GAction(G, n * n * d, maps)
        return CornerEmbedding(hom, alpha, delta, "canonical_matrix", n=n, sigma=sigma, pos=p)
    if not G.is_group:
        raise AlgebraError("corner module actions over the unitization need a group")
    delta = _delta_from_W(A, alpha, n, W)
    ce = CornerEmbedding(hom, alpha, delta, "canonical_matrix", n=n, W=W, pos=p)
    f = factor_tensor_action(n, A, delta, corner=p)
    if f is not None:
        ce.sigma = f[0]
    return ce


def _delta_from_W(A: Algebra, alpha: GAction, n: int, W) -> GAction:
    """delta_g(m)_{il} = sum_{jk} w^g_{ij} alpha_g(m_jk) alpha_g(w^{g*}_{kl}) with w in A+."""
    d = A.dim
    Ap = plus(A)
    G = alpha.G
    maps = []
    for g in range(len(G)):
        gs = G.star(g)
        ag = alpha.at(g)
        agp = la.block_diag(ag, [[ONE]])
        wg = [[la.vec(x) for x in row] for row in W[g]]
        wgs = [[la.mat_vec(agp, la.vec(x)) for x in row] for row in W[gs]]
        cols = []
        for j in range(n):
            for k in range(n):
                for b in range(d):
                    a_img = la.mat_vec(ag, A.basis(b)) + [ZERO]
                    out = [ZERO] * (n * n * d)
                    for i in range(n):
                        left = Ap.mul(wg[i][j], a_img)
                        if not any(left):
                            continue
                        for l in range(n):
                            val = Ap.mul(left, wgs[k][l])
                            if val[d]:
                                raise AlgebraError("W-action leaves the matrix algebra")
                            for r in range(d):
                                if val[r]:
                                    idx = (i * n + l) * d + r
                                    out[idx] = out[idx] + val[r]
                    cols.append(out)
        maps.append(la.from_columns(cols, n * n * d))
    return GAction(G, n * n * d, maps)


def iso_corner(A: Algebra, alpha: GAction, J: Algebra, hom: AlgebraHom, delta: GAction) -> CornerEmbedding:
    """A corner embedding that is an isomorphism (module E = 0)."""
    if not (hom.is_injective() and hom.is_surjective()):
        raise AlgebraError("iso corner must be bijective")
    return CornerEmbedding(hom, alpha, delta, "canonical_matrix", n=1,
                           sigma=trivial_action(alpha.G, 1))


def unitize_operators(label: str, module_dim: int, A: Algebra, mats, S: GAction | None = None,
                      alpha: GAction | None = None):
    """X+ inside operators on E (+) A: X (+) 0 together with the identity, closed under
    the action S (+) alpha when given."""
    from .algebra import unitization
    d = A.dim
    big = [la.block_diag(m, la.zeros(d, d)) for m in mats]
    conj = []
    if S is not None:
        G = S.G
        for g in range(len(G)):
            p = la.block_diag(S.at(g), alpha.at(g))
            q = la.block_diag(S.at(G.star(g)), alpha.at(G.star(g)))
            conj.append((p, q))
    return unitization(label, module_dim + d, big, conj)
