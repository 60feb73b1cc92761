"""Product of a level-one K-homology element t in L1(B, d) with a level-one K-theory
element s in L1(d, A), built line by line with a certificate per line."""
from __future__ import annotations

from dataclasses import dataclass, field

from . import linalg as la
from .algebra import (Algebra, AlgebraError, AlgebraHom, OperatorAlgebra, corner_hom, hom_from_images,
                      identity_hom, matrix_algebra, matrix_units, operator_span_closure)
from .equivariance import GAction, M2Space, build_c_algebra, regular_ambient
from .fusion import (ApproxUnit, CertificateChain, FusionRefused, _certified, _is_canonical,
                     extend_to_adjointables, fuse_hom_left, fuse_inv_corner_left)
from .modules import CornerEmbedding, canonical_matrix_corner, compose_corners
from .scalar import ONE, format_scalar
from .sequences import L1Element, middle_space, oplus_algebra, require_valid, zeta
from .words import check_diagram


@dataclass
class PipelineTrace:
    """Everything the eight lines produce, keyed by line."""
    lines: dict = field(default_factory=dict)  # name -> L1Element
    certificates: dict = field(default_factory=dict)  # name -> certificate
    maps: dict = field(default_factory=dict)  # name -> matrices / operator lists
    derivation: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    closed_form: list = field(default_factory=list)  # (basis index, sign, ok)
    stabilization_index: int = 0
    very_special_s: bool = False

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.certificates.values()) and all(r[2] for r in self.closed_form)

    def to_json(self) -> dict:
        return {
            "lines": {k: {"label": z.label, "A": z.A.label, "B": z.B.label, "X": z.X.label,
                          "dim_X": z.X.dim, "ambient": z.space.space_dim}
                      for k, z in self.lines.items()},
            "certificates": {k: c.to_json() for k, c in self.certificates.items()},
            "derivation": list(self.derivation),
            "notes": list(self.notes),
            "closed_form": [{"basis": b, "sign": sg, "ok": ok} for b, sg, ok in self.closed_form],
            "stabilization_index": self.stabilization_index,
            "s_very_special": self.very_special_s,
            "ok": self.ok,
        }


def _lin(ops, v, n):
    acc = la.zeros(n, n)
    for c, m in zip(v, ops):
        if c:
            acc = la.mat_add(acc, la.mat_scale(c, m))
    return acc


def _flat(m):
    return [x for row in m for x in row]


def _corner_factorization(t: L1Element):
    """(phi_factor: k -> M_n(d), very special canonical corner f: d -> M_n(d))."""
    if t.e is None:
        fc = t.factored
        phi, f = fc.phi, fc.f
    else:
        E = t.e
        if E.kind == "canonical_matrix" and _is_canonical(E, E.source):
            phi, f = identity_hom(E.target), E
        elif E.hom.is_surjective():
            d = E.source
            f = canonical_matrix_corner(d, E.alpha, 1)
            phi = AlgebraHom(t.J, f.target, la.inverse(E.hom.matrix), "e^-1")
        else:
            raise FusionRefused("the corner of t must be canonical, an isomorphism, or given in factored form")
    if f.sigma is None or f.klass != "very_special":
        raise FusionRefused("the corner of t must be very special")
    return phi, f


def default_phi_data(s: L1Element):
    """c . id on the ambient for a one-dimensional d; for the algebra spanned by the
    idempotents of G, each idempotent goes to its module operator S_e."""
    d = s.A
    G = s.G
    V = s.space.space_dim
    if d.dim == 1 and d.unit is not None:
        return [la.mat_scale(d.unit[0].inverse(), la.identity(V))]
    cg = build_c_algebra(G)
    if d.same_as(cg.algebra):
        return [s.space.S.at(e) for e in cg.idempotents]
    raise AlgebraError("no default hom d -> multipliers of X for this d; pass phi_data")


def check_phi_data(s: L1Element, phi_ops) -> list:
    """Hypotheses on phi: d -> L_X(X), returned as (name, ok, witness)."""
    d, V = s.A, s.space.space_dim
    rho = s.space
    out = []
    bad = next(((i, j) for i in range(d.dim) for j in range(d.dim)
                if _lin(phi_ops, d.product_of_basis(i, j), V) != la.mat_mul(phi_ops[i], phi_ops[j])), None)
    out.append(("phi multiplicative", bad is None, bad))
    xs = [rho.operator(s.X.basis(k)) for k in range(s.X.dim)]
    solver = la.SpanSolver([_flat(m) for m in xs], V * V)
    bad = None
    for i, p in enumerate(phi_ops):
        for k, x in enumerate(xs):
            if not solver.contains(_flat(la.mat_mul(p, x))) or not solver.contains(_flat(la.mat_mul(x, p))):
                bad = (i, k)
                break
        if bad:
            break
    out.append(("phi lands in the multipliers of X", bad is None, bad))
    G = s.G
    for name, act in (("S", s.space.S), ("T", s.space.T)):
        bad = None
        for g in range(len(G)):
            gs = G.star(g)
            for i in range(d.dim):
                lhs = _lin(phi_ops, s.alpha.apply(g, d.basis(i)), V)
                rhs = la.mat_mul(la.mat_mul(act.at(g), phi_ops[i]), act.at(gs))
                if lhs != rhs:
                    bad = (G.elements[g], i)
                    break
            if bad:
                break
        out.append((f"phi equivariant for ad({name})", bad is None, bad))
    for name, h in (("s_-", s.s_minus), ("s_+", s.s_plus)):
        bad = None
        for i in range(d.dim):
            for j in range(d.dim):
                prod = rho.operator(h(d.product_of_basis(i, j)))
                if (prod != la.mat_mul(rho.operator(h.column(i)), phi_ops[j])
                        or prod != la.mat_mul(phi_ops[i], rho.operator(h.column(j)))):
                    bad = (i, j)
                    break
            if bad:
                break
        out.append((f"{name} is a d-bimodule map", bad is None, bad))
    return out


def _flip_perm(n_alg: int) -> list:
    """Permutation matrix of x -> F x F on M_2 (x) Y, F the 2x2 flip, Y of dimension n_alg."""
    size = 4 * n_alg
    m = la.zeros(size, size)
    for i in range(2):
        for j in range(2):
            for k in range(n_alg):
                m[((1 - i) * 2 + (1 - j)) * n_alg + k][(i * 2 + j) * n_alg + k] = ONE
    return m


def product_khom_ktheory(t: L1Element, s: L1Element, phi_data=None, unit: ApproxUnit | None = None):
    """Returns (x, trace) with t . s = x in L1(B, A)."""
    tr = PipelineTrace()
    require_valid(t)
    require_valid(s)
    if not t.B.same_as(s.A):
        raise AlgebraError(f"t ends at {t.B.label} but s starts at {s.A.label}")
    d = s.A
    for name, z in (("s", s), ("t", t)):
        kind = z.speciality().kind
        if kind not in ("special", "very_special"):
            raise FusionRefused(f"the M2-space of {name} is not special")
    tr.very_special_s = s.very_special
    phi_f, f = _corner_factorization(t)
    n = f.n
    if f.alpha.maps != s.alpha.maps:
        raise AlgebraError("t and s carry different actions on d")
    tr.notes.append(f"matrix size n = {n}" + ("" if s.very_special else " (finite, s only special)"))
    V = s.space.space_dim
    phi_ops = [la.mat(m) for m in (phi_data if phi_data is not None else default_phi_data(s))]
    checks = check_phi_data(s, phi_ops)
    for name, ok, w in checks:
        if not ok:
            raise FusionRefused(f"hypothesis on phi fails: {name} at {w}")
    tr.maps["phi_data"] = phi_ops

    # line 1 -> 2: u = f^-1 . s
    tr.lines["1"] = s
    u, c2 = fuse_inv_corner_left(f, s, label="u")
    tr.lines["2"] = u
    tr.certificates["2"] = c2
    units = matrix_units(n)
    lm = [units.left_matrix(units.basis(q)) for q in range(n * n)]
    phi_inf = [la.kron(lm[q], phi_ops[r]) for q in range(n * n) for r in range(d.dim)]
    tr.maps["phi_inf"] = phi_inf
    tr.derivation.append(f"f^-1 . s = u  [{c2.equation}]")

    # line 3: phi_factor . u over the middle space M_n(X) box k
    k = t.J
    kappa = t.delta_J
    line3, c3 = fuse_hom_left(phi_f, u, alpha=kappa, label="line3", middle=True)
    tr.lines["3"] = line3
    tr.certificates["3"] = c3
    tr.derivation.append(f"phi . u = line3  [{c3.equation}]")
    if line3.speciality().kind not in ("special", "very_special"):
        raise FusionRefused(f"line-3 M2-space not special: {line3.speciality().witness}")
    V3 = line3.space.space_dim
    nk, kmats, _ = regular_ambient(k)
    V2 = u.space.space_dim
    theta = []
    for c in range(k.dim):
        top = _lin(phi_inf, phi_f.column(c), V2)
        theta.append(la.block_diag(top, kmats[c]))
    tr.maps["theta"] = theta
    rho3 = line3.space.rep
    sol3 = la.SpanSolver([_flat(m) for m in rho3], V3 * V3)
    for c, th in enumerate(theta):
        for q, x in enumerate(rho3):
            if not sol3.contains(_flat(la.mat_mul(th, x))) or not sol3.contains(_flat(la.mat_mul(x, th))):
                raise FusionRefused(f"theta({c}) is not a multiplier of the line-3 algebra at basis {q}")
    unit = unit or ApproxUnit(k, [k.unit] if k.unit is not None else [])
    if unit.check() is not None:
        raise AlgebraError(f"approximate unit on {k.label} invalid: {unit.check()}")
    ext = None
    for name, h in (("S_-", line3.s_minus), ("S_+", line3.s_plus)):
        s_ops = [line3.space.operator(h.column(c)) for c in range(k.dim)]
        ext = extend_to_adjointables(k, theta, unit, V3, rep=rho3, alpha=kappa,
                                     module_actions=(line3.space.S, line3.space.T), s_ops=s_ops)
        tr.notes.append(f"theta-bar checks with {name}: " + ", ".join(c[0] for c in ext.checks))
    tr.stabilization_index = ext.stabilization_index

    # line 4: T_- = theta-bar o t_-, then X4 = x (+)_{T_-} B over K4 = k (+)_{t_-} B
    B = t.A
    tsol = la.SpanSolver(t.ideal_basis(), t.X.dim)

    def t_minus_op(bvec):
        cols = []
        for c in range(k.dim):
            r = tsol.solve(t.X.mul(t.s_minus(bvec), t.iota.column(c)))
            if not r.in_span:
                raise AlgebraError("t_-(b) does not preserve the ideal of t")
            cols.append(r.coords)
        return la.from_columns(cols, k.dim)

    Uops = [t_minus_op(B.basis(b)) for b in range(B.dim)]
    Tm = [ext(U) for U in Uops]
    kb = [la.mat_vec(U, unit.top) for U in Uops]
    tr.maps["T_-"] = Tm
    M = OperatorAlgebra("L(x)", V3, operator_span_closure(V3, list(rho3) + Tm))
    iota_M = hom_from_images(line3.X, M.algebra, [M.coords(m) for m in rho3], "iota_M")
    Tm_M = hom_from_images(B, M.algebra, [M.coords(m) for m in Tm], "T_-")
    w = Tm_M.multiplicativity_witness()
    if w is not None:
        raise AlgebraError(f"T_- not multiplicative at {w}")
    X4, _ = oplus_algebra(iota_M, Tm_M, "x(+)B")
    K4, _ = oplus_algebra(t.iota, t.s_minus, "k(+)B")
    dx, dj, db = line3.X.dim, line3.J.dim, B.dim
    iota4 = hom_from_images(line3.J, X4, [la.unit_vec(dx + db, c) for c in range(dj)], "jmath(+)0")
    sm4 = AlgebraHom(K4, X4, la.block_diag(line3.s_minus.matrix, la.identity(db)), "S_-(+)id")
    sp4 = AlgebraHom(K4, X4, la.block_diag(line3.s_plus.matrix, la.identity(db)), "S_+(+)id")
    for h in (sm4, sp4):
        w = h.multiplicativity_witness()
        if w is not None:
            raise AlgebraError(f"{h.label} not multiplicative at {w}")
    nb, bmats, bplus = regular_ambient(B)
    G = s.G
    beta = t.alpha
    bmod = [beta.at(g) if bplus is None else la.block_diag(beta.at(g), [[ONE]]) for g in range(len(G))]
    V4 = V3 + nb
    rep4 = [la.block_diag(m, la.zeros(nb, nb)) for m in rho3]
    rep4 += [la.block_diag(Tm[b], bmats[b]) for b in range(db)]
    S4 = GAction(G, V4, [la.block_diag(line3.space.S.at(g), bmod[g]) for g in range(len(G))], "module")
    T4 = GAction(G, V4, [la.block_diag(line3.space.T.at(g), bmod[g]) for g in range(len(G))], "module")
    space4 = M2Space(X4, V4, rep4, S4, T4)
    alpha4 = GAction(G, K4.dim, [la.block_diag(kappa.at(g), beta.at(g)) for g in range(len(G))])
    line4 = require_valid(L1Element(line3.e, iota4, sm4, sp4, space4, alpha4, "line4"))
    tr.lines["4"] = line4
    incl_x = hom_from_images(line3.X, X4, [la.unit_vec(dx + db, c) for c in range(dx)], "id(+)0")
    incl_k = hom_from_images(k, K4, [la.unit_vec(k.dim + db, c) for c in range(k.dim)], "id(+)0_B")
    c4 = _certified(check_diagram(line3, line4, identity_hom(line3.B), identity_hom(line3.J), incl_x,
                                  incl_k, name="line3 = (id(+)0) . line4"))
    section = hom_from_images(B, K4, [la.unit_vec(k.dim + db, k.dim + b) for b in range(db)], "0(+)id")
    sl4, c4s = fuse_hom_left(section, line4)
    if not sl4.is_zero_element():
        raise AlgebraError("section . line4 is not degenerate")
    tr.certificates["4"] = CertificateChain("D . line3 = line4", [c4, c4s],
                                            ["line3 = iota . line4", "D . iota . line4 = line4 - f . s . line4",
                                             "s . line4 has s_+ = s_- and is zero"])
    tr.derivation.append("D . line3 = line4  [line3 = iota . line4; section . line4 degenerate]")

    # line 5: e1^-1 . line4 with e1 the upper-left corner of M_2(K4)
    tsp = t.speciality()
    if tsp.kind != "very_special":
        raise FusionRefused("the M2-space of t must be very special to identify e2 . e1^-1 with the identity")
    sigma = tsp.factors[0]
    flip = _flip_perm(1)
    for g in range(len(G)):
        if la.mat_mul(flip, la.mat_mul(sigma.at(g), flip)) != sigma.at(g):
            raise FusionRefused("the M_2-action of t does not commute with the flip")
    e1 = canonical_matrix_corner(K4, alpha4, 2, sigma=sigma, pos=0)
    v, c5 = fuse_inv_corner_left(e1, line4, label="line5")
    tr.lines["5"] = v
    tr.certificates["5"] = c5
    tr.derivation.append(f"e1^-1 . line4 = line5  [{c5.equation}]")

    # line 6: line4 again, reached from line5 through the flip of M_2
    vF, cF = _flipped(v, line4, sigma)
    tr.lines["5F"] = vF
    tr.certificates["5F"] = cF
    line6 = line4.relabel("line6")
    tr.lines["6"] = line6
    MJ = v.J
    l6 = corner_hom(line4.J, 2, 1, target=MJ, label="pos2[j]")
    E2 = corner_hom(X4, 2, 1, target=v.X, label="E2")
    e2 = corner_hom(K4, 2, 1, target=v.A, label="e2")
    c6 = _certified(check_diagram(line6, vF, identity_hom(line6.B), l6, E2, e2, name="line6 = e2 . line5F"))
    tr.certificates["6"] = c6
    tr.derivation.append("e2 . line5 = e2 . F . line5F = e2 . line5F = line6  [flip identified with the identity]")
    tr.maps["E1"], tr.maps["E2"] = corner_hom(X4, 2, 0, target=v.X).matrix, E2.matrix
    tr.maps["e1"], tr.maps["e2"] = e1.hom.matrix, e2.matrix

    # line 7: zeta transport to the middle spaces
    ms7 = middle_space(iota_M, Tm_M, "L(x)[]B")
    ms7k = middle_space(t.iota, t.s_minus, "L(k)[]B")
    zeta2, zeta2i = zeta(iota_M, Tm_M, ms7, X4)
    zeta1, zeta1i = zeta(t.iota, t.s_minus, ms7k, K4)
    X7, K7 = ms7.algebra, ms7k.algebra
    iota7 = AlgebraHom(line4.J, X7, iota4.matrix, "jmath(+)0")
    sm7 = AlgebraHom(K7, X7, sm4.matrix, "z_-")
    sp7 = AlgebraHom(K7, X7, sp4.matrix, "z_+")
    space7 = M2Space(X7, V4, rep4, S4, T4)
    line7 = require_valid(L1Element(line4.e, iota7, sm7, sp7, space7, alpha4, "line7"))
    tr.lines["7"] = line7
    c7 = _certified(check_diagram(line7, line6, identity_hom(line7.B), identity_hom(line7.J),
                                  zeta2i, zeta1i, name="line7 = zeta1^-1 . line6"))
    tr.certificates["7"] = c7
    tr.derivation.append(f"zeta1^-1 . line6 = line7  [{c7.equation}]")
    tr.maps["zeta1"], tr.maps["zeta2"] = zeta1.matrix, zeta2.matrix

    # line 8: (t_+ (+) id) . line7
    dt = [tsol.solve(la.vec_sub(t.s_plus.column(b), t.s_minus.column(b))).coords for b in range(db)]
    tplus = hom_from_images(B, K7, [dt[b] + la.unit_vec(db, b) for b in range(db)], "t_+(+)id")
    x, c8 = fuse_hom_left(tplus, line7, alpha=beta, label=f"{t.label}.{s.label}")
    tr.lines["8"] = x
    tr.certificates["8"] = c8
    tr.derivation.append(f"(t_+ (+) id) . line7 = x  [{c8.equation}]")
    kind = x.speciality().kind
    if kind not in ("special", "very_special"):
        raise AlgebraError("the product's M2-space is not special")
    tr.notes.append(f"output M2-space: {kind}")

    # closed form, evaluated from the raw data of s and t
    rho_s = s.space
    for b in range(db):
        for sign, sh, xh in (("+", s.s_plus, x.s_plus), ("-", s.s_minus, x.s_minus)):
            m_vec = phi_f(dt[b])  # in M_n(d)
            top = la.zeros(V2, V2)
            for q in range(n * n):
                for r in range(d.dim):
                    c = m_vec[q * d.dim + r]
                    if c:
                        top = la.mat_add(top, la.mat_scale(c, la.kron(lm[q], rho_s.operator(sh.column(r)))))
            first = la.block_diag(top, _lin(kmats, dt[b], nk))
            second = la.block_diag(_lin(phi_inf, phi_f(kb[b]), V2), _lin(kmats, kb[b], nk))
            expected = la.block_diag(la.mat_add(first, second), bmats[b])
            got = x.space.operator(xh.column(b))
            tr.closed_form.append((b, sign, got == expected))
    if not all(r[2] for r in tr.closed_form):
        raise AlgebraError("closed form disagrees with the pipeline")
    return x, tr


def _flipped(v: L1Element, line4: L1Element, sigma: GAction):
    """v transported by the flip automorphism of M_2, with its certificate v = F . vF."""
    X4, J4, K4 = line4.X, line4.J, line4.A
    FX = AlgebraHom(v.X, v.X, _flip_perm(X4.dim), "F")
    FJ = AlgebraHom(v.J, v.J, _flip_perm(J4.dim), "F")
    FA = AlgebraHom(v.A, v.A, _flip_perm(K4.dim), "F")
    G = v.G
    P = la.kron(_flip_perm(1), la.identity(line4.space.space_dim))
    S = GAction(G, v.space.space_dim, [la.mat_mul(P, la.mat_mul(v.space.S.at(g), P)) for g in range(len(G))],
                "module")
    T = GAction(G, v.space.space_dim, [la.mat_mul(P, la.mat_mul(v.space.T.at(g), P)) for g in range(len(G))],
                "module")
    space = M2Space(v.X, v.space.space_dim, v.space.rep, S, T)
    conj = lambda act, F: GAction(G, act.dim, [la.mat_mul(F.matrix, la.mat_mul(act.at(g), F.matrix))
                                              for g in range(len(G))])
    deltaJ = conj(v.delta_J, FJ)
    cJ = CornerEmbedding(corner_hom(J4, 2, 1, target=v.J), line4.e.delta, deltaJ, "canonical_matrix", n=2,
                         sigma=sigma, pos=1)
    H = compose_corners(line4.e, cJ)
    vF = require_valid(L1Element(H, v.iota, v.s_minus, v.s_plus, space, conj(v.alpha, FA), "line5F"))
    cert = _certified(check_diagram(v, vF, identity_hom(v.B), FJ, FX, FA, name="line5 = F . line5F"))
    return vF, cert
