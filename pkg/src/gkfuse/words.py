"""Morphism words over homs, inverse corners and synthetic splits, with normalization."""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from . import linalg as la
from .algebra import AlgebraError, AlgebraHom, hom_from_images, matrix_algebra
from .equivariance import GAction
from .modules import CornerEmbedding
from .scalar import ZERO, format_scalar
from .sequences import L1Element, SplitExactSeq, require_valid


def _matrix_digest(m) -> str:
    h = hashlib.sha1()
    for row in m:
        h.update((",".join(format_scalar(x) for x in row) + ";").encode())
    return h.hexdigest()[:10]


# --- tokens ---------------------------------------------------------------------

class Token:
    kind = "?"
    source: str
    target: str
    name: str

    def key(self) -> tuple:
        raise NotImplementedError

    def __eq__(self, other):
        return isinstance(other, Token) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def render(self) -> str:
        return self.name

    def __repr__(self):
        return f"{self.kind}({self.render()}: {self.source}->{self.target})"

    def to_json(self) -> dict:
        return {"kind": self.kind, "name": self.render(), "source": self.source, "target": self.target}


class HomT(Token):
    kind = "hom"

    def __init__(self, h: AlgebraHom, source_tag: str = "", target_tag: str = "", name=None):
        self.h = h
        self.source = h.source.label + source_tag
        self.target = h.target.label + target_tag
        self.name = name or h.label
        self._digest = _matrix_digest(h.matrix)

    def key(self):
        return ("hom", self.source, self.target, self._digest)

    @property
    def is_identity(self) -> bool:
        return (self.source == self.target and self.h.source.same_as(self.h.target)
                and self.h.matrix == la.identity(self.h.source.dim))

    @property
    def is_zero(self) -> bool:
        return self.h.is_zero()


class InvCornerT(Token):
    kind = "inv_corner"

    def __init__(self, e: CornerEmbedding, source_tag: str = "", target_tag: str = "", name=None,
                 rotation_partner: AlgebraHom | None = None):
        self.e = e
        self.source = e.target.label + source_tag
        self.target = e.source.label + target_tag
        self.name = name or f"{e.label}^-1"
        self.rotation_partner = rotation_partner  # f2 when f2 . f1^-1 = id may be used
        self._digest = _matrix_digest(e.hom.matrix)

    def key(self):
        return ("inv", self.source, self.target, self._digest)


class SplitT(Token):
    kind = "split"

    def __init__(self, seq: SplitExactSeq, source_tag: str = "", target_tag: str = "", name=None):
        self.seq = seq
        self.source = seq.X.label + source_tag
        self.target = seq.J.label + target_tag
        self.name = name or f"D[{seq.label}]"
        self._digest = _matrix_digest(seq.iota.matrix) + _matrix_digest(seq.s.matrix)

    def key(self):
        return ("split", self.source, self.target, self._digest)


def _compose_check(tokens, source=None):
    cur = source
    for t in tokens:
        if cur is not None and t.source != cur:
            raise AlgebraError(f"ill-composed word: {cur} then {t.render()} from {t.source}")
        cur = t.target
    return cur


# --- words -----------------------------------------------------------------------

def _word_key(tokens) -> tuple:
    return tuple(t.key() for t in tokens)


class MorphismWord:
    """Integer combination of composable token strings, read left to right."""

    def __init__(self, source: str, target: str, terms=()):
        self.source = source
        self.target = target
        self.terms: list = []
        for c, toks in terms:
            toks = tuple(toks)
            end = _compose_check(toks, source)
            if end != target:
                raise AlgebraError(f"word ends at {end}, expected {target}")
            if c:
                self.terms.append((int(c), toks))

    @classmethod
    def of(cls, *tokens, coef=1) -> "MorphismWord":
        if not tokens:
            raise AlgebraError("empty word needs explicit source/target")
        return cls(tokens[0].source, tokens[-1].target, [(coef, tokens)])

    @classmethod
    def identity(cls, obj: str) -> "MorphismWord":
        return cls(obj, obj, [(1, ())])

    @classmethod
    def zero(cls, source: str, target: str) -> "MorphismWord":
        return cls(source, target, [])

    def __add__(self, other: "MorphismWord") -> "MorphismWord":
        if (self.source, self.target) != (other.source, other.target):
            raise AlgebraError("cannot add words with different source/target")
        return MorphismWord(self.source, self.target, self.terms + other.terms)

    def __neg__(self) -> "MorphismWord":
        return MorphismWord(self.source, self.target, [(-c, t) for c, t in self.terms])

    def __sub__(self, other: "MorphismWord") -> "MorphismWord":
        return self + (-other)

    def scale(self, k: int) -> "MorphismWord":
        return MorphismWord(self.source, self.target, [(k * c, t) for c, t in self.terms])

    def then(self, other: "MorphismWord") -> "MorphismWord":
        """self . other (first self, then other)."""
        if self.target != other.source:
            raise AlgebraError(f"cannot compose: {self.target} vs {other.source}")
        terms = [(c1 * c2, t1 + t2) for c1, t1 in self.terms for c2, t2 in other.terms]
        return MorphismWord(self.source, other.target, terms)

    __mul__ = then

    def is_zero(self) -> bool:
        return not self.terms

    def canonical(self) -> tuple:
        return tuple(sorted((_word_key(t), c) for c, t in self.terms))

    def same_as(self, other: "MorphismWord") -> bool:
        return ((self.source, self.target) == (other.source, other.target)
                and self.canonical() == other.canonical())

    def render(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for c, toks in sorted(self.terms, key=lambda ct: _word_key(ct[1])):
            body = " . ".join(t.render() for t in toks) if toks else f"id[{self.source}]"
            sign = "-" if c < 0 else "+"
            mag = "" if abs(c) == 1 else f"{abs(c)} "
            parts.append(f"{sign} {mag}{body}")
        s = " ".join(parts)
        return s[2:] if s.startswith("+ ") else s

    def shape(self) -> list:
        """Token kinds of a single-term word."""
        if len(self.terms) != 1:
            raise AlgebraError("shape is defined for single-term words")
        return [t.kind for t in self.terms[0][1]]

    def to_json(self) -> dict:
        return {"source": self.source, "target": self.target,
                "terms": [{"coef": c, "tokens": [t.to_json() for t in toks]}
                          for c, toks in sorted(self.terms, key=lambda ct: _word_key(ct[1]))]}

    def __repr__(self):
        return f"MorphismWord({self.render()})"


# --- facts ---------------------------------------------------------------------------

@dataclass
class Fact:
    """lhs -> rhs, each a token string / combination; applied only with a certificate or tag."""
    lhs: tuple
    rhs: list  # list of (coef, tokens)
    tag: str
    certificate: object = None

    def __post_init__(self):
        if self.certificate is None and not self.tag.startswith("relation"):
            raise AlgebraError("facts need a certificate or a relation tag")
        self.lhs = tuple(self.lhs)
        self._key = _word_key(self.lhs)


class FactStore:
    def __init__(self, facts=()):
        self.facts: list = []
        for f in facts:
            self.add(f)

    def add(self, fact: Fact):
        cert = fact.certificate
        if cert is not None and hasattr(cert, "ok") and not cert.ok:
            raise AlgebraError("refusing an uncertified fact")
        self.facts.append(fact)

    def __iter__(self):
        return iter(self.facts)


# --- rules ---------------------------------------------------------------------------

def _image_within(h: AlgebraHom, g: AlgebraHom):
    """q with h = g o q when the image of h lies in the image of injective g, else None."""
    if not g.is_injective():
        return None
    cols = [g.column(k) for k in range(g.source.dim)]
    solver = la.SpanSolver(cols, g.target.dim)
    qcols = []
    for k in range(h.source.dim):
        r = solver.solve(h.column(k))
        if not r.in_span:
            return None
        qcols.append(r.coords)
    return hom_from_images(h.source, g.source, qcols, f"{h.label}|{g.source.label}")


def _rule_at(toks: tuple, i: int, facts, whole_len: int):
    """Try each rule at position i. Returns (rule name, replacement terms) or None.
    Replacement terms are (coef multiplier, new token tuple) for the whole word."""
    t = toks[i]
    nxt = toks[i + 1] if i + 1 < len(toks) else None
    # zero morphisms
    if isinstance(t, HomT) and (t.is_zero or t.h.source.dim == 0 or t.h.target.dim == 0):
        return "zero-hom (n)", []
    # identity removal
    if isinstance(t, HomT) and t.is_identity:
        return "identity (n)", [(1, toks[:i] + toks[i + 1:])]
    if nxt is None:
        return None
    # corner cancellation
    if isinstance(t, HomT) and isinstance(nxt, InvCornerT) and t.h.source.same_as(nxt.e.source) \
            and t.h.target.same_as(nxt.e.target) and t.h.matrix == nxt.e.hom.matrix \
            and t.source == nxt.target:
        return "e.e^-1 (p)", [(1, toks[:i] + toks[i + 2:])]
    if isinstance(t, InvCornerT) and isinstance(nxt, HomT) and nxt.h.source.same_as(t.e.source) \
            and nxt.h.target.same_as(t.e.target) and nxt.h.matrix == t.e.hom.matrix \
            and t.source == nxt.target:
        return "e^-1.e (p)", [(1, toks[:i] + toks[i + 2:])]
    # iota . Delta = id_J and the forms it implies
    if isinstance(t, HomT) and isinstance(nxt, SplitT):
        seq = nxt.seq
        if t.h.target.same_as(seq.X):
            if t.h.matrix == seq.iota.matrix and t.h.source.same_as(seq.J):
                return "iota.D = id (r)", [(1, toks[:i] + toks[i + 2:])]
            q = _image_within(t.h, seq.s)
            if q is not None:
                return "s.D = 0 (r)", []
            q = _image_within(t.h, seq.iota)
            if q is not None:
                return "h.D through iota (r)", [(1, toks[:i] + (HomT(q, target_tag=""),) + toks[i + 2:])]
    # rotation homotopy for very special M2-spaces
    if isinstance(t, HomT) and isinstance(nxt, InvCornerT) and nxt.rotation_partner is not None \
            and t.h.matrix == nxt.rotation_partner.matrix and t.source == nxt.target:
        return "f2.f1^-1 = id (rotation)", [(1, toks[:i] + toks[i + 2:])]
    # certified facts
    for fact in facts:
        n = len(fact.lhs)
        if _word_key(toks[i:i + n]) == fact._key:
            return f"fact: {fact.tag}", [(c, toks[:i] + tuple(r) + toks[i + n:]) for c, r in fact.rhs]
    # gated expansion Delta . iota = id - f . s
    if isinstance(t, SplitT) and isinstance(nxt, HomT) and nxt.h.matrix == t.seq.iota.matrix \
            and nxt.h.source.same_as(t.seq.J) and nxt.h.target.same_as(t.seq.X):
        prev = toks[i - 1] if i > 0 else None
        after = toks[i + 2] if i + 2 < len(toks) else None
        gate = isinstance(prev, HomT) or isinstance(after, HomT) or len(toks) == 2
        if gate:
            seq = t.seq
            fs = (HomT(seq.f, source_tag=_tag(t.source, seq.X.label)),
                  HomT(seq.s, target_tag=_tag(nxt.target, seq.X.label)))
            return "D.iota = id - f.s (r, expanding)", [(1, toks[:i] + toks[i + 2:]),
                                                      (-1, toks[:i] + fs + toks[i + 2:])]
    # hom fusion
    if isinstance(t, HomT) and isinstance(nxt, HomT):
        h = t.h.then(nxt.h)
        tag_s = _tag(t.source, t.h.source.label)
        tag_t = _tag(nxt.target, nxt.h.target.label)
        return "hom fusion (o)", [(1, toks[:i] + (HomT(h, tag_s, tag_t, f"{t.name}.{nxt.name}"),)
                                   + toks[i + 2:])]
    return None


def _tag(key: str, label: str) -> str:
    return key[len(label):] if key.startswith(label) else ""


@dataclass
class TraceStep:
    rule: str
    term: int
    position: int
    before: str
    after: str

    def to_json(self) -> dict:
        return {"rule": self.rule, "term": self.term, "position": self.position,
                "before": self.before, "after": self.after}


def _render_tokens(toks, source) -> str:
    return " . ".join(t.render() for t in toks) if toks else f"id[{source}]"


def normalize(w: MorphismWord, facts=(), trace: list | None = None, limit: int = 10000) -> MorphismWord:
    """Apply the rewrite rules until none applies, then collect like terms."""
    facts = list(facts)
    work = [(c, tuple(t)) for c, t in w.terms]
    done = []
    steps = 0
    while work:
        c, toks = work.pop(0)
        fired = None
        for i in range(len(toks)):
            r = _rule_at(toks, i, facts, len(toks))
            if r is not None:
                fired = (i, r)
                break
        if fired is None:
            done.append((c, toks))
            continue
        steps += 1
        if steps > limit:
            raise AlgebraError("normalization exceeded its step limit")
        i, (rule, repl) = fired
        new_terms = [(c * k, nt) for k, nt in repl]
        if trace is not None:
            after = " ; ".join(f"{k:+d} {_render_tokens(nt, w.source)}" for k, nt in new_terms) or "0"
            trace.append(TraceStep(rule, len(done), i, f"{c:+d} {_render_tokens(toks, w.source)}", after))
        work = new_terms + work
    # collect like terms
    acc: dict = {}
    rep: dict = {}
    for c, toks in done:
        k = _word_key(toks)
        acc[k] = acc.get(k, 0) + c
        rep.setdefault(k, toks)
    terms = [(acc[k], rep[k]) for k in sorted(acc) if acc[k]]
    if trace is not None and len(terms) != len(done):
        trace.append(TraceStep("collect (m)(n)", 0, 0, f"{len(done)} terms", f"{len(terms)} terms"))
    return MorphismWord(w.source, w.target, terms)


# --- level-one words -------------------------------------------------------------

def _split_of(z: L1Element) -> SplitExactSeq:
    return SplitExactSeq(z.iota, z.f, z.s_minus, f"{z.label}:s_-")


def m2_corners(z: L1Element):
    """(f1 as corner embedding of (X, gamma_-), f2 as hom of (X, gamma_+)) into M_2(X)."""
    X = z.X
    M2 = z.space.m2_algebra()
    d = X.dim
    f1 = hom_from_images(X, M2, [X.basis(k) + [ZERO] * (3 * d) for k in range(d)], f"f1[{z.label}]")
    f2 = hom_from_images(X, M2, [[ZERO] * (3 * d) + X.basis(k) for k in range(d)], f"f2[{z.label}]")
    corner = CornerEmbedding(f1, z.space.gamma_minus, z.space.delta(), "canonical_matrix", n=2,
                             notes=["upper-left corner of the M2-space"])
    return corner, f2


def level_one_word(z: L1Element) -> MorphismWord:
    """s_+ . f2 . f1^-1 . D_{s_-} . e^-1, with f2 . f1^-1 omitted when very special."""
    require_valid(z)
    very = z.very_special
    plus_tag = "" if very or z.space.gamma_plus.maps == z.space.gamma_minus.maps else "{+}"
    toks = [HomT(z.s_plus, target_tag=plus_tag, name=f"{z.label}.s_+")]
    if not very:
        f1, f2 = m2_corners(z)
        toks.append(HomT(f2, source_tag=plus_tag, name=f"{z.label}.f2"))
        toks.append(InvCornerT(f1, name=f"{z.label}.f1^-1"))
    toks.append(SplitT(_split_of(z), name=f"D[{z.label}.s_-]"))
    toks.extend(corner_tokens(z))
    return MorphismWord.of(*toks)


def corner_tokens(z: L1Element) -> list:
    if z.e is not None:
        return [InvCornerT(z.e, name=f"{z.label}.e^-1")]
    fc = z.factored
    return [HomT(fc.phi, name=f"{z.label}.phi"), InvCornerT(fc.f, name=f"{z.label}.f^-1")]


# --- diagram certificates --------------------------------------------------------

@dataclass
class DiagramCertificate:
    """top . k = e . bottom from a commuting diagram of two level-one rows."""
    top: L1Element
    bottom: L1Element
    k: AlgebraHom
    l: AlgebraHom
    m: AlgebraHom
    e: AlgebraHom
    ok: bool = False
    failures: list = field(default_factory=list)
    name: str = ""

    def __bool__(self):
        return self.ok

    @property
    def equation(self) -> str:
        return f"{self.top.label} . {self.k.label} = {self.e.label} . {self.bottom.label}"

    def fact(self) -> Fact:
        lhs = level_one_word(self.top).then(MorphismWord.of(HomT(self.k)))
        rhs = MorphismWord.of(HomT(self.e)).then(level_one_word(self.bottom))
        (_, ltoks), = lhs.terms
        return Fact(ltoks, rhs.terms, f"diagram {self.name or self.equation}", self)

    def to_json(self) -> dict:
        return {"name": self.name, "equation": self.equation, "ok": self.ok,
                "failures": [list(map(str, f)) for f in self.failures]}


def _hom_eq(a: AlgebraHom, b: AlgebraHom) -> bool:
    return a.matrix == b.matrix


def check_diagram(top: L1Element, bottom: L1Element, k: AlgebraHom, l: AlgebraHom,
                  m: AlgebraHom, e: AlgebraHom, name: str = "") -> DiagramCertificate:
    cert = DiagramCertificate(top, bottom, k, l, m, e, name=name)
    fails = cert.failures
    for z in (top, bottom):
        try:
            require_valid(z)
        except AlgebraError as exc:
            fails.append(("row invalid", str(exc)))
            return cert
    if top.e is None or bottom.e is None:
        fails.append(("factored corners are not supported in diagrams",))
        return cert
    checks = [("k", k, top.B, bottom.B), ("l", l, top.J, bottom.J), ("m", m, top.X, bottom.X),
              ("e", e, top.A, bottom.A)]
    for nm, h, src, tgt in checks:
        if not (h.source.same_as(src) and h.target.same_as(tgt)):
            fails.append((f"{nm} has wrong source/target", h.source.label, h.target.label))
    if fails:
        return cert
    for nm, h in (("m", m), ("l", l), ("k", k), ("e", e)):
        w = h.multiplicativity_witness()
        if w is not None:
            fails.append((f"{nm} not multiplicative", w))
    if not _hom_eq(top.e.hom.then(l), k.then(bottom.e.hom)):
        fails.append(("h l = k H fails", _first_diff(top.e.hom.then(l), k.then(bottom.e.hom))))
    if not _hom_eq(top.iota.then(m), l.then(bottom.iota)):
        fails.append(("iota m = l iota' fails", _first_diff(top.iota.then(m), l.then(bottom.iota))))
    for nm, s, u in (("s_+ m = e u_+", top.s_plus, bottom.s_plus), ("s_- m = e u_-", top.s_minus, bottom.s_minus)):
        if not _hom_eq(s.then(m), e.then(u)):
            fails.append((nm + " fails", _first_diff(s.then(m), e.then(u))))
    G = top.G
    for g in range(len(G)):
        for i in range(2):
            for j in range(2):
                lhs = la.mat_mul(m.matrix, top.space.block(i, j, g)) if m.matrix and top.X.dim else None
                rhs = la.mat_mul(bottom.space.block(i, j, g), m.matrix) if m.matrix and top.X.dim else None
                if lhs != rhs:
                    fails.append(("M = m (x) id not equivariant", G.elements[g], i + 1, j + 1))
                    break
    cert.ok = not fails
    return cert


def _first_diff(a: AlgebraHom, b: AlgebraHom):
    for k in range(a.source.dim):
        if a.column(k) != b.column(k):
            return ("basis", k)
    return None


# --- inverse corners past splits ---------------------------------------------------

@dataclass
class SplitMorphismCertificate:
    """A map of split-exact sequences (e_J, e_M, e_A) commuting with iota, f and s."""
    ok: bool
    failures: list
    derivation: list


def _split_map_check(seq: SplitExactSeq, big: SplitExactSeq, eJ: AlgebraHom, eM: AlgebraHom,
                     eA: AlgebraHom) -> SplitMorphismCertificate:
    fails = []
    for nm, p, q in (("iota", seq.iota.then(eM), eJ.then(big.iota)),
                     ("f", seq.f.then(eA), eM.then(big.f)),
                     ("s", seq.s.then(eM), eA.then(big.s))):
        if p.matrix != q.matrix:
            fails.append((f"square for {nm} does not commute", _first_diff(p, q)))
    for nm, h in (("e_J", eJ), ("e_M", eM), ("e_A", eA)):
        if h.multiplicativity_witness() is not None:
            fails.append((f"{nm} not multiplicative",))
    w = big.check()
    if w is not None:
        fails.append(("tensored sequence invalid", w))
    derivation = [
        "D_s . e_J = D_s . e_J . iota' . D'              [iota' . D' = id (r)]",
        "          = D_s . iota . e_M . D'               [square for iota]",
        "          = e_M . D' - f . s . e_M . D'          [D . iota = id - f . s (r)]",
        "          = e_M . D' - f . e_A . s' . D'         [square for s]",
        "          = e_M . D'                             [s' . D' = 0 (r)]",
        "e_M^-1 . D_s = D' . e_J^-1                       [multiply by e_M^-1 and e_J^-1 (p)]",
    ]
    return SplitMorphismCertificate(not fails, fails, derivation)


@dataclass
class CommutationFact:
    lhs: MorphismWord
    rhs: MorphismWord
    naturality: Fact
    fact: Fact
    tensored: SplitExactSeq
    certificate: SplitMorphismCertificate


def commute_inv_corner_past_split(eM: CornerEmbedding, seq: SplitExactSeq,
                                  eJ: CornerEmbedding | None = None) -> CommutationFact:
    """e_M^-1 . D_s = D_{s (x) id} . e_J^-1 for canonical very special corners of M and J."""
    from .modules import canonical_matrix_corner
    if eM.kind != "canonical_matrix" or eM.klass != "very_special":
        raise AlgebraError("commuting an inverse corner past a split needs a very special canonical corner")
    if not eM.source.same_as(seq.X):
        raise AlgebraError("corner does not start at the middle algebra of the sequence")
    n = eM.n
    big = seq.tensor(n)
    G = eM.alpha.G
    sigma = eM.sigma
    acts = seq.actions
    if acts is not None:
        from .equivariance import tensor_action
        big.actions = tuple(tensor_action(sigma, a) for a in acts)
    if eJ is None:
        alphaJ = acts[0] if acts is not None else _restricted(eM.alpha, seq)
        eJ = canonical_matrix_corner(seq.J, alphaJ, n, sigma=sigma, target=big.J, label=f"e{n}[{seq.J.label}]")
    alphaA = acts[2] if acts is not None else None
    if alphaA is None:
        from .equivariance import trivial_action
        alphaA = trivial_action(G, seq.A.dim)
    eA = canonical_matrix_corner(seq.A, alphaA, n, sigma=sigma, target=big.A, label=f"e{n}[{seq.A.label}]")
    eMh = AlgebraHom(seq.X, big.X, eM.hom.matrix, eM.hom.label)
    cert = _split_map_check(seq, big, eJ.hom, eMh, eA.hom)
    if not cert.ok:
        raise AlgebraError(f"internal error: tensored sequence does not commute: {cert.failures}")
    d_small = SplitT(seq)
    d_big = SplitT(big)
    naturality = Fact((d_small, HomT(eJ.hom)), [(1, (HomT(eMh), d_big))], "naturality of D", cert)
    lhs = MorphismWord.of(InvCornerT(eM), d_small)
    rhs = MorphismWord.of(d_big, InvCornerT(eJ))
    fact = Fact(lhs.terms[0][1], rhs.terms, "inverse corner skips split", cert)
    return CommutationFact(lhs, rhs, naturality, fact, big, cert)


def _restricted(alpha: GAction, seq: SplitExactSeq) -> GAction:
    from .equivariance import restrict_action
    basis = [seq.iota.column(k) for k in range(seq.J.dim)]
    act = restrict_action(alpha, basis, "J")
    # coordinates of the restriction are in the canonical row basis; map back to J's basis
    solver = la.SpanSolver(basis, seq.X.dim)
    maps = []
    for g in range(len(alpha.G)):
        cols = []
        for v in basis:
            cols.append(solver.solve(alpha.apply(g, v)).coords)
        maps.append(la.from_columns(cols, len(basis)))
    return GAction(alpha.G, len(basis), maps)


def verify_commutation(cf: CommutationFact, trace: list | None = None) -> bool:
    """Sandwich both sides between e_M and e_J and normalize with the naturality fact."""
    (_, ltoks), = cf.lhs.terms
    (_, rtoks), = cf.rhs.terms
    eM, eJ = ltoks[0].e, rtoks[-1].e
    left = MorphismWord.of(HomT(AlgebraHom(eM.source, eM.target, eM.hom.matrix, eM.hom.label)))
    right = MorphismWord.of(HomT(eJ.hom))
    a = normalize(left.then(cf.lhs).then(right), [cf.naturality], trace)
    b = normalize(left.then(cf.rhs).then(right), [cf.naturality], trace)
    return a.same_as(b)


# --- normal form of chains ----------------------------------------------------------

@dataclass
class ChainResult:
    word: MorphismWord
    log: list
    certificates: list


def normal_form_chain(factors: list) -> ChainResult:
    """Product z_1 . z_2 . ... . z_k of very special level-one elements written as
    s_+ . D . ... . D . e^-1, built from the right: each new factor is fused with the
    current leading hom, then its inverse corner is moved rightward past every split."""
    from .fusion import fuse_hom_right
    from .modules import compose_corners
    for idx, z in enumerate(factors):
        require_valid(z)
        if not z.very_special:
            raise AlgebraError(f"factor {idx} is not very special")
    log = []
    certs = []
    last = factors[-1]
    splus = last.s_plus
    splits = [_split_of(last)]
    corner = last.e
    log.append(f"start: {level_one_word(last).render()}")
    for idx in range(len(factors) - 2, -1, -1):
        x = factors[idx]
        fused, cert = fuse_hom_right(x, splus)
        if not cert.ok:
            raise AlgebraError(f"fusion certificate failed: {cert.failures}")
        certs.append(cert)
        log.append(f"{x.label} . s_+ = {fused.label}  [{cert.equation}]")
        F = fused.e
        moved = []
        for seq in splits:
            if _is_identity_corner(F):
                moved.append(seq)
                continue
            cf = commute_inv_corner_past_split(F, seq)
            if not verify_commutation(cf):
                raise AlgebraError("commutation fact failed verification")
            certs.append(cf.certificate)
            log.append(f"{cf.lhs.render()} = {cf.rhs.render()}")
            moved.append(cf.tensored)
            F = cf.rhs.terms[0][1][-1].e
        if not _is_identity_corner(F):
            corner = compose_corners(corner, F)
        splus = fused.s_plus
        splits = [_split_of(fused)] + moved
    toks = [HomT(splus, name="s_+")] + [SplitT(s) for s in splits]
    toks.append(InvCornerT(corner, name="e^-1"))
    word = MorphismWord.of(*toks)
    log.append(f"normal form: {word.render()}")
    return ChainResult(word, log, certs)


def _is_identity_corner(c: CornerEmbedding) -> bool:
    return c.source.same_as(c.target) and c.hom.matrix == la.identity(c.source.dim)
