"""Finite-dimensional associative algebras given by structure constants."""
from __future__ import annotations

import hashlib
import threading
from dataclasses import dataclass

from . import linalg as la
from .scalar import ONE, ZERO, Scalar, format_scalar


class AlgebraError(ValueError):
    pass


class Algebra:
    """Basis b_0..b_{dim-1} with b_i b_j = sum_k c[i][j][k] b_k."""

    def __init__(self, label: str, dim: int, consts=None, unit=None):
        self.label = label
        self.dim = dim
        table = [[[] for _ in range(dim)] for _ in range(dim)]
        if consts:
            items = consts.items() if isinstance(consts, dict) else _dense_items(consts)
            for (i, j, k), c in items:
                c = Scalar.coerce(c)
                if c:
                    table[i][j].append((k, c))
        for row in table:
            for cell in row:
                cell.sort(key=lambda kc: kc[0])
        self._t = table
        self._given_unit = None if unit is None else la.vec(unit)
        self._unit_cache = None
        self._fingerprint = None

    # elements
    def zero(self) -> list:
        return [ZERO] * self.dim

    def basis(self, i: int) -> list:
        return la.unit_vec(self.dim, i)

    def basis_vectors(self) -> list:
        return la.identity(self.dim)

    def mul(self, x, y) -> list:
        acc = [ZERO] * self.dim
        t = self._t
        for i, xi in enumerate(x):
            if not xi:
                continue
            ti = t[i]
            for j, yj in enumerate(y):
                if not yj:
                    continue
                c = xi * yj
                for k, ck in ti[j]:
                    acc[k] = acc[k] + c * ck
        return acc

    def product_of_basis(self, i: int, j: int) -> list:
        v = [ZERO] * self.dim
        for k, c in self._t[i][j]:
            v[k] = c
        return v

    def triples(self):
        for i in range(self.dim):
            for j in range(self.dim):
                for k, c in self._t[i][j]:
                    yield i, j, k, c

    def left_matrix(self, x) -> list:
        """Matrix of y -> x*y."""
        cols = [self.mul(x, self.basis(j)) for j in range(self.dim)]
        return la.from_columns(cols, self.dim)

    def right_matrix(self, x) -> list:
        """Matrix of y -> y*x."""
        cols = [self.mul(self.basis(j), x) for j in range(self.dim)]
        return la.from_columns(cols, self.dim)

    # unit
    @property
    def unit(self):
        if self._given_unit is not None:
            return self._given_unit
        if self._unit_cache is None:
            self._unit_cache = (find_unit(self),)
        return self._unit_cache[0]

    @property
    def is_unital(self) -> bool:
        return self.unit is not None

    # identity
    @property
    def fingerprint(self) -> str:
        if self._fingerprint is None:
            h = hashlib.sha1()
            h.update(f"{self.dim};".encode())
            for i, j, k, c in self.triples():
                h.update(f"{i},{j},{k}:{format_scalar(c)};".encode())
            self._fingerprint = h.hexdigest()[:12]
        return self._fingerprint

    def same_as(self, other: "Algebra") -> bool:
        return self is other or (self.label == other.label and self.dim == other.dim
                                 and self.fingerprint == other.fingerprint)

    def relabel(self, label: str) -> "Algebra":
        a = Algebra(label, self.dim, None, self._given_unit)
        a._t = self._t
        return a

    def __repr__(self):
        return f"Algebra({self.label!r}, dim={self.dim})"


def _dense_items(c):
    for i, row in enumerate(c):
        for j, cell in enumerate(row):
            for k, v in enumerate(cell):
                yield (i, j, k), v


def find_unit(a: Algebra):
    """Solve u*b_i = b_i = b_i*u for all i; None when no unit exists."""
    n = a.dim
    if n == 0:
        return []
    rows, rhs = [], []
    for i in range(n):
        # (u * b_i)_k = sum_j u_j c[j][i][k];  (b_i * u)_k = sum_j u_j c[i][j][k]
        left = [[ZERO] * n for _ in range(n)]
        right = [[ZERO] * n for _ in range(n)]
        for j in range(n):
            for k, c in a._t[j][i]:
                left[k][j] = left[k][j] + c
            for k, c in a._t[i][j]:
                right[k][j] = right[k][j] + c
        for k in range(n):
            target = ONE if k == i else ZERO
            rows.append(left[k])
            rhs.append(target)
            rows.append(right[k])
            rhs.append(target)
    sol = la.solve_linear(rows, rhs)
    return sol.particular if sol.consistent else None


# --- checks -----------------------------------------------------------------

@dataclass
class AlgebraReport:
    label: str
    associative: bool
    assoc_witness: tuple | None
    unital: bool
    unit: list | None
    unit_witness: int | None
    quadratik: bool
    quadratik_deficit: int

    @property
    def ok(self) -> bool:
        return self.associative and self.quadratik and (self.unit_witness is None)


def associativity_witness(a: Algebra):
    prods = [[a.product_of_basis(i, j) for j in range(a.dim)] for i in range(a.dim)]
    for i in range(a.dim):
        for j in range(a.dim):
            ij = prods[i][j]
            for k in range(a.dim):
                if a.mul(ij, a.basis(k)) != a.mul(a.basis(i), prods[j][k]):
                    return (i, j, k)
    return None


def products_span(a: Algebra) -> list:
    vecs = [a.product_of_basis(i, j) for i in range(a.dim) for j in range(a.dim)]
    vecs = [v for v in vecs if any(v)]
    return la.row_basis(vecs, a.dim)


def check_algebra(a: Algebra) -> AlgebraReport:
    w = associativity_witness(a)
    unit_witness = None
    given = a._given_unit
    if given is not None:
        for i in range(a.dim):
            b = a.basis(i)
            if a.mul(given, b) != b or a.mul(b, given) != b:
                unit_witness = i
                break
    unit = a.unit if unit_witness is None else None
    span = products_span(a)
    return AlgebraReport(a.label, w is None, w, unit is not None, unit, unit_witness,
                         len(span) == a.dim, a.dim - len(span))


# --- homomorphisms ------------------------------------------------------------

class AlgebraHom:
    """Linear map source -> target stored as a (target.dim x source.dim) matrix."""

    def __init__(self, source: Algebra, target: Algebra, matrix, label: str | None = None):
        self.source = source
        self.target = target
        self.matrix = la.mat(matrix) if matrix else [[] for _ in range(target.dim)]
        if len(self.matrix) != target.dim or any(len(r) != source.dim for r in self.matrix):
            raise la.DimensionError(
                f"hom {label or ''} {source.label}->{target.label} needs a "
                f"{target.dim}x{source.dim} matrix")
        self.label = label or f"hom({source.label},{target.label})"

    def __call__(self, v) -> list:
        if self.target.dim == 0:
            return []
        return la.mat_vec(self.matrix, v)

    def column(self, i: int) -> list:
        return [row[i] for row in self.matrix]

    def then(self, other: "AlgebraHom", label=None) -> "AlgebraHom":
        """other after self (read left to right: self . other)."""
        if not self.target.same_as(other.source):
            raise AlgebraError(f"cannot compose {self.label} with {other.label}")
        m = la.mat_mul(other.matrix, self.matrix, inner=self.target.dim) if other.matrix else []
        if self.target.dim == 0:
            m = la.zeros(other.target.dim, self.source.dim)
        return AlgebraHom(self.source, other.target, m, label or f"{other.label}o{self.label}")

    def after(self, other: "AlgebraHom", label=None) -> "AlgebraHom":
        return other.then(self, label)

    def multiplicativity_witness(self):
        s, t = self.source, self.target
        images = [self(s.basis(i)) for i in range(s.dim)]
        for i in range(s.dim):
            for j in range(s.dim):
                if self(s.product_of_basis(i, j)) != t.mul(images[i], images[j]):
                    return (i, j)
        return None

    def is_multiplicative(self) -> bool:
        return self.multiplicativity_witness() is None

    def kernel(self) -> list:
        if self.target.dim == 0:
            return la.identity(self.source.dim)
        return la.kernel(self.matrix, self.source.dim)

    def is_injective(self) -> bool:
        return not self.kernel()

    def image_basis(self) -> list:
        cols = [self.column(i) for i in range(self.source.dim)]
        return la.row_basis([c for c in cols if any(c)], self.target.dim)

    def is_surjective(self) -> bool:
        return len(self.image_basis()) == self.target.dim

    def is_zero(self) -> bool:
        return la.is_zero_mat(self.matrix)

    def equals(self, other: "AlgebraHom") -> bool:
        return (self.source.same_as(other.source) and self.target.same_as(other.target)
                and self.matrix == other.matrix)

    def relabel(self, label: str) -> "AlgebraHom":
        return AlgebraHom(self.source, self.target, self.matrix, label)

    def __repr__(self):
        return f"AlgebraHom({self.label!r}: {self.source.label} -> {self.target.label})"


def identity_hom(a: Algebra, label=None) -> AlgebraHom:
    return AlgebraHom(a, a, la.identity(a.dim), label or f"id[{a.label}]")


def zero_hom(a: Algebra, b: Algebra, label=None) -> AlgebraHom:
    return AlgebraHom(a, b, la.zeros(b.dim, a.dim), label or f"0[{a.label},{b.label}]")


def hom_from_images(source: Algebra, target: Algebra, images, label=None) -> AlgebraHom:
    """Hom given by the images of the source basis vectors."""
    return AlgebraHom(source, target, la.from_columns([list(v) for v in images], target.dim), label)


# --- standard algebras and constructions -----------------------------------

def base_field(label: str = "C") -> Algebra:
    return Algebra(label, 1, {(0, 0, 0): 1}, [1])


def zero_algebra(label: str = "0") -> Algebra:
    return Algebra(label, 0)


def diagonal_algebra(n: int, label=None) -> Algebra:
    return Algebra(label or f"D{n}", n, {(i, i, i): 1 for i in range(n)}, [1] * n)


def matrix_units(n: int, label=None) -> Algebra:
    """M_n with basis e_ij at index i*n + j."""
    consts = {}
    for i in range(n):
        for j in range(n):
            for k in range(n):
                consts[(i * n + j, j * n + k, i * n + k)] = 1
    unit = [1 if i == j else 0 for i in range(n) for j in range(n)]
    return Algebra(label or f"M{n}", n * n, consts, unit)


def direct_sum(a: Algebra, b: Algebra, label=None) -> Algebra:
    consts = {}
    for i, j, k, c in a.triples():
        consts[(i, j, k)] = c
    o = a.dim
    for i, j, k, c in b.triples():
        consts[(o + i, o + j, o + k)] = c
    unit = None
    if a.unit is not None and b.unit is not None:
        unit = list(a.unit) + list(b.unit)
    return Algebra(label or f"({a.label}+{b.label})", a.dim + b.dim, consts, unit)


def sum_injections(a: Algebra, b: Algebra, ab: Algebra):
    n = ab.dim
    ia = AlgebraHom(a, ab, [[ONE if r == c else ZERO for c in range(a.dim)] for r in range(n)], "in1")
    ib = AlgebraHom(b, ab, [[ONE if r == a.dim + c else ZERO for c in range(b.dim)] for r in range(n)], "in2")
    return ia, ib


def sum_projections(a: Algebra, b: Algebra, ab: Algebra):
    pa = AlgebraHom(ab, a, [[ONE if c == r else ZERO for c in range(ab.dim)] for r in range(a.dim)], "pr1")
    pb = AlgebraHom(ab, b, [[ONE if c == a.dim + r else ZERO for c in range(ab.dim)] for r in range(b.dim)], "pr2")
    return pa, pb


def tensor(a: Algebra, b: Algebra, label=None) -> Algebra:
    """a (x) b with basis index i*b.dim + k."""
    consts = {}
    bt = list(b.triples())
    for i, j, p, c in a.triples():
        for k, l, q, d in bt:
            key = (i * b.dim + k, j * b.dim + l, p * b.dim + q)
            consts[key] = consts.get(key, ZERO) + c * d
    unit = None
    if a.unit is not None and b.unit is not None:
        unit = [x * y for x in a.unit for y in b.unit]
    return Algebra(label or f"({a.label}x{b.label})", a.dim * b.dim, consts, unit)


def matrix_algebra(n: int, a: Algebra, label=None) -> Algebra:
    """M_n(A) = M_n (x) A; the entry (i, j) with coefficient b_k sits at (i*n+j)*dim + k."""
    return tensor(matrix_units(n), a, label or f"M{n}({a.label})")


def tensor_vec(x, y) -> list:
    return [p * q if p and q else ZERO for p in x for q in y]


def tensor_hom(f: AlgebraHom, g: AlgebraHom, source: Algebra, target: Algebra, label=None) -> AlgebraHom:
    return AlgebraHom(source, target, la.kron(f.matrix, g.matrix), label)


def matrix_unit_vec(n: int, i: int, j: int) -> list:
    return la.unit_vec(n * n, i * n + j)


def amplify(h: AlgebraHom, n: int, source=None, target=None, label=None) -> AlgebraHom:
    """h (x) id_{M_n}: M_n(A) -> M_n(B), entrywise."""
    source = source or matrix_algebra(n, h.source)
    target = target or matrix_algebra(n, h.target)
    return AlgebraHom(source, target, la.kron(la.identity(n * n), h.matrix),
                      label or f"{h.label}(x)id{n}")


def corner_hom(a: Algebra, n: int, i: int, j: int = None, target=None, label=None) -> AlgebraHom:
    """a -> e_ii (x) a inside M_n(A)."""
    j = i if j is None else j
    target = target or matrix_algebra(n, a)
    cols = [tensor_vec(matrix_unit_vec(n, i, j), a.basis(k)) for k in range(a.dim)]
    return hom_from_images(a, target, cols, label or f"corner{i + 1}{j + 1}[{a.label}]")


def plus(a: Algebra, label=None) -> Algebra:
    """Abstract unitization A (+) C*1, the adjoined unit last."""
    n = a.dim
    consts = {}
    for i, j, k, c in a.triples():
        consts[(i, j, k)] = c
    for i in range(n):
        consts[(n, i, i)] = 1
        consts[(i, n, i)] = 1
    consts[(n, n, n)] = 1
    return Algebra(label or f"{a.label}+", n + 1, consts, la.unit_vec(n + 1, n))


def plus_inclusion(a: Algebra, ap: Algebra) -> AlgebraHom:
    return AlgebraHom(a, ap, [[ONE if r == c else ZERO for c in range(a.dim)] for r in range(ap.dim)],
                      f"incl[{a.label}]")


def plus_hom(h: AlgebraHom, sp: Algebra, target_unit, target=None, label=None) -> AlgebraHom:
    """Unital extension h+: A+ -> T sending the adjoined unit to target_unit."""
    target = target or h.target
    cols = [h.column(i) for i in range(h.source.dim)] + [list(target_unit)]
    return hom_from_images(sp, target, cols, label or f"{h.label}+")


# --- subalgebras ---------------------------------------------------------------

class Subspace:
    """A subspace of an algebra given by a canonical basis, with fast membership."""

    def __init__(self, ambient: Algebra, vectors):
        self.ambient = ambient
        self.basis = la.row_basis([list(v) for v in vectors if any(v)], ambient.dim)
        self._solver = la.SpanSolver(self.basis, ambient.dim)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def coords(self, v):
        r = self._solver.solve(v)
        return r.coords if r.in_span else None

    def contains(self, v) -> bool:
        return self._solver.contains(v)

    def contains_all(self, vectors) -> bool:
        return all(self.contains(v) for v in vectors)


def ideal_witness(a: Algebra, vectors):
    """None if span(vectors) is a two-sided ideal of a, else (side, basis index, generator index)."""
    sub = Subspace(a, vectors)
    for gi, v in enumerate(sub.basis):
        for i in range(a.dim):
            b = a.basis(i)
            if not sub.contains(a.mul(b, v)):
                return ("left", i, gi)
            if not sub.contains(a.mul(v, b)):
                return ("right", i, gi)
    return None


def subalgebra_witness(a: Algebra, vectors):
    sub = Subspace(a, vectors)
    for p, x in enumerate(sub.basis):
        for q, y in enumerate(sub.basis):
            if not sub.contains(a.mul(x, y)):
                return (p, q)
    return None


def subalgebra(a: Algebra, vectors, label: str):
    """Structure constants of span(vectors) and its inclusion hom; vectors must be independent."""
    vectors = [list(v) for v in vectors]
    solver = la.SpanSolver(vectors, a.dim)
    if not solver.independent:
        raise AlgebraError(f"{label}: spanning vectors are dependent")
    m = len(vectors)
    consts = {}
    for i in range(m):
        for j in range(m):
            r = solver.solve(a.mul(vectors[i], vectors[j]))
            if not r.in_span:
                raise AlgebraError(f"{label}: not closed under products (basis pair {i},{j})")
            for k, c in enumerate(r.coords):
                if c:
                    consts[(i, j, k)] = c
    sub = Algebra(label, m, consts)
    incl = hom_from_images(sub, a, vectors, f"incl[{label}]")
    return sub, incl


class OperatorAlgebra:
    """A subalgebra of End(V) given by operator matrices, with extracted constants."""

    def __init__(self, label: str, space_dim: int, mats, kind: str = "operators"):
        flat = [[x for row in m for x in row] for m in mats]
        basis_flat = la.row_basis([f for f in flat if any(f)], space_dim * space_dim)
        self.space_dim = space_dim
        self.kind = kind
        self.mats = [_unflatten(f, space_dim) for f in basis_flat]
        self._solver = la.SpanSolver(basis_flat, space_dim * space_dim)
        consts = {}
        m = len(self.mats)
        for i in range(m):
            for j in range(m):
                coords = self.coords(la.mat_mul(self.mats[i], self.mats[j]))
                if coords is None:
                    raise AlgebraError(f"{label}: span of operators not closed under composition")
                for k, c in enumerate(coords):
                    if c:
                        consts[(i, j, k)] = c
        self.algebra = Algebra(label, m, consts)

    @property
    def dim(self) -> int:
        return len(self.mats)

    def coords(self, op):
        r = self._solver.solve([x for row in op for x in row])
        return r.coords if r.in_span else None

    def contains(self, op) -> bool:
        return self.coords(op) is not None

    def operator(self, v) -> list:
        if not self.mats:
            return la.zeros(self.space_dim, self.space_dim)
        acc = la.zeros(self.space_dim, self.space_dim)
        for c, m in zip(v, self.mats):
            if c:
                acc = la.mat_add(acc, la.mat_scale(c, m))
        return acc


def _unflatten(f, n):
    return [list(f[i * n:(i + 1) * n]) for i in range(n)]


def operator_span_closure(space_dim: int, mats, conjugations=(), limit: int = 10000) -> list:
    """Smallest subspace of End(V) containing mats, closed under products and the maps
    X -> P X Q for the given operator pairs (P, Q)."""
    n2 = space_dim * space_dim
    basis: list = []
    solver = la.SpanSolver([], n2)
    queue = [m for m in mats]

    def add(m):
        nonlocal solver
        f = [x for row in m for x in row]
        if any(f) and not solver.contains(f):
            basis.append(f)
            solver = la.SpanSolver(basis, n2)
            return True
        return False

    pending = []
    for m in queue:
        if add(m):
            pending.append(_unflatten(basis[-1], space_dim))
    steps = 0
    while pending:
        steps += 1
        if steps > limit:
            raise AlgebraError("operator closure did not stabilize")
        m = pending.pop()
        current = [_unflatten(f, space_dim) for f in basis]
        new = []
        for other in current:
            new.append(la.mat_mul(m, other))
            new.append(la.mat_mul(other, m))
        for p, q in conjugations:
            new.append(la.mat_mul(la.mat_mul(p, m), q))
        for cand in new:
            if add(cand):
                pending.append(_unflatten(basis[-1], space_dim))
    return [_unflatten(f, space_dim) for f in basis]


def unitization(label: str, space_dim: int, mats, conjugations=()):
    """Smallest subalgebra of End(V) containing the operators `mats`, the identity and
    invariant under X -> P X Q for each pair, plus the inclusion of span(mats)."""
    x_basis = operator_span_closure(space_dim, mats)
    full = operator_span_closure(space_dim, list(x_basis) + [la.identity(space_dim)], conjugations)
    xp = OperatorAlgebra(label, space_dim, full)
    x_alg = OperatorAlgebra(f"{label}_0", space_dim, x_basis)
    images = [xp.coords(m) for m in x_alg.mats]
    incl = hom_from_images(x_alg.algebra, xp.algebra, images, f"incl[{label}]")
    return xp, x_alg, incl


# --- registry -------------------------------------------------------------------

class Registry:
    """Append-only label -> algebra map; registration enforces the object axioms."""

    def __init__(self):
        self._items: dict[str, Algebra] = {}
        self._lock = threading.Lock()

    def register(self, a: Algebra, require_quadratik: bool = True) -> Algebra:
        with self._lock:
            old = self._items.get(a.label)
            if old is not None:
                if old.fingerprint != a.fingerprint or old.dim != a.dim:
                    raise AlgebraError(f"label {a.label!r} already names a different algebra")
                return old
            rep = check_algebra(a)
            if not rep.associative:
                raise AlgebraError(f"{a.label}: not associative at basis triple {rep.assoc_witness}")
            if require_quadratik and not rep.quadratik:
                raise AlgebraError(f"{a.label}: not quadratik (product span misses "
                                   f"{rep.quadratik_deficit} dimension(s))")
            self._items[a.label] = a
            return a

    def get(self, label: str) -> Algebra:
        try:
            return self._items[label]
        except KeyError:
            raise KeyError(f"unknown algebra {label!r}") from None

    def __contains__(self, label) -> bool:
        return label in self._items

    def labels(self) -> list:
        return list(self._items)
