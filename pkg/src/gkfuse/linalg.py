"""Exact linear algebra over Gaussian rationals.

Vectors are lists of Scalar, matrices are lists of rows. Elimination always
produces reduced row echelon form, so every derived basis is canonical.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .scalar import ONE, ZERO, Scalar


class DimensionError(ValueError):
    pass


def S(x) -> Scalar:
    return Scalar.coerce(x)


def vec(values) -> list:
    return [Scalar.coerce(v) for v in values]


def mat(rows) -> list:
    return [[Scalar.coerce(v) for v in row] for row in rows]


def zeros(r: int, c: int) -> list:
    return [[ZERO] * c for _ in range(r)]


def zero_vec(n: int) -> list:
    return [ZERO] * n


def unit_vec(n: int, i: int) -> list:
    v = [ZERO] * n
    v[i] = ONE
    return v


def identity(n: int) -> list:
    return [unit_vec(n, i) for i in range(n)]


def shape(m) -> tuple:
    return (len(m), len(m[0]) if m else 0)


def ncols(m, default=0) -> int:
    return len(m[0]) if m else default


def transpose(m, rows_if_empty=0) -> list:
    if not m:
        return [[] for _ in range(rows_if_empty)]
    return [list(col) for col in zip(*m)]


def mat_mul(a, b, inner=None) -> list:
    """Product a*b; `inner` gives the shared dimension when a has no columns."""
    if not a:
        return []
    n = len(b) if inner is None else inner
    if len(a[0]) != n:
        raise DimensionError(f"cannot multiply {shape(a)} by {shape(b)}")
    cols = len(b[0]) if b else 0
    out = []
    for row in a:
        acc = [ZERO] * cols
        for k, x in enumerate(row):
            if x:
                brow = b[k]
                for j in range(cols):
                    y = brow[j]
                    if y:
                        acc[j] = acc[j] + x * y
        out.append(acc)
    return out


def mat_vec(m, v) -> list:
    if m and len(m[0]) != len(v):
        raise DimensionError(f"cannot apply {shape(m)} to vector of length {len(v)}")
    nz = [(j, y) for j, y in enumerate(v) if y]
    out = []
    for row in m:
        acc = ZERO
        for j, y in nz:
            x = row[j]
            if x:
                acc = acc + x * y
        out.append(acc)
    return out


def mat_add(a, b) -> list:
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_sub(a, b) -> list:
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_scale(c, m) -> list:
    c = Scalar.coerce(c)
    return [[c * x for x in row] for row in m]


def vec_add(u, v) -> list:
    return [x + y for x, y in zip(u, v)]


def vec_sub(u, v) -> list:
    return [x - y for x, y in zip(u, v)]


def vec_scale(c, v) -> list:
    c = Scalar.coerce(c)
    return [c * x for x in v]


def lin_comb(coeffs, vectors, n=None) -> list:
    if n is None:
        n = len(vectors[0])
    acc = [ZERO] * n
    for c, v in zip(coeffs, vectors):
        if c:
            for i, x in enumerate(v):
                if x:
                    acc[i] = acc[i] + c * x
    return acc


def is_zero_vec(v) -> bool:
    return not any(v)


def is_zero_mat(m) -> bool:
    return not any(any(row) for row in m)


def columns(m) -> list:
    return transpose(m)


def from_columns(cols, nrows: int) -> list:
    if not cols:
        return [[] for _ in range(nrows)]
    return transpose(cols)


def kron(a, b) -> list:
    """Kronecker product; row index (i, k) maps to i*rows(b) + k."""
    out = []
    for ra in a:
        for rb in b:
            out.append([x * y if x and y else ZERO for x in ra for y in rb])
    return out


def block_diag(*blocks) -> list:
    sizes = [(len(b), ncols(b, len(b))) for b in blocks]
    total_c = sum(c for _, c in sizes)
    out = []
    offset = 0
    for b, (r, c) in zip(blocks, sizes):
        for row in b:
            out.append([ZERO] * offset + list(row) + [ZERO] * (total_c - offset - c))
        offset += c
    return out


def hstack(*ms) -> list:
    return [sum((list(m[i]) for m in ms), []) for i in range(len(ms[0]))]


def vstack(*ms) -> list:
    return [list(row) for m in ms for row in m]


def rref(m, ncol=None) -> tuple:
    """Reduced row echelon form and pivot columns."""
    rows = [vec(r) for r in m]
    nc = ncols(rows) if ncol is None else ncol
    pivots = []
    r = 0
    for c in range(nc):
        if r == len(rows):
            break
        piv = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = rows[r][c].inverse()
        rows[r] = [x * inv if x else ZERO for x in rows[r]]
        prow = rows[r]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [x - f * y if y else x for x, y in zip(rows[i], prow)]
        pivots.append(c)
        r += 1
    return rows, pivots


def rank(m) -> int:
    return len(rref(m)[1])


def kernel(m, ncol=None) -> list:
    """Canonical basis of {x : m x = 0}."""
    nc = ncols(m) if ncol is None else ncol
    if not m:
        return identity(nc)
    r, pivots = rref(m, nc)
    free = [c for c in range(nc) if c not in set(pivots)]
    basis = []
    for fcol in free:
        x = [ZERO] * nc
        x[fcol] = ONE
        for i, p in enumerate(pivots):
            if r[i][fcol]:
                x[p] = -r[i][fcol]
        basis.append(x)
    return basis


def row_basis(vectors, n=None) -> list:
    """Canonical (rref) basis of the span of the given vectors."""
    if not vectors:
        return []
    r, pivots = rref(vectors, n)
    return r[: len(pivots)]


def independent_subset(vectors) -> list:
    """Indices of a maximal linearly independent prefix-greedy subset."""
    if not vectors:
        return []
    _, pivots = rref(transpose(vectors), len(vectors))
    return pivots


def inverse(m) -> list:
    n = len(m)
    aug = [list(row) + unit_vec(n, i) for i, row in enumerate(m)]
    r, pivots = rref(aug, 2 * n)
    if pivots[:n] != list(range(n)):
        raise ZeroDivisionError("matrix is singular")
    return [row[n:] for row in r[:n]]


@dataclass
class SpanResult:
    in_span: bool
    coords: list | None = None
    residual_witness: int | None = None  # a row of the eliminated system that stays inconsistent

    def __bool__(self):
        return self.in_span


class SpanSolver:
    """Precomputed elimination for repeated membership queries in span(basis)."""

    def __init__(self, basis, dim=None):
        self.basis = [vec(b) for b in basis]
        self.dim = dim if dim is not None else (len(basis[0]) if basis else 0)
        for b in self.basis:
            if len(b) != self.dim:
                raise DimensionError("basis vectors of different length")
        m = len(self.basis)
        cols = transpose(self.basis, self.dim) if m else [[] for _ in range(self.dim)]
        aug = [list(cols[i]) + unit_vec(self.dim, i) for i in range(self.dim)]
        r, pivots = rref(aug, m)
        self.pivots = [p for p in pivots if p < m]
        self.rank = len(self.pivots)
        self.ops = [row[m:] for row in r]
        self.independent = self.rank == m

    def solve(self, v) -> SpanResult:
        if len(v) != self.dim:
            raise DimensionError(f"vector of length {len(v)} against span in dimension {self.dim}")
        ev = mat_vec(self.ops, v) if self.dim else []
        for i in range(self.rank, self.dim):
            if ev[i]:
                return SpanResult(False, None, i)
        coords = [ZERO] * len(self.basis)
        for i, p in enumerate(self.pivots):
            coords[p] = ev[i]
        return SpanResult(True, coords)

    def contains(self, v) -> bool:
        return self.solve(v).in_span


def span_membership(v, basis) -> SpanResult:
    """Coordinates c with v = sum c_i basis_i, or a certified refusal."""
    v = list(v)
    if basis and any(len(b) != len(v) for b in basis):
        raise DimensionError("vectors of different dimension")
    return SpanSolver(basis, len(v)).solve(v)


@dataclass
class Solution:
    consistent: bool
    particular: list | None = None
    kernel: list = field(default_factory=list)

    def __bool__(self):
        return self.consistent


def solve_linear(a, b) -> Solution:
    """All solutions of a x = b as particular solution plus kernel basis."""
    nrows = len(b)
    if len(a) != nrows:
        raise DimensionError(f"matrix with {len(a)} rows against right side of length {nrows}")
    nc = ncols(a)
    aug = [list(row) + [bi] for row, bi in zip(a, b)]
    r, pivots = rref(aug, nc + 1)
    if nc in pivots:
        return Solution(False)
    x = [ZERO] * nc
    for i, p in enumerate(pivots):
        x[p] = r[i][nc]
    return Solution(True, x, kernel(a, nc))
