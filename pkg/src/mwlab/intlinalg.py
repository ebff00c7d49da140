"""Exact linear algebra over the integers.

Three primitives carry the whole package: multi-argument extended gcd,
Smith normal form with unimodular transforms, and a solver for systems of
simultaneous linear congruences.  Matrices hold arbitrary-precision Python
integers; intermediate Bezout coefficients are allowed to grow past machine
word size, and no floating point appears anywhere.

The Smith normal form pivots deterministically (smallest nonzero absolute
value, scanning rows then columns) so that every downstream artefact --
group presentations, relation vectors, certificates -- is reproducible
bit-for-bit from the same input.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from mwlab.errors import InputError


@dataclass(frozen=True)
class IntMatrix:
    """An immutable integer matrix, entries stored row-major."""

    rows: int
    cols: int
    entries: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.rows < 0 or self.cols < 0:
            raise InputError("matrix dimensions must be nonnegative")
        if len(self.entries) != self.rows * self.cols:
            raise InputError(
                f"expected {self.rows * self.cols} entries, got {len(self.entries)}"
            )

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], cols: int | None = None) -> "IntMatrix":
        rows = [list(r) for r in rows]
        if rows:
            width = len(rows[0])
            if any(len(r) != width for r in rows):
                raise InputError("ragged rows")
        else:
            width = 0 if cols is None else cols
        flat = tuple(int(x) for r in rows for x in r)
        return cls(len(rows), width, flat)

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(n, n, tuple(1 if i == j else 0 for i in range(n) for j in range(n)))

    def entry(self, i: int, j: int) -> int:
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> tuple[int, ...]:
        return self.entries[i * self.cols : (i + 1) * self.cols]

    def to_rows(self) -> list[list[int]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def transpose(self) -> "IntMatrix":
        return IntMatrix(
            self.cols,
            self.rows,
            tuple(self.entry(i, j) for j in range(self.cols) for i in range(self.rows)),
        )

    def mul(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise InputError("dimension mismatch in matrix product")
        out = []
        for i in range(self.rows):
            ri = self.row(i)
            for j in range(other.cols):
                out.append(sum(ri[k] * other.entry(k, j) for k in range(self.cols)))
        return IntMatrix(self.rows, other.cols, tuple(out))

    def mul_vec(self, vec: Sequence[int]) -> list[int]:
        if len(vec) != self.cols:
            raise InputError("dimension mismatch in matrix-vector product")
        return [sum(self.entry(i, k) * vec[k] for k in range(self.cols)) for i in range(self.rows)]

    def trace(self) -> int:
        if self.rows != self.cols:
            raise InputError("trace needs a square matrix")
        return sum(self.entry(i, i) for i in range(self.rows))

    def diagonal(self) -> tuple[int, ...]:
        return tuple(self.entry(i, i) for i in range(min(self.rows, self.cols)))


@dataclass(frozen=True)
class SnfDecomposition:
    """U * A * V = D with U, V unimodular and D = diag(d1 | d2 | ...)."""

    U: IntMatrix
    D: IntMatrix
    V: IntMatrix

    def invariant_factors(self) -> tuple[int, ...]:
        """The nonzero diagonal entries of D, in chain order."""
        return tuple(d for d in self.D.diagonal() if d != 0)


def _egcd2(a: int, b: int) -> tuple[int, int, int]:
    """g, x, y with a*x + b*y = g = gcd(a, b) >= 0."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        return -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def ext_gcd(values: Iterable[int]) -> tuple[int, list[int]]:
    """Extended gcd of arbitrarily many integers.

    Returns (g, coeffs) with g = gcd(values) >= 0 and
    sum(coeffs[i] * values[i]) == g.  The fold is left-to-right and the
    coefficients are not size-minimised; any valid Bezout vector is
    acceptable downstream.  By convention gcd of an all-zero list is 0
    with an all-zero coefficient vector.
    """
    vals = [int(v) for v in values]
    if not vals:
        raise InputError("ext_gcd needs at least one value")
    g = 0
    coeffs: list[int] = []
    for v in vals:
        g2, x, y = _egcd2(g, v)
        coeffs = [c * x for c in coeffs]
        coeffs.append(y)
        g = g2
    return g, coeffs


def _swap_rows(mat: list[list[int]], i: int, j: int) -> None:
    mat[i], mat[j] = mat[j], mat[i]


def _swap_cols(mat: list[list[int]], i: int, j: int) -> None:
    for row in mat:
        row[i], row[j] = row[j], row[i]


def _negate_row(mat: list[list[int]], i: int) -> None:
    mat[i] = [-x for x in mat[i]]


def _add_row(mat: list[list[int]], dst: int, src: int, factor: int) -> None:
    mat[dst] = [a + factor * b for a, b in zip(mat[dst], mat[src])]


def _add_col(mat: list[list[int]], dst: int, src: int, factor: int) -> None:
    for row in mat:
        row[dst] += factor * row[src]


def _min_abs_pivot(d: list[list[int]], t: int, m: int, n: int) -> tuple[int, int] | None:
    """First position (row-major) of the smallest nonzero |entry| in the
    trailing submatrix starting at (t, t)."""
    best: tuple[int, int] | None = None
    best_val = 0
    for i in range(t, m):
        row = d[i]
        for j in range(t, n):
            v = row[j]
            if v:
                v = -v if v < 0 else v
                if best is None or v < best_val:
                    best, best_val = (i, j), v
                    if v == 1:
                        return best
    return best


def smith_normal_form(a: IntMatrix) -> SnfDecomposition:
    """Smith normal form with transforms: U * A * V = D.

    D is diagonal with nonnegative entries satisfying d1 | d2 | ...
    (trailing zeros allowed); U and V are unimodular.  Pivoting is
    deterministic, so equal inputs yield identical decompositions.
    """
    m, n = a.rows, a.cols
    d = a.to_rows()
    u = IntMatrix.identity(m).to_rows()
    v = IntMatrix.identity(n).to_rows()
    t = 0
    limit = min(m, n)
    while t < limit:
        pivot = _min_abs_pivot(d, t, m, n)
        if pivot is None:
            break
        pi, pj = pivot
        if pi != t:
            _swap_rows(d, t, pi)
            _swap_rows(u, t, pi)
        if pj != t:
            _swap_cols(d, t, pj)
            _swap_cols(v, t, pj)
        if d[t][t] < 0:
            _negate_row(d, t)
            _negate_row(u, t)
        piv = d[t][t]
        clean = True
        for i in range(t + 1, m):
            q = d[i][t] // piv
            if q:
                _add_row(d, i, t, -q)
                _add_row(u, i, t, -q)
            if d[i][t]:
                clean = False
        for j in range(t + 1, n):
            q = d[t][j] // piv
            if q:
                _add_col(d, j, t, -q)
                _add_col(v, j, t, -q)
            if d[t][j]:
                clean = False
        if not clean:
            continue
        # Ensure the pivot divides all remaining entries before locking it
        # in; this is what produces the divisibility chain.
        offender = None
        for i in range(t + 1, m):
            if any(x % piv for x in d[i][t + 1 :]):
                offender = i
                break
        if offender is not None:
            _add_row(d, t, offender, 1)
            _add_row(u, t, offender, 1)
            continue
        t += 1
    return SnfDecomposition(
        IntMatrix.from_rows(u, cols=m),
        IntMatrix.from_rows(d, cols=n),
        IntMatrix.from_rows(v, cols=n),
    )


def _solve_integer(
    c: IntMatrix, b: Sequence[int]
) -> tuple[list[int] | None, list[list[int]]]:
    """Particular solution and kernel lattice basis of C * z = b over Z.

    Returns (z0, basis); z0 is None when no integer solution exists, in
    which case the basis is still the kernel of C.
    """
    snf = smith_normal_form(c)
    diag = snf.D.diagonal()
    rank_width = len(diag)
    cb = snf.U.mul_vec(list(b))
    w = [0] * c.cols
    solvable = True
    for i in range(c.rows):
        di = diag[i] if i < rank_width else 0
        if di:
            if cb[i] % di:
                solvable = False
            else:
                w[i] = cb[i] // di
        elif cb[i]:
            solvable = False
    kernel_cols = [
        j for j in range(c.cols) if j >= rank_width or diag[j] == 0
    ]
    basis = [[snf.V.entry(i, j) for i in range(c.cols)] for j in kernel_cols]
    if not solvable:
        return None, basis
    return snf.V.mul_vec(w), basis


def _row_hnf(vectors: Iterable[Sequence[int]], width: int) -> list[tuple[int, list[int]]]:
    """Row Hermite normal form of the lattice spanned by ``vectors``.

    Returns [(pivot_col, row), ...] with strictly increasing pivot columns,
    positive pivots, entries below a pivot zero and entries above it
    reduced into [0, pivot).
    """
    pending = [list(v) for v in vectors if any(v)]
    hnf: list[tuple[int, list[int]]] = []
    col = 0
    while pending and col < width:
        work = [r for r in pending if r[col]]
        rest = [r for r in pending if not r[col]]
        if work:
            pivot_row = work[0]
            for r in work[1:]:
                a, b = pivot_row[col], r[col]
                g, x, y = _egcd2(a, b)
                combined = [x * p + y * q for p, q in zip(pivot_row, r)]
                cleared = [-(b // g) * p + (a // g) * q for p, q in zip(pivot_row, r)]
                pivot_row = combined
                if any(cleared):
                    rest.append(cleared)
            if pivot_row[col] < 0:
                pivot_row = [-x for x in pivot_row]
            hnf.append((col, pivot_row))
        pending = rest
        col += 1
    # Normalise entries above each pivot into [0, pivot).
    for k in range(len(hnf)):
        colk, rowk = hnf[k]
        piv = rowk[colk]
        for idx in range(k):
            _, above = hnf[idx]
            q = above[colk] // piv
            if q:
                for j in range(width):
                    above[j] -= q * rowk[j]
    return hnf


def _coset_reduce(x: Sequence[int], hnf: list[tuple[int, list[int]]]) -> list[int]:
    """Canonical representative of x modulo the lattice described by hnf."""
    out = list(x)
    for col, row in hnf:
        q = out[col] // row[col]
        if q:
            for j in range(len(out)):
                out[j] -= q * row[j]
    return out


def solve_mod(
    a: IntMatrix, b: Sequence[int], moduli: Sequence[int]
) -> list[int] | None:
    """Solve A*x = b componentwise modulo ``moduli``.

    Row i is the congruence sum_j A[i][j]*x[j] = b[i] (mod moduli[i]); a
    modulus of 0 makes the row an exact equation over Z.  Returns None when
    the system has no solution.  The returned solution is canonical: the
    particular solution is reduced modulo the lattice of homogeneous
    solutions, which for all-nonzero moduli pins every coordinate to a
    nonnegative representative.
    """
    if len(b) != a.rows or len(moduli) != a.rows:
        raise InputError("solve_mod: b and moduli must have one entry per row")
    mods = [int(m) for m in moduli]
    if any(m < 0 for m in mods):
        raise InputError("solve_mod: moduli must be nonnegative")
    n, r = a.cols, a.rows
    # Augment with one slack column per congruence row: A*x + diag(m)*y = b.
    rows = []
    for i in range(r):
        rows.append(list(a.row(i)) + [mods[i] if k == i else 0 for k in range(r)])
    c = IntMatrix.from_rows(rows, cols=n + r)
    z0, kernel = _solve_integer(c, b)
    if z0 is None:
        return None
    x0 = z0[:n]
    projected = [vec[:n] for vec in kernel]
    hnf = _row_hnf([p for p in projected if any(p)], n)
    return _coset_reduce(x0, hnf)


def kernel_basis(a: IntMatrix) -> list[list[int]]:
    """Basis vectors of the integer kernel {x : A*x = 0}."""
    _, basis = _solve_integer(a, [0] * a.rows)
    return [vec for vec in basis if any(vec)]


def invert_unimodular(v: IntMatrix) -> IntMatrix:
    """Exact inverse of an integer matrix with determinant +-1."""
    if v.rows != v.cols:
        raise InputError("only square matrices can be inverted")
    n = v.rows
    cols = []
    zeros = [0] * n
    for j in range(n):
        e = [1 if i == j else 0 for i in range(n)]
        col = solve_mod(v, e, zeros)
        if col is None:
            raise InputError("matrix is not invertible over the integers")
        cols.append(col)
    return IntMatrix.from_rows(
        [[cols[j][i] for j in range(n)] for i in range(n)], cols=n
    )
