"""Exact rational and modular linear algebra.

Matrices hold ``fractions.Fraction`` entries.  Ranks and nullspaces are exact:
the elimination core is fraction-free (Bareiss) Gaussian elimination on
integers obtained by clearing row denominators, with row pivots chosen by
minimal bit length to bound coefficient growth.  A modular rank over a prime
field gives a fast lower bound; for primes below 2**31 the mod-p elimination
is vectorized with numpy (products of two entries fit in int64).

Conventions for degenerate shapes: an empty matrix has rank 0, and the kernel
of a 0 x k matrix is the full space (k unit vectors).
"""
from __future__ import annotations

import json
from fractions import Fraction
from math import lcm

import numpy as np

try:
    from gmpy2 import mpz
except ImportError:  # pragma: no cover - gmpy2 is a declared dependency
    mpz = int

from .errors import DimensionError, PrimeCollisionError, SingularMatrixError

#: Default prime for modular rank checks: fixed 62-bit prime (2**62 - 57).
DEFAULT_PRIME = 4611686018427387847

#: 31-bit prime (2**31 - 1) used by the vectorized elimination path.
FAST_PRIME = 2147483647

#: Sparse matrices denser than this are converted to dense before elimination.
DENSITY_CUTOFF = 0.20

#: Matrices with fewer columns than this are always eliminated densely.
MIN_SPARSE_COLS = 64

_ZERO = Fraction(0)
_ONE = Fraction(1)


def rat_str(q: Fraction) -> str:
    """Serialize a rational as an explicit "num/den" string."""
    return f"{q.numerator}/{q.denominator}"


def parse_rat(s: str) -> Fraction:
    return Fraction(s)


class MatQ:
    """Dense rational matrix, stored as a row-major list of rows."""

    __slots__ = ("rows", "cols", "data")

    def __init__(self, data, cols: int | None = None):
        self.data = [[x if isinstance(x, Fraction) else Fraction(x) for x in row] for row in data]
        self.rows = len(self.data)
        if self.rows:
            self.cols = len(self.data[0])
            if any(len(row) != self.cols for row in self.data):
                raise DimensionError("ragged rows in matrix data")
            if cols is not None and cols != self.cols:
                raise DimensionError(f"cols={cols} does not match row length {self.cols}")
        else:
            self.cols = 0 if cols is None else cols

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "MatQ":
        return cls([[_ZERO] * cols for _ in range(rows)], cols=cols)

    @classmethod
    def identity(cls, n: int) -> "MatQ":
        m = cls.zeros(n, n)
        for i in range(n):
            m.data[i][i] = _ONE
        return m

    def copy(self) -> "MatQ":
        return MatQ([row[:] for row in self.data], cols=self.cols)

    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def transpose(self) -> "MatQ":
        return MatQ([[self.data[i][j] for i in range(self.rows)] for j in range(self.cols)],
                    cols=self.rows)

    def is_zero(self) -> bool:
        return all(x == 0 for row in self.data for x in row)

    def __eq__(self, other) -> bool:
        if isinstance(other, SparseMatQ):
            other = other.to_dense()
        if not isinstance(other, MatQ):
            return NotImplemented
        return self.rows == other.rows and self.cols == other.cols and self.data == other.data

    def __hash__(self):
        return hash((self.rows, self.cols, tuple(tuple(r) for r in self.data)))

    def __add__(self, other: "MatQ") -> "MatQ":
        self._same_shape(other)
        return MatQ([[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self.data, other.data)],
                    cols=self.cols)

    def __sub__(self, other: "MatQ") -> "MatQ":
        self._same_shape(other)
        return MatQ([[a - b for a, b in zip(ra, rb)] for ra, rb in zip(self.data, other.data)],
                    cols=self.cols)

    def __neg__(self) -> "MatQ":
        return MatQ([[-a for a in row] for row in self.data], cols=self.cols)

    def scale(self, q) -> "MatQ":
        q = Fraction(q)
        return MatQ([[q * a for a in row] for row in self.data], cols=self.cols)

    def __matmul__(self, other: "MatQ") -> "MatQ":
        if self.cols != other.rows:
            raise DimensionError(f"cannot multiply {self.shape()} by {other.shape()}")
        bt = other.transpose().data
        return MatQ(
            [[sum((a * b for a, b in zip(row, col) if a and b), _ZERO) for col in bt]
             for row in self.data],
            cols=other.cols,
        )

    def _same_shape(self, other: "MatQ") -> None:
        if self.shape() != other.shape():
            raise DimensionError(f"shape mismatch: {self.shape()} vs {other.shape()}")

    def to_sparse(self) -> "SparseMatQ":
        entries = [
            (i, j, v)
            for i, row in enumerate(self.data)
            for j, v in enumerate(row)
            if v
        ]
        return SparseMatQ(self.rows, self.cols, entries, validate=False)

    def __repr__(self):
        return f"MatQ({self.rows}x{self.cols})"

    def pretty(self) -> str:
        cells = [[str(v) for v in row] for row in self.data]
        width = max((len(c) for row in cells for c in row), default=1)
        return "\n".join("[" + " ".join(c.rjust(width) for c in row) + "]" for row in cells)


class SparseMatQ:
    """Rational matrix in triplet form: (row, col, value), value nonzero.

    Entries are kept sorted row-major; duplicate positions are rejected.
    """

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, rows: int, cols: int, entries, *, validate: bool = True):
        self.rows = rows
        self.cols = cols
        ents = []
        for (r, c, v) in entries:
            if not isinstance(v, Fraction):
                v = Fraction(v)
            if v:
                ents.append((r, c, v))
        ents.sort(key=lambda e: (e[0], e[1]))
        if validate:
            seen = set()
            for (r, c, _v) in ents:
                if not (0 <= r < rows and 0 <= c < cols):
                    raise DimensionError(f"entry ({r},{c}) outside {rows}x{cols}")
                if (r, c) in seen:
                    raise ValueError(f"duplicate entry at ({r},{c})")
                seen.add((r, c))
        self.entries = ents

    @classmethod
    def from_dense(cls, m: MatQ) -> "SparseMatQ":
        return m.to_sparse()

    def to_dense(self) -> MatQ:
        m = MatQ.zeros(self.rows, self.cols)
        for (r, c, v) in self.entries:
            m.data[r][c] = v
        return m

    @property
    def nnz(self) -> int:
        return len(self.entries)

    def density(self) -> float:
        total = self.rows * self.cols
        return len(self.entries) / total if total else 0.0

    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def __eq__(self, other) -> bool:
        if isinstance(other, MatQ):
            other = other.to_sparse()
        if not isinstance(other, SparseMatQ):
            return NotImplemented
        return (self.rows, self.cols, self.entries) == (other.rows, other.cols, other.entries)

    def __hash__(self):
        return hash((self.rows, self.cols, tuple(self.entries)))

    def __repr__(self):
        return f"SparseMatQ({self.rows}x{self.cols}, nnz={self.nnz})"


# ---------------------------------------------------------------------------
# elimination cores


def _shape(m) -> tuple[int, int]:
    if isinstance(m, (MatQ, SparseMatQ)):
        return m.rows, m.cols
    raise TypeError(f"expected MatQ or SparseMatQ, got {type(m).__name__}")


def _use_sparse_path(m) -> bool:
    return (
        isinstance(m, SparseMatQ)
        and m.cols >= MIN_SPARSE_COLS
        and m.density() <= DENSITY_CUTOFF
    )


def _int_rows_dense(m) -> list[list]:
    """Rows with denominators cleared (per-row lcm), as big integers."""
    if isinstance(m, SparseMatQ):
        m = m.to_dense()
    out = []
    for row in m.data:
        scale = lcm(*(v.denominator for v in row)) if row else 1
        out.append([mpz(v.numerator * (scale // v.denominator)) for v in row])
    return out

def _int_rows_sparse(m: SparseMatQ) -> list[dict]:
    """Row dictionaries col -> integer, denominators cleared per row."""
    rows: list[dict] = [dict() for _ in range(m.rows)]
    dens: list[int] = [1] * m.rows
    for (r, _c, v) in m.entries:
        dens[r] = lcm(dens[r], v.denominator)
    for (r, c, v) in m.entries:
        rows[r][c] = mpz(v.numerator * (dens[r] // v.denominator))
    return rows


def _pick_pivot_dense(mat, col, start, nrows):
    best = None
    best_bits = None
    for i in range(start, nrows):
        v = mat[i][col]
        if v:
            bits = int(abs(v)).bit_length()
            if best is None or bits < best_bits:
                best, best_bits = i, bits
    return best


def _bareiss_echelon_dense(mat, nrows, ncols):
    """In-place fraction-free row echelon reduction.

    Returns the list of pivot columns; on exit the first len(pivots) rows of
    ``mat`` form the integer echelon.
    """
    pivots = []
    r = 0
    prev = mpz(1)
    for c in range(ncols):
        if r == nrows:
            break
        p = _pick_pivot_dense(mat, c, r, nrows)
        if p is None:
            continue
        if p != r:
            mat[r], mat[p] = mat[p], mat[r]
        piv = mat[r][c]
        prow = mat[r]
        for i in range(r + 1, nrows):
            row = mat[i]
            f = row[c]
            if f:
                for j in range(c + 1, ncols):
                    row[j] = (piv * row[j] - f * prow[j]) // prev
                row[c] = mpz(0)
            elif prev != 1 or piv != 1:
                for j in range(c + 1, ncols):
                    if row[j]:
                        row[j] = (piv * row[j]) // prev
        prev = piv
        pivots.append(c)
        r += 1
    return pivots


def _bareiss_echelon_sparse(rows, ncols):
    """Fraction-free echelon on row dictionaries (col -> nonzero integer).

    Returns (pivot columns, echelon rows as dicts).  Zero entries are never
    stored, so rows untouched by a pivot column only rescale their support.
    """
    active = [d for d in rows]
    pivots = []
    echelon = []
    prev = mpz(1)
    for c in range(ncols):
        if not active:
            break
        cand = [i for i, d in enumerate(active) if c in d]
        if not cand:
            continue
        p = min(cand, key=lambda i: int(abs(active[i][c])).bit_length())
        prow = active.pop(p)
        piv = prow[c]
        nxt = []
        for d in active:
            f = d.pop(c, None)
            if f is None:
                if prev != 1 or piv != 1:
                    for j in list(d):
                        d[j] = (piv * d[j]) // prev
            else:
                keys = set(d) | set(prow)
                keys.discard(c)
                for j in keys:
                    v = (piv * d.get(j, 0) - f * prow.get(j, 0)) // prev
                    if v:
                        d[j] = v
                    else:
                        d.pop(j, None)
            if d:
                nxt.append(d)
        active = nxt
        prev = piv
        pivots.append(c)
        echelon.append(prow)
    return pivots, echelon


def bareiss_rank(m) -> int:
    """Exact rank over the rationals by fraction-free elimination."""
    nrows, ncols = _shape(m)
    if nrows == 0 or ncols == 0:
        return 0
    if _use_sparse_path(m):
        pivots, _ = _bareiss_echelon_sparse(_int_rows_sparse(m), ncols)
        return len(pivots)
    mat = _int_rows_dense(m)
    return len(_bareiss_echelon_dense(mat, nrows, ncols))


def kernel_basis(m) -> list[list[Fraction]]:
    """Basis of the right nullspace, in the canonical reduced-echelon
    parametrization: one vector per free column (in increasing column order),
    with that free coordinate set to 1."""
    nrows, ncols = _shape(m)
    if ncols == 0:
        return []
    if nrows == 0:
        pivots: list[int] = []
        ech_rows: list[dict] = []
    elif _use_sparse_path(m):
        pivots, ech_rows = _bareiss_echelon_sparse(_int_rows_sparse(m), ncols)
    else:
        mat = _int_rows_dense(m)
        pivots = _bareiss_echelon_dense(mat, nrows, ncols)
        ech_rows = [
            {j: v for j, v in enumerate(mat[i]) if v} for i in range(len(pivots))
        ]
    pivot_set = set(pivots)
    free_cols = [c for c in range(ncols) if c not in pivot_set]
    basis = []
    for f in free_cols:
        v = [_ZERO] * ncols
        v[f] = _ONE
        for i in reversed(range(len(pivots))):
            c = pivots[i]
            row = ech_rows[i]
            s = _ZERO
            for j, coeff in row.items():
                if j > c and v[j]:
                    s += v[j] * int(coeff)
            if s:
                v[c] = -s / int(row[c])
        basis.append(v)
    return basis


def _check_prime(p: int) -> None:
    if not is_probable_prime(p):
        raise ValueError(f"{p} is not prime")


def _mod_entry(v: Fraction, p: int) -> int:
    den = v.denominator % p
    if den == 0:
        raise PrimeCollisionError(f"denominator divisible by prime {p}")
    if den == 1:
        return v.numerator % p
    return v.numerator % p * pow(den, p - 2, p) % p


def _mod_rows(m, p: int) -> list[list[int]]:
    nrows, ncols = _shape(m)
    if isinstance(m, SparseMatQ):
        rows = [[0] * ncols for _ in range(nrows)]
        for (r, c, v) in m.entries:
            rows[r][c] = _mod_entry(v, p)
        return rows
    return [[_mod_entry(v, p) for v in row] for row in m.data]


def _modular_rank_numpy(rows_mod, nrows, ncols, p) -> int:
    mat = np.array(rows_mod, dtype=np.int64)
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        nz = np.nonzero(mat[r:, c])[0]
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            mat[[r, piv]] = mat[[piv, r]]
        inv = pow(int(mat[r, c]), p - 2, p)
        below = mat[r + 1:, c:]
        f = (mat[r + 1:, c] * inv) % p
        below[...] = (below - f[:, None] * mat[r, c:]) % p
        r += 1
    return r


def _modular_rank_python(rows_mod, nrows, ncols, p) -> int:
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        piv = None
        for i in range(r, nrows):
            if rows_mod[i][c]:
                piv = i
                break
        if piv is None:
            continue
        if piv != r:
            rows_mod[r], rows_mod[piv] = rows_mod[piv], rows_mod[r]
        inv = pow(rows_mod[r][c], p - 2, p)
        prow = rows_mod[r]
        for i in range(r + 1, nrows):
            if rows_mod[i][c]:
                f = rows_mod[i][c] * inv % p
                row = rows_mod[i]
                rows_mod[i] = [(a - f * b) % p for a, b in zip(row, prow)]
        r += 1
    return r


def modular_rank(m, p: int = DEFAULT_PRIME) -> int:
    """Rank of the image of m over the field with p elements.

    Always a lower bound for the exact rank.  Raises PrimeCollisionError when
    p divides a stored denominator (redraw the prime in that case).
    """
    _check_prime(p)
    nrows, ncols = _shape(m)
    if nrows == 0 or ncols == 0:
        return 0
    rows_mod = _mod_rows(m, p)
    if p < 2**31:
        return _modular_rank_numpy(rows_mod, nrows, ncols, p)
    return _modular_rank_python(rows_mod, nrows, ncols, p)


def inverse(m: MatQ) -> MatQ:
    """Exact inverse by Gauss-Jordan elimination."""
    if isinstance(m, SparseMatQ):
        m = m.to_dense()
    if m.rows != m.cols:
        raise DimensionError(f"cannot invert a {m.rows}x{m.cols} matrix")
    n = m.rows
    a = [row[:] for row in m.data]
    b = [row[:] for row in MatQ.identity(n).data]
    for c in range(n):
        piv = next((i for i in range(c, n) if a[i][c]), None)
        if piv is None:
            raise SingularMatrixError("matrix is singular")
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            b[c], b[piv] = b[piv], b[c]
        inv_p = 1 / a[c][c]
        a[c] = [x * inv_p for x in a[c]]
        b[c] = [x * inv_p for x in b[c]]
        for i in range(n):
            if i != c and a[i][c]:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
                b[i] = [x - f * y for x, y in zip(b[i], b[c])]
    return MatQ(b)


# ---------------------------------------------------------------------------
# primality (deterministic Miller-Rabin for anything below 3.3e24)

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_probable_prime(n: int) -> bool:
    if n < 2:
        return False
    for q in _MR_BASES:
        if n % q == 0:
            return n == q
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def next_prime(n: int) -> int:
    """Smallest prime strictly greater than n."""
    k = n + 1
    if k <= 2:
        return 2
    if k % 2 == 0:
        k += 1
    while not is_probable_prime(k):
        k += 2
    return k


# ---------------------------------------------------------------------------
# export / import

MM_HEADER = b"%%MatrixMarket matrix coordinate integer general"
_SCALE_TAG = b"% denominators-cleared-by "


def export_matrix(m, fmt: str) -> bytes:
    """Serialize a matrix.

    "matrix-market": coordinate integer format, 1-based indices, entries
    sorted row-major.  Denominators are cleared by the global lcm first; a
    scale other than 1 is recorded in a comment line so that import can undo
    it.  "json": {"rows", "cols", "entries": [[r, c, "num/den"], ...]} with
    0-based indices.
    """
    sp = m.to_sparse() if isinstance(m, MatQ) else m
    if fmt == "matrix-market":
        scale = 1
        for (_r, _c, v) in sp.entries:
            scale = lcm(scale, v.denominator)
        lines = [MM_HEADER]
        if scale != 1:
            lines.append(_SCALE_TAG + str(scale).encode())
        lines.append(f"{sp.rows} {sp.cols} {sp.nnz}".encode())
        for (r, c, v) in sp.entries:
            lines.append(f"{r + 1} {c + 1} {v.numerator * (scale // v.denominator)}".encode())
        return b"\n".join(lines) + b"\n"
    if fmt == "json":
        obj = {
            "rows": sp.rows,
            "cols": sp.cols,
            "entries": [[r, c, rat_str(v)] for (r, c, v) in sp.entries],
        }
        return json.dumps(obj, indent=2, sort_keys=True).encode() + b"\n"
    raise ValueError(f"unknown matrix format {fmt!r}")


def import_matrix(data, fmt: str) -> SparseMatQ:
    if isinstance(data, bytes):
        data = data.decode()
    if fmt == "matrix-market":
        scale = 1
        size_line = None
        entries = []
        for raw in data.splitlines():
            line = raw.strip()
            if not line:
                continue
            if line.startswith("%"):
                if line.encode().startswith(_SCALE_TAG):
                    scale = int(line[len(_SCALE_TAG):])
                continue
            parts = line.split()
            if size_line is None:
                size_line = (int(parts[0]), int(parts[1]), int(parts[2]))
                continue
            r, c, v = int(parts[0]), int(parts[1]), int(parts[2])
            entries.append((r - 1, c - 1, Fraction(v, scale)))
        if size_line is None:
            raise ValueError("matrix-market data has no size line")
        rows, cols, nnz = size_line
        if nnz != len(entries):
            raise ValueError(f"expected {nnz} entries, found {len(entries)}")
        return SparseMatQ(rows, cols, entries)
    if fmt == "json":
        obj = json.loads(data)
        entries = [(int(r), int(c), parse_rat(v)) for (r, c, v) in obj["entries"]]
        return SparseMatQ(int(obj["rows"]), int(obj["cols"]), entries)
    raise ValueError(f"unknown matrix format {fmt!r}")
