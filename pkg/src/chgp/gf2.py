"""Dense bit-packed GF(2) linear algebra.

Matrices are stored row-major with 64 columns packed per uint64 word
(column j sits at bit j % 64 of word j // 64).  All operations are pure:
a BitMatrix is never mutated after construction, so values can be shared
freely between threads and processes.

Elimination uses leftmost-column-first pivoting throughout, which makes
rank, kernel bases and reduced row-echelon forms deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_WORD = 64


def _n_words(cols: int) -> int:
    return (cols + _WORD - 1) // _WORD


class BitMatrix:
    """Immutable dense binary matrix with bit-packed rows.

    Attributes:
        rows: Number of rows.
        cols: Number of columns.
        words: uint64 array of shape (rows, ceil(cols/64)) holding the
            packed entries.  Treated as read-only.
    """

    __slots__ = ("rows", "cols", "words")

    def __init__(self, rows: int, cols: int, words: np.ndarray | None = None):
        if rows < 0 or cols < 0:
            raise ValueError(f"invalid shape ({rows}, {cols})")
        self.rows = rows
        self.cols = cols
        if words is None:
            words = np.zeros((rows, _n_words(cols)), dtype=np.uint64)
        if words.shape != (rows, _n_words(cols)):
            raise ValueError(f"word buffer shape {words.shape} does not match ({rows}, {cols})")
        words.flags.writeable = False
        self.words = words

    # ── constructors ────────────────────────────────────────────────

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BitMatrix":
        return cls(rows, cols)

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        words = np.zeros((n, _n_words(n)), dtype=np.uint64)
        i = np.arange(n)
        words[i, i // _WORD] = np.uint64(1) << (i % _WORD).astype(np.uint64)
        return cls(n, n, words)

    @classmethod
    def from_dense(cls, arr) -> "BitMatrix":
        """Build from a 2-D array-like of 0/1 entries."""
        dense = np.asarray(arr, dtype=np.uint8) % 2
        if dense.ndim != 2:
            raise ValueError("from_dense expects a 2-D array")
        rows, cols = dense.shape
        nw = _n_words(cols)
        padded = np.zeros((rows, nw * _WORD), dtype=np.uint8)
        padded[:, :cols] = dense
        packed = np.packbits(padded, axis=1, bitorder="little")
        words = packed.view(np.uint64).reshape(rows, nw).copy()
        return cls(rows, cols, words)

    @classmethod
    def from_row_ints(cls, rows: int, cols: int, ints) -> "BitMatrix":
        """Build from per-row Python integers (bit j of the int = column j)."""
        if cols > 0 and any(v >> cols for v in ints):
            raise ValueError("row integer has bits beyond the column count")
        nw = _n_words(cols)
        words = np.zeros((rows, nw), dtype=np.uint64)
        for i, v in enumerate(ints):
            for w in range(nw):
                words[i, w] = (v >> (_WORD * w)) & 0xFFFFFFFFFFFFFFFF
        return cls(rows, cols, words)

    # ── accessors ───────────────────────────────────────────────────

    def get(self, i: int, j: int) -> int:
        """Entry (i, j); raises IndexError outside [0, rows) x [0, cols)."""
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(f"index ({i}, {j}) out of range for {self.rows}x{self.cols} matrix")
        return int((self.words[i, j // _WORD] >> np.uint64(j % _WORD)) & np.uint64(1))

    def to_dense(self) -> np.ndarray:
        """Unpack to a (rows, cols) uint8 array."""
        if self.rows == 0:
            return np.zeros((0, self.cols), dtype=np.uint8)
        as_bytes = self.words.reshape(self.rows, -1).view(np.uint8)
        bits = np.unpackbits(as_bytes, axis=1, bitorder="little")
        return bits[:, : self.cols].copy()

    def row_ints(self) -> list[int]:
        """Each row as a Python integer (bit j = column j)."""
        out = []
        for i in range(self.rows):
            v = 0
            for w in range(self.words.shape[1] - 1, -1, -1):
                v = (v << _WORD) | int(self.words[i, w])
            out.append(v)
        return out

    def row_weights(self) -> np.ndarray:
        return np.bitwise_count(self.words).sum(axis=1).astype(np.int64)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BitMatrix)
            and self.shape == other.shape
            and np.array_equal(self.words, other.words)
        )

    def __repr__(self) -> str:
        return f"BitMatrix({self.rows}x{self.cols})"

    # ── plain-text serialization (CLI debug dumps) ──────────────────

    def to_text(self) -> str:
        """First line "rows cols", then one 0/1 string per row."""
        dense = self.to_dense()
        lines = [f"{self.rows} {self.cols}"]
        lines.extend("".join("1" if b else "0" for b in row) for row in dense)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "BitMatrix":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        rows, cols = (int(t) for t in lines[0].split())
        if len(lines) - 1 != rows:
            raise ValueError(f"expected {rows} rows, got {len(lines) - 1}")
        dense = np.zeros((rows, cols), dtype=np.uint8)
        for i, ln in enumerate(lines[1:]):
            ln = ln.strip()
            if len(ln) != cols:
                raise ValueError(f"row {i} has {len(ln)} entries, expected {cols}")
            dense[i] = [1 if ch == "1" else 0 for ch in ln]
        return cls.from_dense(dense)


@dataclass(frozen=True)
class CyclicPoly:
    """Univariate polynomial over GF(2) as a support set of exponents mod n.

    ``support`` is the set of exponents with coefficient 1; it is stored
    sorted and must be nonempty with every exponent in [0, modulus).
    """

    modulus: int
    support: tuple[int, ...]

    def __post_init__(self):
        if self.modulus < 1:
            raise ValueError(f"modulus must be positive, got {self.modulus}")
        supp = tuple(sorted(set(int(e) for e in self.support)))
        if len(supp) != len(self.support):
            raise ValueError(f"support {self.support} contains duplicates")
        if not supp:
            raise ValueError("support must be nonempty (weight >= 1)")
        if supp[0] < 0 or supp[-1] >= self.modulus:
            raise ValueError(f"support {supp} not contained in [0, {self.modulus})")
        object.__setattr__(self, "support", supp)

    @property
    def weight(self) -> int:
        return len(self.support)

    def mask(self) -> int:
        """Support as an integer bitmask (also the polynomial's coefficient bits)."""
        m = 0
        for e in self.support:
            m |= 1 << e
        return m

    def shifted(self, c: int) -> "CyclicPoly":
        """Multiply by x^c: every exponent advances by c mod n."""
        n = self.modulus
        return CyclicPoly(n, tuple((e + c) % n for e in self.support))

    def reversed(self) -> "CyclicPoly":
        """Exponent negation e -> -e mod n (the transpose circulant's polynomial)."""
        n = self.modulus
        return CyclicPoly(n, tuple((-e) % n for e in self.support))

    def __str__(self) -> str:
        return f"poly(n={self.modulus}, {{{','.join(map(str, self.support))}}})"


# ── core operations ─────────────────────────────────────────────────


def circulant_matrix(p: CyclicPoly) -> BitMatrix:
    """n x n circulant with entry (i, j) = 1 iff (j - i) mod n is in the support.

    Every row and column has weight equal to the polynomial weight.
    """
    n = p.modulus
    dense = np.zeros((n, n), dtype=np.uint8)
    cols = np.array(p.support, dtype=np.int64)
    for i in range(n):
        dense[i, (cols + i) % n] = 1
    return BitMatrix.from_dense(dense)


def _eliminate(words: np.ndarray, rows: int, cols: int, full: bool) -> list[int]:
    """In-place packed Gaussian elimination, leftmost column first.

    Returns the pivot column list.  With ``full`` the result is the
    reduced row-echelon form (entries above pivots cleared too).
    """
    pivots: list[int] = []
    pr = 0
    one = np.uint64(1)
    for c in range(cols):
        if pr >= rows:
            break
        w, b = divmod(c, _WORD)
        bshift = np.uint64(b)
        col = (words[pr:, w] >> bshift) & one
        nz = np.nonzero(col)[0]
        if nz.size == 0:
            continue
        piv = pr + int(nz[0])
        if piv != pr:
            words[[pr, piv]] = words[[piv, pr]]
        if full:
            hit = ((words[:, w] >> bshift) & one).astype(bool)
            hit[pr] = False
        else:
            hit = np.zeros(rows, dtype=bool)
            below = ((words[pr + 1 :, w] >> bshift) & one).astype(bool)
            hit[pr + 1 :] = below
        if hit.any():
            words[hit] ^= words[pr]
        pivots.append(c)
        pr += 1
    return pivots


def row_reduce(M: BitMatrix) -> tuple[BitMatrix, list[int]]:
    """Reduced row-echelon form over GF(2) and its pivot columns."""
    words = M.words.copy()
    pivots = _eliminate(words, M.rows, M.cols, full=True)
    return BitMatrix(M.rows, M.cols, words), pivots


def gf2_rank(M: BitMatrix) -> int:
    """Rank over GF(2) by in-place elimination."""
    words = M.words.copy()
    return len(_eliminate(words, M.rows, M.cols, full=False))


def kernel_basis(M: BitMatrix) -> list[np.ndarray]:
    """Basis of the right null space {v : M v = 0}.

    Returns ``cols - rank`` uint8 vectors, one per free column of the
    reduced row-echelon form, in ascending free-column order.  Each basis
    vector has a 1 at its own free column and 0 at every other free
    column, so the basis is in "standard" (systematic) form.
    """
    R, pivots = row_reduce(M)
    dense = R.to_dense()
    pivot_set = set(pivots)
    free = [c for c in range(M.cols) if c not in pivot_set]
    basis = []
    for f in free:
        v = np.zeros(M.cols, dtype=np.uint8)
        v[f] = 1
        for r, pc in enumerate(pivots):
            if dense[r, f]:
                v[pc] = 1
        basis.append(v)
    return basis


def transpose(M: BitMatrix) -> BitMatrix:
    return BitMatrix.from_dense(M.to_dense().T)


def kron(A: BitMatrix, B: BitMatrix) -> BitMatrix:
    """Kronecker product over GF(2); shape (rA*rB, cA*cB)."""
    rows = A.rows * B.rows
    cols = A.cols * B.cols
    if rows * cols > 2**34:
        raise ValueError(f"Kronecker product dimension {rows}x{cols} too large")
    dense = np.kron(A.to_dense(), B.to_dense())
    return BitMatrix.from_dense(dense)


def matmul_gf2(A: BitMatrix, B: BitMatrix) -> BitMatrix:
    """Matrix product over GF(2); inner dimensions must agree."""
    if A.cols != B.rows:
        raise ValueError(f"dimension mismatch: {A.shape} @ {B.shape}")
    # For each row of A, XOR together the rows of B selected by its support.
    out = np.zeros((A.rows, B.words.shape[1]), dtype=np.uint64)
    a_dense = A.to_dense().astype(bool)
    bw = B.words
    for i in range(A.rows):
        sel = a_dense[i]
        if sel.any():
            out[i] = np.bitwise_xor.reduce(bw[sel], axis=0)
    return BitMatrix(A.rows, B.cols, out)


def matvec_gf2(M: BitMatrix, v: np.ndarray) -> np.ndarray:
    """M v over GF(2) for a length-cols 0/1 vector; returns uint8."""
    v = np.asarray(v, dtype=np.uint8) % 2
    if v.shape != (M.cols,):
        raise ValueError(f"vector length {v.shape} does not match cols {M.cols}")
    sel = v.astype(bool)
    if not sel.any():
        return np.zeros(M.rows, dtype=np.uint8)
    acc = np.bitwise_xor.reduce(M.to_dense()[:, sel], axis=1)
    return acc.astype(np.uint8)


def hstack(A: BitMatrix, B: BitMatrix) -> BitMatrix:
    if A.rows != B.rows:
        raise ValueError(f"row mismatch: {A.shape} | {B.shape}")
    return BitMatrix.from_dense(np.hstack([A.to_dense(), B.to_dense()]))


def is_zero(M: BitMatrix) -> bool:
    return not M.words.any()


# ── small-width fast path (cols <= 63, rows as Python ints) ─────────


def eliminate_ints(row_ints: list[int], cols: int, full: bool = False) -> tuple[list[int], list[int]]:
    """Gaussian elimination on integer-packed rows; same pivot order as
    :func:`_eliminate`.  Returns (reduced rows, pivot columns).

    Used by the cyclic-code search where every matrix fits one word per
    row; cross-checked against the BitMatrix path in the tests.
    """
    rows = list(row_ints)
    m = len(rows)
    pivots: list[int] = []
    pr = 0
    for c in range(cols):
        if pr >= m:
            break
        bit = 1 << c
        piv = -1
        for r in range(pr, m):
            if rows[r] & bit:
                piv = r
                break
        if piv < 0:
            continue
        rows[pr], rows[piv] = rows[piv], rows[pr]
        prow = rows[pr]
        rng = range(m) if full else range(pr + 1, m)
        for r in rng:
            if r != pr and rows[r] & bit:
                rows[r] ^= prow
        pivots.append(c)
        pr += 1
    return rows, pivots


def kernel_ints(row_ints: list[int], cols: int) -> list[int]:
    """Kernel basis of an integer-packed matrix, vectors as integers.

    Same systematic construction and ordering as :func:`kernel_basis`.
    """
    rows, pivots = eliminate_ints(row_ints, cols, full=True)
    pivot_set = set(pivots)
    basis = []
    for f in range(cols):
        if f in pivot_set:
            continue
        v = 1 << f
        fbit = 1 << f
        for r, pc in enumerate(pivots):
            if rows[r] & fbit:
                v |= 1 << pc
        basis.append(v)
    return basis


def poly_mod(a: int, b: int) -> int:
    """Remainder of a by b in GF(2)[x], polynomials as coefficient bitmasks."""
    if b == 0:
        raise ZeroDivisionError("polynomial modulus by zero")
    db = b.bit_length()
    while a.bit_length() >= db:
        a ^= b << (a.bit_length() - db)
    return a


def poly_gcd(a: int, b: int) -> int:
    """GCD of two GF(2)[x] polynomials given as coefficient bitmasks."""
    while b:
        a, b = b, poly_mod(a, b)
    return a
