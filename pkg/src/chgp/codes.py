"""Hypergraph products of cyclic codes: construction, parameters, logicals.

A code here is the hypergraph product of two circulants, with parity
checks

    H_X = [A (x) I_b | I_a (x) B]        H_Z = [I_a (x) B^T | A^T (x) I_b]

over n = 2ab qubits.  The left block of columns (indices < ab) carries
qubits (0, j, k) and the right block qubits (1, j, k), with linear index
u = ab*i + b*j + k.  Three families are built: the general two-seed
product (CxC), the product of a seed with itself (C2), and the product
with a repetition code of length equal to the seed distance (CxR).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cyclic import DEFAULT_ENUMERATION_CAP, classical_params, min_distance
from .gf2 import (
    BitMatrix,
    CyclicPoly,
    circulant_matrix,
    gf2_rank,
    hstack,
    is_zero,
    kernel_basis,
    kron,
    matmul_gf2,
    matvec_gf2,
    row_reduce,
    transpose,
)


class CssCommutationError(Exception):
    """H_X . H_Z^T != 0: impossible for valid inputs, signals a bug."""


@dataclass(frozen=True)
class CxcCode:
    a: int
    b: int
    poly_a: CyclicPoly
    poly_b: CyclicPoly
    family: str
    h_x: BitMatrix
    h_z: BitMatrix

    @property
    def n(self) -> int:
        return 2 * self.a * self.b

    @property
    def omega(self) -> int:
        return self.poly_a.weight + self.poly_b.weight

    def label(self) -> str:
        p = code_params(self)
        d = "?" if p.d is None else p.d
        return f"[[{p.n},{p.k},{d}]] ({self.family})"

    def __repr__(self) -> str:
        return (
            f"CxcCode({self.family}, a={self.a}, b={self.b}, "
            f"A={list(self.poly_a.support)}, B={list(self.poly_b.support)})"
        )


@dataclass(frozen=True)
class CodeParams:
    n: int
    k: int
    d: int | None
    r_a: int
    r_b: int
    stabilizer_rank: int
    omega: int


@dataclass(frozen=True)
class LogicalBasis:
    """k anticommuting X/Z logical pairs; pairing normalized to identity.

    ``x_ops`` and ``z_ops`` are (k, 2ab) uint8 arrays; row i of each
    forms pair i.
    """

    x_ops: np.ndarray
    z_ops: np.ndarray
    pairing: np.ndarray


@dataclass(frozen=True)
class BalanceReport:
    rank_x: int
    rank_z: int
    expected_rank: int
    row_weights_x: np.ndarray
    row_weights_z: np.ndarray
    omega: int

    @property
    def balanced(self) -> bool:
        return (
            self.rank_x == self.rank_z == self.expected_rank
            and (self.row_weights_x == self.omega).all()
            and (self.row_weights_z == self.omega).all()
        )


# ── builders ─────────────────────────────────────────────────────────


def build_cxc(
    a: int, b: int, poly_a: CyclicPoly, poly_b: CyclicPoly, family: str = "CxC"
) -> CxcCode:
    """Hypergraph product of circulant(poly_a) with circulant(poly_b)."""
    if poly_a.modulus != a or poly_b.modulus != b:
        raise ValueError(
            f"polynomial moduli ({poly_a.modulus}, {poly_b.modulus}) do not match (a, b) = ({a}, {b})"
        )
    A = circulant_matrix(poly_a)
    B = circulant_matrix(poly_b)
    Ia = BitMatrix.identity(a)
    Ib = BitMatrix.identity(b)
    h_x = hstack(kron(A, Ib), kron(Ia, B))
    h_z = hstack(kron(Ia, transpose(B)), kron(transpose(A), Ib))
    code = CxcCode(a, b, poly_a, poly_b, family, h_x, h_z)
    if not is_zero(matmul_gf2(h_x, transpose(h_z))):
        raise CssCommutationError(f"H_X . H_Z^T != 0 for {code!r}")
    return code


def build_c2(poly: CyclicPoly) -> CxcCode:
    """Product of a cyclic seed with itself: n = 2 n_c^2, k = 2 k_c^2, omega = 2w."""
    n_c = poly.modulus
    return build_cxc(n_c, n_c, poly, poly, family="C2")


def build_cxr(poly: CyclicPoly, cap: int = DEFAULT_ENUMERATION_CAP) -> CxcCode:
    """Product of a cyclic seed with the length-d_c repetition code.

    The repetition length is tied to the seed's distance so the product
    distance is not dragged below d_c; n = 2 n_c d_c, k = 2 k_c,
    omega = w + 2.
    """
    d_c = min_distance(poly, cap=cap)  # raises for k_c = 0 seeds
    rep = CyclicPoly(d_c, (0, 1))
    return build_cxc(poly.modulus, d_c, poly, rep, family="CxR")


# ── parameters and balance ───────────────────────────────────────────


def code_params(code: CxcCode, cap: int = DEFAULT_ENUMERATION_CAP) -> CodeParams:
    """Code parameters from the seed ranks and distances.

    The distance is the minimum of the two seed distances (never a
    quantum distance search); codes with k = 0 get d = None.
    """
    a, b = code.a, code.b
    r_a = a - len(kernel_basis(circulant_matrix(code.poly_a)))
    r_b = b - len(kernel_basis(circulant_matrix(code.poly_b)))
    k = 2 * (a - r_a) * (b - r_b)
    if k > 0:
        d_a = min_distance(code.poly_a, cap=cap)
        d_b = min_distance(code.poly_b, cap=cap)
        d = min(d_a, d_b)
    else:
        d = None
    return CodeParams(
        n=2 * a * b,
        k=k,
        d=d,
        r_a=r_a,
        r_b=r_b,
        stabilizer_rank=a * r_b + b * r_a - r_a * r_b,
        omega=code.omega,
    )


def balance_report(code: CxcCode) -> BalanceReport:
    """Measured X/Z stabilizer ranks and row weights against the formula."""
    p = code_params(code)
    return BalanceReport(
        rank_x=gf2_rank(code.h_x),
        rank_z=gf2_rank(code.h_z),
        expected_rank=p.stabilizer_rank,
        row_weights_x=code.h_x.row_weights(),
        row_weights_z=code.h_z.row_weights(),
        omega=code.omega,
    )


# ── logical operators ────────────────────────────────────────────────


def _free_cols(M: BitMatrix) -> list[int]:
    _, pivots = row_reduce(M)
    pivot_set = set(pivots)
    return [c for c in range(M.cols) if c not in pivot_set]


def logical_basis(code: CxcCode) -> LogicalBasis:
    """Deterministic X/Z logical bases with identity pairing.

    Logical classes factor into a left-block sector indexed by
    (free column of A) x (kernel vector of B^T) and a right-block sector
    indexed by (kernel vector of A^T) x (free column of B); the Z basis
    uses the transposed roles.  With systematic kernel bases the
    symplectic pairing of these representatives is already the identity,
    which is asserted after normalization.
    """
    a, b = code.a, code.b
    A = circulant_matrix(code.poly_a)
    B = circulant_matrix(code.poly_b)
    At, Bt = transpose(A), transpose(B)
    ker_a, ker_at = kernel_basis(A), kernel_basis(At)
    ker_b, ker_bt = kernel_basis(B), kernel_basis(Bt)
    free_a, free_at = _free_cols(A), _free_cols(At)
    free_b, free_bt = _free_cols(B), _free_cols(Bt)
    k = 2 * len(ker_a) * len(ker_b)
    if k == 0:
        raise ValueError("code has no logical qubits (k = 0)")
    ab = a * b
    n = 2 * ab

    def left_vec(col_vec_a: np.ndarray, col_vec_b: np.ndarray) -> np.ndarray:
        v = np.zeros(n, dtype=np.uint8)
        v[:ab] = np.kron(col_vec_a, col_vec_b)
        return v

    def right_vec(col_vec_a: np.ndarray, col_vec_b: np.ndarray) -> np.ndarray:
        v = np.zeros(n, dtype=np.uint8)
        v[ab:] = np.kron(col_vec_a, col_vec_b)
        return v

    def unit(size: int, idx: int) -> np.ndarray:
        e = np.zeros(size, dtype=np.uint8)
        e[idx] = 1
        return e

    x_ops = [left_vec(unit(a, f), g) for f in free_a for g in ker_bt]
    x_ops += [right_vec(c, unit(b, t)) for c in ker_at for t in free_b]
    z_ops = [left_vec(c, unit(b, t)) for c in ker_a for t in free_bt]
    z_ops += [right_vec(unit(a, f), g) for f in free_at for g in ker_b]
    X = np.array(x_ops, dtype=np.uint8)
    Z = np.array(z_ops, dtype=np.uint8)

    pairing = (X.astype(np.int64) @ Z.T.astype(np.int64)) % 2
    if not np.array_equal(pairing, np.eye(k, dtype=np.int64)):
        # Normalize: replace Z by (P^-1)^T Z over GF(2).
        pinv = _gf2_inverse(pairing.astype(np.uint8))
        Z = (pinv.T.astype(np.int64) @ Z.astype(np.int64) % 2).astype(np.uint8)
        pairing = (X.astype(np.int64) @ Z.T.astype(np.int64)) % 2
        if not np.array_equal(pairing, np.eye(k, dtype=np.int64)):
            raise RuntimeError("symplectic normalization failed (pairing not invertible)")
    return LogicalBasis(x_ops=X, z_ops=Z, pairing=pairing.astype(np.uint8))


def _gf2_inverse(P: np.ndarray) -> np.ndarray:
    k = P.shape[0]
    aug = BitMatrix.from_dense(np.hstack([P, np.eye(k, dtype=np.uint8)]))
    R, pivots = row_reduce(aug)
    if pivots[:k] != list(range(k)):
        raise ValueError("matrix not invertible over GF(2)")
    return R.to_dense()[:, k:]


def in_row_space(M: BitMatrix, v: np.ndarray) -> bool:
    """Whether v lies in the GF(2) row space of M."""
    R, pivots = row_reduce(M)
    dense = R.to_dense()
    w = np.asarray(v, dtype=np.uint8).copy()
    for r, pc in enumerate(pivots):
        if w[pc]:
            w ^= dense[r]
    return not w.any()


# ── brute-force distance oracle ──────────────────────────────────────


def brute_force_distance(code: CxcCode, w_cap: int) -> int | None:
    """Exact quantum distance up to w_cap by low-weight enumeration.

    Scans X-type and Z-type Pauli vectors of weight 1..w_cap; a logical
    is a vector in the kernel of the opposite check matrix but outside
    the same-type row space.  Returns None when every weight <= w_cap is
    exhausted (distance > w_cap).  Small codes only.
    """
    from itertools import combinations

    n = code.n
    best: int | None = None
    for checks, stabs in ((code.h_z, code.h_x), (code.h_x, code.h_z)):
        cols = checks.to_dense().astype(np.uint8)
        col_ints = [int(sum(int(bit) << r for r, bit in enumerate(cols[:, j]))) for j in range(n)]
        R, pivots = row_reduce(stabs)
        rdense = R.to_dense()
        row_ints = [
            int(sum(int(bit) << c for c, bit in enumerate(rdense[r])))
            for r in range(len(pivots))
        ]
        found = None
        for w in range(1, w_cap + 1):
            if best is not None and w >= best:
                break
            for support in combinations(range(n), w):
                syn = 0
                for q in support:
                    syn ^= col_ints[q]
                if syn:
                    continue
                vec = 0
                for q in support:
                    vec |= 1 << q
                for r, pc in enumerate(pivots):
                    if (vec >> pc) & 1:
                        vec ^= row_ints[r]
                if vec:
                    found = w
                    break
            if found is not None:
                break
        if found is not None and (best is None or found < best):
            best = found
    return best


# ── catalog serialization ────────────────────────────────────────────


def to_catalog_entry(code: CxcCode) -> dict:
    p = code_params(code)
    return {
        "family": code.family,
        "a": code.a,
        "b": code.b,
        "supportA": list(code.poly_a.support),
        "supportB": list(code.poly_b.support),
        "n": p.n,
        "k": p.k,
        "d": p.d,
        "omega": p.omega,
        "rank": p.stabilizer_rank,
    }


def from_catalog_entry(entry: dict) -> CxcCode:
    code = build_cxc(
        entry["a"],
        entry["b"],
        CyclicPoly(entry["a"], tuple(entry["supportA"])),
        CyclicPoly(entry["b"], tuple(entry["supportB"])),
        family=entry.get("family", "CxC"),
    )
    return code
