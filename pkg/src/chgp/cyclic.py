"""Classical cyclic codes: parameters, canonical generators, best-rate search.

A cyclic code of length n is given here by the kernel of the n x n
circulant built from a generating polynomial's support.  The search
enumerates every cyclically-inequivalent support of a given weight up to
a maximum length, filters by minimum distance and dimension, and keeps
the best code rate per distance.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .gf2 import BitMatrix, CyclicPoly, eliminate_ints, gf2_rank, kernel_ints

DEFAULT_ENUMERATION_CAP = 1 << 26


class EnumerationCapExceeded(Exception):
    """Distance search would enumerate more codewords than the configured cap."""


@dataclass(frozen=True)
class FilterRules:
    """Rejection thresholds for the search; defaults match the d>=2, k>=1 rules."""

    d_min: int = 2
    k_min: int = 1
    enumeration_cap: int = DEFAULT_ENUMERATION_CAP


@dataclass(frozen=True)
class ClassicalCode:
    """An [n, k, d] cyclic code with its canonical generating support."""

    poly: CyclicPoly
    n: int
    k: int
    d: int
    mirror_equivalent: bool = False

    @property
    def rate(self) -> float:
        return self.k / self.n

    @property
    def weight(self) -> int:
        return self.poly.weight

    def params(self) -> tuple[int, int, int]:
        return (self.n, self.k, self.d)

    def __str__(self) -> str:
        return f"[{self.n},{self.k},{self.d}] w={self.weight} supp={list(self.poly.support)}"


@dataclass(frozen=True)
class SkipRecord:
    poly: CyclicPoly
    k: int
    reason: str


@dataclass
class BestRateTable:
    """Best code rate per minimum distance, for one generator weight."""

    weight: int
    entries: dict[int, ClassicalCode] = field(default_factory=dict)
    skipped: tuple[SkipRecord, ...] = ()

    def distances(self) -> list[int]:
        return sorted(self.entries)

    def consider(self, code: ClassicalCode) -> None:
        cur = self.entries.get(code.d)
        if cur is None or _better_rate(code, cur):
            self.entries[code.d] = code


def _better_rate(new: ClassicalCode, cur: ClassicalCode) -> bool:
    # Higher rate wins (compared exactly via cross-multiplication); ties
    # prefer the smaller length, then the lexicographically smaller
    # canonical support.
    lhs, rhs = new.k * cur.n, cur.k * new.n
    if lhs != rhs:
        return lhs > rhs
    return (new.n, new.poly.support) < (cur.n, cur.poly.support)


# ── per-candidate evaluation ─────────────────────────────────────────


def _rotl(mask: int, i: int, n: int) -> int:
    return ((mask << i) | (mask >> (n - i))) & ((1 << n) - 1) if i else mask


def _circulant_ints(poly: CyclicPoly) -> list[int]:
    mask = poly.mask()
    n = poly.modulus
    return [_rotl(mask, i, n) for i in range(n)]


def circulant_rank(poly: CyclicPoly) -> int:
    """Rank of the circulant of ``poly``; int fast path for n <= 63."""
    n = poly.modulus
    if n <= 63:
        _, pivots = eliminate_ints(_circulant_ints(poly), n)
        return len(pivots)
    from .gf2 import circulant_matrix

    return gf2_rank(circulant_matrix(poly))


def min_distance(poly: CyclicPoly, cap: int = DEFAULT_ENUMERATION_CAP) -> int:
    """Exact minimum codeword weight by enumerating all 2^k - 1 kernel combinations.

    Raises ValueError if the code is trivial (k = 0) and
    EnumerationCapExceeded if 2^k - 1 exceeds ``cap``.
    """
    n = poly.modulus
    if n > 63:
        raise ValueError("distance enumeration implemented for n <= 63")
    basis = kernel_ints(_circulant_ints(poly), n)
    k = len(basis)
    if k == 0:
        raise ValueError(f"{poly} generates a trivial code (k = 0): no nonzero codeword")
    total = (1 << k) - 1
    if total > cap:
        raise EnumerationCapExceeded(f"2^{k} - 1 codewords exceed cap {cap}")
    if k <= 16:
        best = n + 1
        cur = 0
        for i in range(1, total + 1):
            cur ^= basis[(i & -i).bit_length() - 1]
            w = cur.bit_count()
            if w < best:
                best = w
        return best
    return _min_distance_vec(basis, total)


def _min_distance_vec(basis: list[int], total: int, chunk: int = 1 << 20) -> int:
    """Gray-code enumeration vectorized over uint64 codewords."""
    barr = np.array(basis, dtype=np.uint64)
    best = np.iinfo(np.int64).max
    prefix = np.uint64(0)
    for start in range(1, total + 1, chunk):
        stop = min(start + chunk, total + 1)
        idx = np.arange(start, stop, dtype=np.int64)
        low = idx & -idx
        tz = np.log2(low.astype(np.float64)).astype(np.int64)
        words = barr[tz]
        np.bitwise_xor.accumulate(words, out=words)
        words ^= prefix
        prefix = words[-1]
        w = int(np.bitwise_count(words).min())
        if w < best:
            best = w
    return best


def classical_params(
    poly: CyclicPoly, cap: int = DEFAULT_ENUMERATION_CAP
) -> tuple[int, int, int]:
    """(n, k, d) of the cyclic code generated by ``poly``.

    k comes from the circulant rank, d from exhaustive minimum-weight
    search over the kernel.
    """
    n = poly.modulus
    k = n - circulant_rank(poly)
    d = min_distance(poly, cap=cap)
    return (n, k, d)


def canonical_support(poly: CyclicPoly) -> CyclicPoly:
    """Lexicographically smallest support among all cyclic shifts.

    The minimum always contains 0: shifting any exponent onto 0 yields a
    tuple starting with 0, which beats any tuple that does not.
    """
    n = poly.modulus
    best = None
    for e in poly.support:
        cand = tuple(sorted((x - e) % n for x in poly.support))
        if best is None or cand < best:
            best = cand
    return CyclicPoly(n, best)


def _is_canonical(supp: tuple[int, ...], n: int) -> bool:
    for e in supp[1:]:
        if tuple(sorted((x - e) % n for x in supp)) < supp:
            return False
    return True


def _mirror_equivalent(supp: tuple[int, ...], n: int) -> bool:
    rev = canonical_support(CyclicPoly(n, tuple((-x) % n for x in supp)))
    return rev.support == supp


def _survey_one(args) -> tuple[list[ClassicalCode], list[SkipRecord]]:
    """Evaluate every canonical weight-w support of one length n."""
    n, w, rules = args
    codes: list[ClassicalCode] = []
    skipped: list[SkipRecord] = []
    if n < max(2, w):
        return codes, skipped
    for rest in itertools.combinations(range(1, n), w - 1):
        supp = (0,) + rest
        if not _is_canonical(supp, n):
            continue
        poly = CyclicPoly(n, supp)
        _, pivots = eliminate_ints(_circulant_ints(poly), n)
        k = n - len(pivots)
        if k < rules.k_min:
            continue
        try:
            d = min_distance(poly, cap=rules.enumeration_cap)
        except EnumerationCapExceeded:
            skipped.append(SkipRecord(poly, k, f"2^{k} codewords exceed cap"))
            continue
        if d < rules.d_min:
            continue
        codes.append(ClassicalCode(poly, n, k, d, _mirror_equivalent(supp, n)))
    return codes, skipped


def survey_cyclic_codes(
    n_max: int,
    w: int,
    rules: FilterRules = FilterRules(),
    workers: int = 1,
) -> tuple[list[ClassicalCode], list[SkipRecord]]:
    """All surviving weight-w cyclic codes with n <= n_max, plus the skip log.

    Candidates are canonical supports only; results are ordered by
    (n, support) regardless of worker count.
    """
    tasks = [(n, w, rules) for n in range(2, n_max + 1)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_survey_one, tasks, chunksize=1))
    else:
        results = [_survey_one(t) for t in tasks]
    codes: list[ClassicalCode] = []
    skipped: list[SkipRecord] = []
    for cs, sk in results:
        codes.extend(cs)
        skipped.extend(sk)
    return codes, skipped


def enumerate_cyclic_codes(
    n_max: int,
    w_min: int,
    w_max: int,
    rules: FilterRules = FilterRules(),
    workers: int = 1,
) -> list[BestRateTable]:
    """Best-rate tables for every generator weight in [w_min, w_max].

    For each weight, every canonical support of every length up to n_max
    is evaluated; codes failing the filter rules are rejected and the
    survivors are reduced to the best rate per minimum distance.
    """
    if not (2 <= w_min <= w_max):
        raise ValueError(f"need 2 <= w_min <= w_max, got [{w_min}, {w_max}]")
    if n_max < 2:
        raise ValueError(f"n_max must be >= 2, got {n_max}")
    tables = []
    for w in range(w_min, w_max + 1):
        codes, skipped = survey_cyclic_codes(n_max, w, rules, workers=workers)
        table = BestRateTable(weight=w, skipped=tuple(skipped))
        for code in codes:
            table.consider(code)
        tables.append(table)
    return tables


# ── serialization ────────────────────────────────────────────────────

CSV_HEADER = "w,n_c,k_c,d_c,support,rate,mirror_equivalent"


def tables_to_csv(tables: list[BestRateTable]) -> str:
    lines = [CSV_HEADER]
    for t in tables:
        for d in t.distances():
            c = t.entries[d]
            supp = " ".join(map(str, c.poly.support))
            lines.append(
                f"{t.weight},{c.n},{c.k},{c.d},{supp},{c.rate:.6f},{int(c.mirror_equivalent)}"
            )
    return "\n".join(lines) + "\n"


def tables_to_json(tables: list[BestRateTable]) -> dict:
    return {
        "tables": [
            {
                "w": t.weight,
                "entries": [
                    {
                        "n_c": c.n,
                        "k_c": c.k,
                        "d_c": c.d,
                        "support": list(c.poly.support),
                        "rate": c.rate,
                        "mirror_equivalent": c.mirror_equivalent,
                    }
                    for c in (t.entries[d] for d in t.distances())
                ],
                "skipped": [
                    {"n_c": s.poly.modulus, "support": list(s.poly.support), "k_c": s.k}
                    for s in t.skipped
                ],
            }
            for t in tables
        ]
    }
