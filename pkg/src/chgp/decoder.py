"""Belief propagation plus ordered-statistics decoding on detector error models.

BP is sum-product with a parallel (flooding) schedule, run batched over
shots with message magnitudes clamped.  When BP's hard decision does not
satisfy the syndrome, OSD sorts faults by posterior error probability
(most suspect first, ties by fault index), greedily eliminates an
information set in that order, and guarantees a syndrome-consistent
correction; order lambda additionally enumerates flip patterns over the
lambda most suspect non-pivot positions and keeps the minimum
soft-weight solution.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict

import numpy as np

from .gf2 import BitMatrix, _eliminate
from .noise import DetectorErrorModel, ShotBatch

_MAG_FLOOR = 1e-7


@dataclass(frozen=True)
class DecoderConfig:
    max_iter: int = 10000
    osd_order: int = 5
    osd_mode: str = "osd_e"  # "osd_e" (exhaustive 2^order) or "osd_cs" (combination sweep)
    clamp: float = 30.0
    force_osd: bool = False

    def __post_init__(self):
        if self.osd_mode not in ("osd_e", "osd_cs"):
            raise ValueError(f"unknown osd_mode {self.osd_mode!r}")
        if self.osd_order < 0:
            raise ValueError("osd_order must be >= 0")

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "DecoderConfig":
        return cls(**json.loads(text))


class SparseCheckMatrix:
    """Check-to-fault incidence in compressed adjacency form.

    Keeps both orientations (per-check fault lists and per-fault check
    lists) as flat edge arrays for vectorized message passing.
    """

    def __init__(self, det_lists: list, num_checks: int, num_faults: int):
        self.num_checks = num_checks
        self.num_faults = num_faults
        edge_det = []
        edge_fault = []
        for f, dets in enumerate(det_lists):
            for dd in dets:
                if not 0 <= dd < num_checks:
                    raise ValueError(f"detector {dd} out of range")
                edge_det.append(dd)
                edge_fault.append(f)
        self.num_edges = len(edge_det)
        det_arr = np.array(edge_det, dtype=np.int64)
        fault_arr = np.array(edge_fault, dtype=np.int64)
        order = np.argsort(det_arr, kind="stable")
        self.edge_det = det_arr[order]
        self.edge_fault = fault_arr[order]
        self.det_counts = np.bincount(self.edge_det, minlength=num_checks)
        self.det_starts = np.concatenate([[0], np.cumsum(self.det_counts)[:-1]]).astype(np.int64)
        # Permutation from det-sorted edge order into fault-major order.
        self.perm_fault = np.argsort(self.edge_fault, kind="stable")
        self.fault_counts = np.bincount(self.edge_fault, minlength=num_faults)
        self.fault_starts = np.concatenate([[0], np.cumsum(self.fault_counts)[:-1]]).astype(np.int64)
        self._dense_columns = None
        self._rank = None

    @classmethod
    def from_dem(cls, dem: DetectorErrorModel) -> "SparseCheckMatrix":
        return cls(dem.det_lists, dem.num_detectors, dem.num_faults)

    @classmethod
    def from_dense(cls, H) -> "SparseCheckMatrix":
        H = np.asarray(H, dtype=np.uint8) % 2
        det_lists = [tuple(np.nonzero(H[:, f])[0].tolist()) for f in range(H.shape[1])]
        return cls(det_lists, H.shape[0], H.shape[1])

    def check_consistency(self) -> bool:
        """Adjacency lists describe one and the same edge set."""
        a = set(zip(self.edge_det.tolist(), self.edge_fault.tolist()))
        b = set(
            zip(
                self.edge_det[self.perm_fault].tolist(),
                self.edge_fault[self.perm_fault].tolist(),
            )
        )
        return a == b and len(a) == self.num_edges

    def column_words(self) -> np.ndarray:
        """Packed columns: (F, ceil(D/64)) uint64, bit d of word d//64."""
        if self._dense_columns is None:
            nw = (self.num_checks + 63) // 64
            cols = np.zeros((self.num_faults, nw), dtype=np.uint64)
            f = self.edge_fault
            dd = self.edge_det
            np.bitwise_xor.at(cols, (f, dd // 64), np.uint64(1) << (dd % 64).astype(np.uint64))
            self._dense_columns = cols
        return self._dense_columns

    def rank(self) -> int:
        if self._rank is None:
            words = np.ascontiguousarray(self.column_words().copy())
            # Rank of the transpose equals the rank of the matrix.
            self._rank = len(_eliminate(words, self.num_faults, self.num_checks, full=False))
        return self._rank

    def syndrome_of(self, correction: np.ndarray) -> np.ndarray:
        syn = np.zeros(self.num_checks, dtype=np.uint8)
        active = correction[self.edge_fault].astype(np.uint8)
        np.bitwise_xor.at(syn, self.edge_det, active)
        return syn


@dataclass
class BpResult:
    correction: np.ndarray
    converged: bool
    iterations: int
    posteriors: np.ndarray


@dataclass
class DecodeResult:
    correction: np.ndarray
    converged: bool
    iterations: int
    posteriors: np.ndarray


def priors_to_llr(priors: np.ndarray) -> np.ndarray:
    priors = np.asarray(priors, dtype=np.float64)
    if priors.size and not ((priors > 0) & (priors <= 0.5)).all():
        raise ValueError("priors must lie in (0, 0.5]")
    return np.log((1.0 - priors) / priors)


def _segment_sum(values: np.ndarray, starts: np.ndarray, counts: np.ndarray) -> np.ndarray:
    """Row-wise segment sums with empty segments forced to zero."""
    if values.shape[-1] == 0:
        return np.zeros(values.shape[:-1] + (len(starts),), dtype=values.dtype)
    out = np.add.reduceat(values, starts, axis=-1)
    if (counts == 0).any():
        out[..., counts == 0] = 0
    return out


def _bp_batch(
    sm: SparseCheckMatrix,
    llr0: np.ndarray,
    syndromes: np.ndarray,
    max_iter: int,
    clamp: float,
):
    """Vectorized sum-product over a batch of syndromes.

    Returns (hard, posteriors, converged, iterations); shots drop out of
    the active set as soon as their hard decision satisfies the syndrome.
    """
    S = syndromes.shape[0]
    F = sm.num_faults
    E = sm.num_edges
    hard_out = np.zeros((S, F), dtype=np.uint8)
    post_out = np.tile(llr0.astype(np.float32), (S, 1))
    conv_out = np.zeros(S, dtype=bool)
    iter_out = np.zeros(S, dtype=np.int64)

    def check_done(hard, syn):
        par = _segment_sum(hard[:, sm.edge_fault].astype(np.uint16), sm.det_starts, sm.det_counts) & 1
        return (par == syn).all(axis=1)

    # Iteration 0: channel-only decision (zero correction for sane priors).
    hard0 = (llr0 < 0).astype(np.uint8)
    done0 = check_done(hard0[None, :].repeat(S, axis=0), syndromes)
    hard_out[done0] = hard0
    conv_out[done0] = True
    active = np.nonzero(~done0)[0]
    if active.size == 0 or E == 0 or max_iter == 0:
        return hard_out, post_out, conv_out, iter_out

    llr0_f = llr0.astype(np.float32)
    syn_sign = 1.0 - 2.0 * syndromes[active].astype(np.float32)  # (+1 even, -1 odd)
    syn_sign_e = syn_sign[:, sm.edge_det]
    v2c = np.tile(llr0_f[sm.edge_fault], (active.size, 1))

    # Cycle detection (Brent): clamped float32 messages that exactly revisit
    # an earlier state can never satisfy the syndrome later (every orbit
    # state was already checked), so those shots coast for
    # (max_iter - it) mod period further iterations and are finalized with
    # the exact state they would hold at iteration max_iter.  The result
    # is identical to running the full budget.
    snap_v2c = np.zeros_like(v2c)
    snap_it = np.zeros(active.size, dtype=np.int64)
    refresh_at = np.ones(active.size, dtype=np.int64)
    coast = np.full(active.size, -1, dtype=np.int64)  # iterations left; -1 = live

    for it in range(1, max_iter + 1):
        mag = np.clip(np.abs(v2c), _MAG_FLOOR, clamp)
        phi = -np.log(np.tanh(mag / 2.0, dtype=np.float32))
        neg = np.signbit(v2c).astype(np.uint16)
        phi_tot = _segment_sum(phi, sm.det_starts, sm.det_counts)
        sgn_tot = _segment_sum(neg, sm.det_starts, sm.det_counts)
        phi_rem = np.clip(phi_tot[:, sm.edge_det] - phi, _MAG_FLOOR, None)
        par_rem = (sgn_tot[:, sm.edge_det] - neg) & 1
        sign_rem = np.where(par_rem == 1, -1.0, 1.0).astype(np.float32)
        sign_rem *= syn_sign_e
        c2v = sign_rem * np.clip(
            -np.log(np.tanh(phi_rem / 2.0, dtype=np.float32)), 0, clamp
        )

        tot = _segment_sum(c2v[:, sm.perm_fault], sm.fault_starts, sm.fault_counts)
        tot += llr0_f
        v2c = np.clip(tot[:, sm.edge_fault] - c2v, -clamp, clamp)

        hard = (tot < 0).astype(np.uint8)
        done = check_done(hard, syndromes[active])
        rows_done = active[done]
        hard_out[rows_done] = hard[done]
        post_out[rows_done] = tot[done]
        conv_out[rows_done] = True
        iter_out[rows_done] = it
        if it == max_iter:
            rows_left = active[~done]
            hard_out[rows_left] = hard[~done]
            post_out[rows_left] = tot[~done]
            iter_out[rows_left] = max_iter
            break
        # Finalize coasting shots that reached their max_iter-aligned state.
        coasting = coast >= 0
        coast[coasting] -= 1
        settle = (coast == -1) & coasting & ~done
        if settle.any():
            rows = active[settle]
            hard_out[rows] = hard[settle]
            post_out[rows] = tot[settle]
            iter_out[rows] = max_iter
        drop = done | settle
        stagnant = (v2c == snap_v2c).all(axis=1) & (snap_it > 0) & ~drop & ~coasting
        if stagnant.any():
            rows = np.nonzero(stagnant)[0]
            period = it - snap_it[rows]
            extra = (max_iter - it) % period
            now = rows[extra == 0]
            later = rows[extra > 0]
            if now.size:
                ids = active[now]
                hard_out[ids] = hard[now]
                post_out[ids] = tot[now]
                iter_out[ids] = max_iter
                drop[now] = True
            coast[later] = extra[extra > 0] - 1
        refresh = (refresh_at == it) & ~drop
        if refresh.any():
            snap_v2c[refresh] = v2c[refresh]
            snap_it[refresh] = it
        refresh_at[refresh_at == it] *= 2
        keep = ~drop
        active = active[keep]
        if active.size == 0:
            break
        v2c = v2c[keep]
        snap_v2c = snap_v2c[keep]
        snap_it = snap_it[keep]
        refresh_at = refresh_at[keep]
        syn_sign = syn_sign[keep]
        syn_sign_e = syn_sign_e[keep]
        coast = coast[keep]
    return hard_out, post_out, conv_out, iter_out


def bp_decode(
    H,
    priors: np.ndarray,
    syndrome: np.ndarray,
    max_iter: int = 10000,
    clamp: float = 30.0,
) -> BpResult:
    """Sum-product BP for a single syndrome.

    ``H`` may be a SparseCheckMatrix, a dense 0/1 array, or a BitMatrix.
    Non-convergence is a valid flagged outcome; posteriors (log-likelihood
    ratios, positive = no fault) are returned either way.
    """
    sm = _as_sparse(H)
    syndrome = np.asarray(syndrome, dtype=np.uint8)
    if syndrome.shape != (sm.num_checks,):
        raise ValueError(f"syndrome length {syndrome.shape} != check count {sm.num_checks}")
    llr0 = priors_to_llr(priors)
    if llr0.shape != (sm.num_faults,):
        raise ValueError("priors length does not match fault count")
    hard, post, conv, iters = _bp_batch(sm, llr0, syndrome[None, :], max_iter, clamp)
    return BpResult(
        correction=hard[0],
        converged=bool(conv[0]),
        iterations=int(iters[0]),
        posteriors=post[0].astype(np.float64),
    )


def _as_sparse(H) -> SparseCheckMatrix:
    if isinstance(H, SparseCheckMatrix):
        return H
    if isinstance(H, BitMatrix):
        return SparseCheckMatrix.from_dense(H.to_dense())
    return SparseCheckMatrix.from_dense(H)


# ── OSD ──────────────────────────────────────────────────────────────


def _osd_patterns(order: int, mode: str) -> list[tuple[int, ...]]:
    if mode == "osd_e":
        return [tuple(j for j in range(order) if (m >> j) & 1) for m in range(1 << order)]
    # combination sweep: weight <= 2 patterns over the first `order` positions
    pats: list[tuple[int, ...]] = [()]
    pats += [(j,) for j in range(order)]
    pats += [(i, j) for i in range(order) for j in range(i + 1, order)]
    return pats


def osd_postprocess(
    H,
    posteriors: np.ndarray,
    syndrome: np.ndarray,
    order: int = 5,
    mode: str = "osd_e",
) -> DecodeResult:
    """Ordered-statistics decoding on BP posteriors.

    Faults are sorted by descending posterior error probability (stable,
    so equal reliabilities break by fault index).  Elimination in that
    order greedily picks an information set; the order-0 solution solves
    the syndrome on it, and higher orders try flip patterns over the
    most suspect non-pivot positions, keeping the minimum soft weight.
    The returned correction always satisfies H c = syndrome; a syndrome
    outside the row space raises ValueError.
    """
    sm = _as_sparse(H)
    posteriors = np.asarray(posteriors, dtype=np.float64)
    syndrome = np.asarray(syndrome, dtype=np.uint8)
    full_rank = sm.rank()
    order_idx = np.argsort(posteriors, kind="stable")  # ascending LLR = most suspect first
    cols = sm.column_words()

    # Greedy pivot scan: eliminate over columns in reliability order until
    # the full matrix rank is reached (leftmost-column-first pivoting).
    take = min(sm.num_faults, full_rank + max(order, 0) + 64)
    while True:
        sel = order_idx[:take]
        mat = _pack_submatrix(cols, sel, sm.num_checks)
        _, piv_cols = _eliminate_cols(mat, sm.num_checks, len(sel))
        if len(piv_cols) >= full_rank or take == sm.num_faults:
            break
        take = min(sm.num_faults, take * 2)
    pivot_faults = [int(order_idx[c]) for c in piv_cols]
    pivot_set = set(piv_cols)
    flip_positions = [c for c in range(len(sel)) if c not in pivot_set][:order]
    flip_faults = [int(order_idx[c]) for c in flip_positions]

    soft = posteriors  # soft weight of a support = sum of posterior LLRs

    # Solve H_P e_P = syndrome (+ flipped columns) by fresh elimination on
    # the pivot submatrix augmented with every needed right-hand side.
    r = len(pivot_faults)
    aug_sources = [syndrome_words(syndrome, sm.num_checks)] + [cols[f] for f in flip_faults]
    best = None
    patterns = _osd_patterns(order if len(flip_faults) >= order else len(flip_faults), mode)
    sub = _pack_submatrix(cols, np.array(pivot_faults, dtype=np.int64), sm.num_checks)
    solutions = _solve_many(sub, aug_sources, patterns, sm.num_checks, r)
    for pat, e_pivot in zip(patterns, solutions):
        corr = np.zeros(sm.num_faults, dtype=np.uint8)
        corr[np.array(pivot_faults, dtype=np.int64)[e_pivot]] = 1
        for j in pat:
            corr[flip_faults[j]] = 1
        weight = float(soft[corr.astype(bool)].sum())
        key = (weight, pat)
        if best is None or key < best[0]:
            best = (key, corr)
    corr = best[1]
    if not np.array_equal(sm.syndrome_of(corr), syndrome):
        raise AssertionError("OSD produced a syndrome-inconsistent correction (bug)")
    return DecodeResult(correction=corr, converged=True, iterations=0, posteriors=posteriors)


def syndrome_words(syndrome: np.ndarray, num_checks: int) -> np.ndarray:
    nw = (num_checks + 63) // 64
    out = np.zeros(nw, dtype=np.uint64)
    idx = np.nonzero(syndrome)[0]
    np.bitwise_xor.at(out, idx // 64, np.uint64(1) << (idx % 64).astype(np.uint64))
    return out


def _pack_submatrix(cols: np.ndarray, sel: np.ndarray, num_checks: int) -> np.ndarray:
    """Rows = detectors, columns = selected faults, packed along columns."""
    ncols = len(sel)
    nw = (ncols + 63) // 64
    out = np.zeros((num_checks, nw), dtype=np.uint64)
    selected = cols[sel]  # (ncols, det_words)
    for c in range(ncols):
        col = selected[c]
        # unpack detector bits of this fault column
        dets = _word_bits(col, num_checks)
        out[dets, c // 64] |= np.uint64(1) << np.uint64(c % 64)
    return out


def _word_bits(words: np.ndarray, nbits: int) -> np.ndarray:
    bits = np.unpackbits(words.view(np.uint8), bitorder="little")[:nbits]
    return np.nonzero(bits)[0]


def _eliminate_cols(mat: np.ndarray, rows: int, cols: int) -> tuple[np.ndarray, list[int]]:
    work = mat.copy()
    pivots = _eliminate(work, rows, cols, full=False)
    return work, pivots


def _solve_many(sub: np.ndarray, aug_sources: list, patterns: list, num_checks: int, r: int):
    """Solve sub * e = rhs for every flip pattern; sub has full column rank r.

    ``sub`` is (D, ceil(r/64)) packed; aug_sources[0] is the syndrome and
    aug_sources[1 + j] the j-th flip fault's detector column, all packed
    over detectors.  Returns, per pattern, the indices (within the pivot
    list) set to 1.
    """
    n_aug = len(aug_sources)
    nw_sub = sub.shape[1]
    nw_aug = (n_aug + 63) // 64
    work = np.zeros((num_checks, nw_sub + nw_aug), dtype=np.uint64)
    work[:, :nw_sub] = sub
    for j, src in enumerate(aug_sources):
        dets = _word_bits(np.asarray(src), num_checks)
        work[dets, nw_sub + j // 64] |= np.uint64(1) << np.uint64(j % 64)
    pivots = _eliminate(work, num_checks, 64 * nw_sub, full=True)
    if pivots != list(range(r)):
        raise ValueError("syndrome outside the row space (pivot submatrix rank deficient)")
    # Row i of the reduced system gives e_i = XOR of the selected rhs bits.
    aug = work[:r, nw_sub:]
    sols = []
    for pat in patterns:
        mask_words = np.zeros(nw_aug, dtype=np.uint64)
        for j in (0, *[1 + jj for jj in pat]):
            mask_words[j // 64] ^= np.uint64(1) << np.uint64(j % 64)
        sel = aug & mask_words[None, :]
        parity = (np.bitwise_count(sel).sum(axis=1) & 1).astype(bool)
        sols.append(np.nonzero(parity)[0])
    # Consistency: rows below r must have zero rhs for every pattern.
    if r < num_checks:
        below = work[r:, nw_sub:]
        for pat in patterns:
            mask_words = np.zeros(nw_aug, dtype=np.uint64)
            for j in (0, *[1 + jj for jj in pat]):
                mask_words[j // 64] ^= np.uint64(1) << np.uint64(j % 64)
            parity = np.bitwise_count(below & mask_words[None, :]).sum(axis=1) & 1
            if parity.any():
                raise ValueError("syndrome outside the row space")
    return sols


# ── batch decoding ───────────────────────────────────────────────────


@dataclass
class DecodeBatchResult:
    shots: int
    failures_any: int
    failures_per_logical: np.ndarray
    converged_shots: int
    osd_shots: int
    iterations: np.ndarray
    converged: np.ndarray
    failure_bits: np.ndarray  # (shots, K) uint8

    def rows_csv(self) -> str:
        lines = ["shot,converged,iterations,failure_bits"]
        for s in range(self.shots):
            bits = "".join(str(int(b)) for b in self.failure_bits[s])
            lines.append(f"{s},{int(self.converged[s])},{int(self.iterations[s])},{bits}")
        return "\n".join(lines) + "\n"


def decode_batch(
    dem: DetectorErrorModel,
    shots: ShotBatch,
    config: DecoderConfig = DecoderConfig(),
    bp_batch_size: int = 32,
    workers: int = 1,
) -> DecodeBatchResult:
    """Decode every shot of a batch against its detector error model.

    A shot fails when any predicted observable differs from the actual
    observable bits.  BP runs batched (optionally across worker threads;
    results are independent of the worker count); OSD post-processes the
    shots BP did not converge on (or every shot with ``force_osd``).
    """
    if shots.detectors.shape[1] != dem.num_detectors:
        raise ValueError("shot batch and DEM disagree on detector count")
    if shots.observables.shape[1] != dem.num_observables:
        raise ValueError("shot batch and DEM disagree on observable count")
    sm = SparseCheckMatrix.from_dem(dem)
    sm.rank()  # precompute: shared read-only by all workers
    sm.column_words()
    llr0 = priors_to_llr(dem.priors)
    S = shots.shots
    K = dem.num_observables

    # fault -> observable incidence as flat arrays
    obs_edges_f = []
    obs_edges_k = []
    for f, obs in enumerate(dem.obs_lists):
        for k in obs:
            obs_edges_f.append(f)
            obs_edges_k.append(k)
    obs_f = np.array(obs_edges_f, dtype=np.int64)
    obs_k = np.array(obs_edges_k, dtype=np.int64)

    def predict(corrs: np.ndarray) -> np.ndarray:
        pred = np.zeros((corrs.shape[0], K), dtype=np.uint8)
        if len(obs_f):
            contrib = corrs[:, obs_f].astype(np.uint8)
            for row in range(corrs.shape[0]):
                np.bitwise_xor.at(pred[row], obs_k, contrib[row])
        return pred

    converged = np.zeros(S, dtype=bool)
    iterations = np.zeros(S, dtype=np.int64)
    failure_bits = np.zeros((S, K), dtype=np.uint8)
    osd_counts = np.zeros((S + bp_batch_size - 1) // bp_batch_size, dtype=np.int64)

    def run_chunk(args):
        ci, lo, hi = args
        syn = shots.detectors[lo:hi].astype(np.uint8)
        hard, post, conv, iters = _bp_batch(sm, llr0, syn, config.max_iter, config.clamp)
        corrs = hard
        for i in range(hi - lo):
            if config.force_osd or not conv[i]:
                osd_counts[ci] += 1
                res = osd_postprocess(
                    sm,
                    post[i].astype(np.float64),
                    syn[i],
                    order=config.osd_order,
                    mode=config.osd_mode,
                )
                corrs[i] = res.correction
            if not np.array_equal(sm.syndrome_of(corrs[i]), syn[i]):
                raise AssertionError("decoded correction violates the syndrome")
        pred = predict(corrs)
        failure_bits[lo:hi] = pred ^ shots.observables[lo:hi].astype(np.uint8)
        converged[lo:hi] = conv
        iterations[lo:hi] = iters

    chunks = [
        (ci, lo, min(lo + bp_batch_size, S))
        for ci, lo in enumerate(range(0, S, bp_batch_size))
    ]
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run_chunk, chunks))
    else:
        for chunk in chunks:
            run_chunk(chunk)
    osd_shots = int(osd_counts.sum())

    failures_per_logical = failure_bits.sum(axis=0)
    failures_any = int(failure_bits.any(axis=1).sum())
    return DecodeBatchResult(
        shots=S,
        failures_any=failures_any,
        failures_per_logical=failures_per_logical,
        converged_shots=int(converged.sum()),
        osd_shots=osd_shots,
        iterations=iterations,
        converged=converged,
        failure_bits=failure_bits,
    )
