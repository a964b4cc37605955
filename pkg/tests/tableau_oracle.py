"""CHP-style stabilizer tableau simulator (Aaronson-Gottesman 2004).

Test-only oracle: runs a compiled memory experiment with *real* quantum
measurement semantics (random outcomes where the state demands them) to
certify that every declared detector and observable parity is
deterministic, independent of the frame-simulation shortcut.
"""

from __future__ import annotations

import numpy as np


class Tableau:
    def __init__(self, n: int, rng: np.random.Generator):
        self.n = n
        self.rng = rng
        # Rows 0..n-1 destabilizers, n..2n-1 stabilizers; start in |0>^n.
        self.x = np.zeros((2 * n, n), dtype=bool)
        self.z = np.zeros((2 * n, n), dtype=bool)
        self.r = np.zeros(2 * n, dtype=np.int8)
        self.x[np.arange(n), np.arange(n)] = True
        self.z[n + np.arange(n), np.arange(n)] = True

    # ── gates ────────────────────────────────────────────────────────

    def h(self, q: int):
        self.r ^= (self.x[:, q] & self.z[:, q]).astype(np.int8)
        tmp = self.x[:, q].copy()
        self.x[:, q] = self.z[:, q]
        self.z[:, q] = tmp

    def cx(self, c: int, t: int):
        self.r ^= (self.x[:, c] & self.z[:, t] & (self.x[:, t] ^ self.z[:, c] ^ True)).astype(np.int8)
        self.x[:, t] ^= self.x[:, c]
        self.z[:, c] ^= self.z[:, t]

    def cz(self, a: int, b: int):
        self.h(b)
        self.cx(a, b)
        self.h(b)

    def apply_z(self, q: int):
        self.r ^= self.x[:, q].astype(np.int8)

    def apply_x(self, q: int):
        self.r ^= self.z[:, q].astype(np.int8)

    # ── measurement ──────────────────────────────────────────────────

    @staticmethod
    def _g(x1, z1, x2, z2):
        """Phase exponent of multiplying single-qubit Paulis (AG04 eq. for rowsum)."""
        out = np.zeros(x1.shape, dtype=np.int64)
        m11 = x1 & z1
        out[m11] = (z2[m11].astype(np.int64) - x2[m11].astype(np.int64))
        m10 = x1 & ~z1
        out[m10] = z2[m10].astype(np.int64) * (2 * x2[m10].astype(np.int64) - 1)
        m01 = ~x1 & z1
        out[m01] = x2[m01].astype(np.int64) * (1 - 2 * z2[m01].astype(np.int64))
        return int(out.sum())

    def _rowsum(self, h: int, i: int):
        tot = 2 * int(self.r[h]) + 2 * int(self.r[i]) + self._g(self.x[i], self.z[i], self.x[h], self.z[h])
        assert tot % 2 == 0
        self.r[h] = (tot % 4) // 2
        self.x[h] ^= self.x[i]
        self.z[h] ^= self.z[i]

    def measure_z(self, q: int) -> int:
        n = self.n
        stab_hits = np.nonzero(self.x[n:, q])[0]
        if stab_hits.size:
            p = n + int(stab_hits[0])
            for i in range(2 * n):
                if i != p and self.x[i, q]:
                    self._rowsum(i, p)
            self.x[p - n] = self.x[p]
            self.z[p - n] = self.z[p]
            self.r[p - n] = self.r[p]
            self.x[p] = False
            self.z[p] = False
            self.z[p, q] = True
            outcome = int(self.rng.integers(0, 2))
            self.r[p] = outcome
            return outcome
        # Deterministic outcome: accumulate into a scratch row.
        sx = np.zeros(n, dtype=bool)
        sz = np.zeros(n, dtype=bool)
        sr = 0
        for i in range(n):
            if self.x[i, q]:
                tot = 2 * sr + 2 * int(self.r[i + n]) + self._g(self.x[i + n], self.z[i + n], sx, sz)
                sr = (tot % 4) // 2
                sx ^= self.x[i + n]
                sz ^= self.z[i + n]
        return sr

    def measure_x(self, q: int) -> int:
        self.h(q)
        m = self.measure_z(q)
        self.h(q)
        return m

    def reset_plus(self, q: int):
        if self.measure_x(q):
            self.apply_z(q)

    def reset_zero(self, q: int):
        if self.measure_z(q):
            self.apply_x(q)


def run_memory_tableau(mem, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Noiseless run of a compiled MemoryCircuit with random measurement
    collapse; returns (detector parities, observable parities)."""
    rng = np.random.default_rng(seed)
    tab = Tableau(mem.n_qubits, rng)
    exp = mem.experiment
    nd = 2 * exp.code.a * exp.code.b
    outcomes = np.zeros(mem.n_meas, dtype=np.uint8)
    for st in mem.steps:
        if st.kind == "prep":
            for q in st.targets:
                if q < nd:
                    if exp.basis == "Z":
                        tab.reset_zero(int(q))
                    else:
                        tab.reset_plus(int(q))
                else:
                    tab.reset_plus(int(q))
        elif st.kind == "gate":
            for c, t in zip(st.cx_ctrl, st.cx_tgt):
                tab.cx(int(c), int(t))
            for a_, b_ in zip(st.cz_a, st.cz_b):
                tab.cz(int(a_), int(b_))
        elif st.kind == "mr":
            for q, s in zip(st.targets, st.slots):
                outcomes[s] = tab.measure_x(int(q))
                tab.reset_plus(int(q))
        elif st.kind == "readout":
            for q, s in zip(st.targets, st.slots):
                if st.basis == "Z":
                    outcomes[s] = tab.measure_z(int(q))
                else:
                    outcomes[s] = tab.measure_x(int(q))
        # shift layers: no quantum action
    det = np.array([np.bitwise_xor.reduce(outcomes[list(slots)]) for slots in mem.detectors], dtype=np.uint8)
    obs = np.array([np.bitwise_xor.reduce(outcomes[list(slots)]) for slots in mem.observables], dtype=np.uint8)
    return det, obs
