"""Standard circuit noise, memory experiments, and Pauli-frame Monte Carlo.

Noise convention (rate p per operation):

* every two-qubit gate is followed by a two-qubit depolarizing channel
  (15 non-identity Paulis, each with probability p/15);
* every preparation/reset is followed by one-qubit depolarizing
  (X, Y, Z each with probability p/3);
* every measurement outcome is flipped with probability p, and the
  reset half of a measure-reset is followed by one-qubit depolarizing;
* every qubit not acted on in a layer idles through one-qubit
  depolarizing, including all qubits during the cyclic-shift layers of
  the modular schedule.

Simulation is by Pauli-frame propagation: boolean X/Z frames per shot
are conjugated through the Clifford layers, and measurement outcomes
are the frame bits (X-basis outcomes flip under Z frame bits, Z-basis
under X).  A detector is a parity of outcomes that is zero in the
absence of faults; observables are logical readout parities.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .circuits import (
    Circuit,
    CyclicShift,
    GateLayer,
    MeasureResetX,
    PrepPlus,
    gen_modular_circuit,
    gen_packed_circuit,
)
from .codes import CxcCode, code_params, logical_basis

SAMPLE_CHUNK = 8192
DEM_CHUNK = 32768


@dataclass(frozen=True)
class NoiseModel:
    """Uniform circuit noise with physical rate p per operation."""

    p: float

    def __post_init__(self):
        if not 0.0 <= self.p < 1.0:
            raise ValueError(f"noise rate must satisfy 0 <= p < 1, got {self.p}")


@dataclass(frozen=True)
class MemoryExperiment:
    code: CxcCode
    basis: str
    rounds: int
    variant: str = "packed"

    def __post_init__(self):
        if self.basis not in ("X", "Z"):
            raise ValueError(f"basis must be 'X' or 'Z', got {self.basis!r}")
        if self.variant not in ("modular", "packed"):
            raise ValueError(f"variant must be 'modular' or 'packed', got {self.variant!r}")
        if self.rounds < 1:
            raise ValueError("rounds must be >= 1")


# ── compiled steps ───────────────────────────────────────────────────


@dataclass
class _Step:
    kind: str  # "prep" | "gate" | "mr" | "shift" | "readout"
    # gate arrays (sim indices)
    cx_ctrl: np.ndarray | None = None
    cx_tgt: np.ndarray | None = None
    cz_a: np.ndarray | None = None
    cz_b: np.ndarray | None = None
    pair_left: np.ndarray | None = None
    pair_right: np.ndarray | None = None
    # measurement / prep / idle arrays
    targets: np.ndarray | None = None  # measured or prepped sim qubits
    slots: np.ndarray | None = None  # measurement slot ids
    idle: np.ndarray | None = None
    basis: str | None = None  # readout basis


@dataclass
class MemoryCircuit:
    """A compiled memory experiment: op timeline, detectors, observables.

    Measurement slots are numbered chronologically; detectors and
    observables are lists of slot tuples whose parities are deterministic
    in the absence of faults.  Slot keys record ("X"|"Z", check, round)
    for ancilla rounds and ("R", qubit) for the final data readout.
    """

    experiment: MemoryExperiment | None
    circuit: Circuit
    steps: list
    n_qubits: int
    n_meas: int
    slot_keys: list
    detectors: list
    detector_keys: list
    observables: list

    @property
    def num_detectors(self) -> int:
        return len(self.detectors)

    @property
    def num_observables(self) -> int:
        return len(self.observables)


def _compile_layers(circuit: Circuit, data_prep: bool) -> tuple[list, int, list]:
    """Flatten circuit layers into steps; returns (steps, n_meas, slot_keys)."""
    ab = circuit.a * circuit.b
    nd = 2 * ab
    nq = 4 * ab
    all_q = np.arange(nq)
    steps: list[_Step] = []
    slot_keys: list = []
    rounds_seen = {"X": 0, "Z": 0}
    first = circuit.layers[0]
    if not isinstance(first, PrepPlus):
        raise ValueError("circuit must start with ancilla preparation")
    anc = np.array([nd + v for v in first.ancillas])
    if data_prep:
        steps.append(_Step(kind="prep", targets=all_q.copy(), idle=np.array([], dtype=int)))
    else:
        steps.append(_Step(kind="prep", targets=anc, idle=np.setdiff1d(all_q, anc)))
    for layer in circuit.layers[1:]:
        if isinstance(layer, GateLayer):
            cx_ctrl = np.array([nd + a_ for a_, _ in layer.cx], dtype=int)
            cx_tgt = np.array([q for _, q in layer.cx], dtype=int)
            cz_a = np.array([nd + a_ for a_, _ in layer.cz], dtype=int)
            cz_b = np.array([q for _, q in layer.cz], dtype=int)
            pl = np.concatenate([cx_ctrl, cz_a])
            pr = np.concatenate([cx_tgt, cz_b])
            touched = np.concatenate([pl, pr])
            steps.append(
                _Step(
                    kind="gate",
                    cx_ctrl=cx_ctrl,
                    cx_tgt=cx_tgt,
                    cz_a=cz_a,
                    cz_b=cz_b,
                    pair_left=pl,
                    pair_right=pr,
                    idle=np.setdiff1d(all_q, touched),
                )
            )
        elif isinstance(layer, MeasureResetX):
            typ = "X" if layer.ancillas[0] < ab else "Z"
            rnd = rounds_seen[typ]
            rounds_seen[typ] += 1
            targets = np.array([nd + v for v in layer.ancillas])
            slots = np.arange(len(slot_keys), len(slot_keys) + len(targets))
            slot_keys.extend((typ, v % ab, rnd) for v in layer.ancillas)
            steps.append(
                _Step(
                    kind="mr",
                    targets=targets,
                    slots=slots,
                    idle=np.setdiff1d(all_q, targets),
                )
            )
        elif isinstance(layer, CyclicShift):
            steps.append(_Step(kind="shift", idle=all_q.copy()))
        elif isinstance(layer, PrepPlus):
            raise ValueError("unexpected mid-circuit preparation")
        else:
            raise TypeError(f"unknown layer {layer!r}")
    return steps, len(slot_keys), slot_keys


def build_memory_experiment(exp: MemoryExperiment) -> MemoryCircuit:
    """Compile a memory experiment with detectors and observables.

    Z-memory prepares data in the Z basis, runs the noisy rounds, and
    reads all data out in Z.  Detectors: first-round Z checks, XOR of
    consecutive same-check outcomes for both check types, and final
    Z checks reconstructed from the readout XOR the last measured round.
    Observables are the Z logicals on the readout.  X-memory is the
    mirror image.  Detector ids follow measurement-completion order.
    """
    code = exp.code
    gen = gen_modular_circuit if exp.variant == "modular" else gen_packed_circuit
    circuit = gen(code, exp.rounds)
    steps, n_meas, slot_keys = _compile_layers(circuit, data_prep=True)

    ab = code.a * code.b
    nd = 2 * ab
    d = exp.rounds
    same = exp.basis  # the deterministic check type for this memory basis
    check_rows = (code.h_z if same == "Z" else code.h_x).to_dense()
    logicals = logical_basis(code)
    log_rows = logicals.z_ops if same == "Z" else logicals.x_ops

    # Readout slots appended after the ancilla rounds.
    readout_slots = np.arange(n_meas, n_meas + nd)
    slot_keys = slot_keys + [("R", q) for q in range(nd)]
    steps.append(
        _Step(
            kind="readout",
            targets=np.arange(nd),
            slots=readout_slots,
            idle=np.arange(nd, 4 * ab),
            basis=exp.basis,
        )
    )
    n_meas += nd

    slot_of = {key: s for s, key in enumerate(slot_keys)}
    detectors: list[tuple[int, ...]] = []
    detector_keys: list = []
    # Chronological emission: walk the measurement layers in time order.
    for key_typ, rnd in _round_timeline(d):
        for c in range(ab):
            cur = slot_of[(key_typ, c, rnd)]
            if rnd == 0:
                if key_typ == same:
                    detectors.append((cur,))
                    detector_keys.append((key_typ, c, 0, "first"))
            else:
                prev = slot_of[(key_typ, c, rnd - 1)]
                detectors.append((prev, cur))
                detector_keys.append((key_typ, c, rnd, "diff"))
    for c in range(ab):
        last = slot_of[(same, c, d - 1)]
        qs = np.nonzero(check_rows[c])[0]
        detectors.append((last, *(int(readout_slots[q]) for q in qs)))
        detector_keys.append((same, c, d, "final"))
    observables = [
        tuple(int(readout_slots[q]) for q in np.nonzero(row)[0]) for row in log_rows
    ]
    return MemoryCircuit(
        experiment=exp,
        circuit=circuit,
        steps=steps,
        n_qubits=4 * ab,
        n_meas=n_meas,
        slot_keys=slot_keys,
        detectors=detectors,
        detector_keys=detector_keys,
        observables=observables,
    )


def _round_timeline(d: int):
    """(type, round) pairs in measurement order: X_0, Z_0, X_1, Z_1, ..."""
    order = []
    for l in range(d + 1):
        if l > 0:
            order.append(("Z", l - 1))
        if l < d:
            order.append(("X", l))
    return order


def expected_detector_count(code: CxcCode, rounds: int) -> int:
    """Closed form for either memory basis: ab first + ab final + 2(d-1)ab diffs."""
    return 2 * rounds * code.a * code.b


# ── noise annotation ─────────────────────────────────────────────────


@dataclass(frozen=True)
class FaultLocation:
    kind: str  # "prep" | "gate2" | "meas_flip" | "reset" | "idle"
    step: int
    which: tuple


@dataclass
class NoisyCircuit:
    """A compiled circuit or memory experiment plus a noise model."""

    program: MemoryCircuit
    model: NoiseModel

    @property
    def p(self) -> float:
        return self.model.p

    def fault_locations(self) -> list[FaultLocation]:
        """Every noise location, in the deterministic simulation order."""
        locs: list[FaultLocation] = []
        for si, st in enumerate(self.program.steps):
            if st.kind == "gate":
                for i in range(len(st.pair_left)):
                    locs.append(FaultLocation("gate2", si, (int(st.pair_left[i]), int(st.pair_right[i]))))
            if st.kind in ("mr", "readout"):
                for i, q in enumerate(st.targets):
                    locs.append(FaultLocation("meas_flip", si, (int(st.slots[i]),)))
            if st.kind == "mr":
                for q in st.targets:
                    locs.append(FaultLocation("reset", si, (int(q),)))
            if st.kind == "prep":
                for q in st.targets:
                    locs.append(FaultLocation("prep", si, (int(q),)))
            if st.idle is not None and len(st.idle):
                for q in st.idle:
                    locs.append(FaultLocation("idle", si, (int(q),)))
        return locs

    def n_fault_locations(self) -> int:
        return len(self.fault_locations())


def annotate_noise(target, model: NoiseModel) -> NoisyCircuit:
    """Attach the standard-circuit-noise model to a circuit.

    ``target`` is a MemoryCircuit (samplable) or a bare Circuit (fault
    accounting only; it has no detectors).
    """
    if isinstance(target, MemoryCircuit):
        return NoisyCircuit(program=target, model=model)
    if isinstance(target, Circuit):
        steps, n_meas, slot_keys = _compile_layers(target, data_prep=False)
        prog = MemoryCircuit(
            experiment=None,
            circuit=target,
            steps=steps,
            n_qubits=2 * target.num_data,
            n_meas=n_meas,
            slot_keys=slot_keys,
            detectors=[],
            detector_keys=[],
            observables=[],
        )
        return NoisyCircuit(program=prog, model=model)
    raise TypeError(f"cannot annotate {type(target).__name__}")


# ── shot batches ─────────────────────────────────────────────────────

_MAGIC = b"SHB1"


@dataclass
class ShotBatch:
    """Detector and observable bits for a batch of Monte Carlo shots."""

    detectors: np.ndarray  # (shots, D) uint8
    observables: np.ndarray  # (shots, K) uint8
    seed: int

    @property
    def shots(self) -> int:
        return self.detectors.shape[0]

    def to_bytes(self) -> bytes:
        s, dcount = self.detectors.shape
        kcount = self.observables.shape[1]
        header = _MAGIC + np.array([dcount, kcount, s], dtype="<u4").tobytes()
        det = np.packbits(self.detectors, axis=1, bitorder="little").tobytes()
        obs = np.packbits(self.observables, axis=1, bitorder="little").tobytes()
        return header + det + obs

    @classmethod
    def from_bytes(cls, blob: bytes, seed: int = 0) -> "ShotBatch":
        if blob[:4] != _MAGIC:
            raise ValueError("bad magic in shot batch")
        dcount, kcount, s = np.frombuffer(blob[4:16], dtype="<u4")
        dbytes = (int(dcount) + 7) // 8
        kbytes = (int(kcount) + 7) // 8
        off = 16
        det = np.frombuffer(blob[off : off + s * dbytes], dtype=np.uint8).reshape(int(s), dbytes)
        off += int(s) * dbytes
        obs = np.frombuffer(blob[off : off + s * kbytes], dtype=np.uint8).reshape(int(s), kbytes)
        det = np.unpackbits(det, axis=1, bitorder="little")[:, : int(dcount)]
        obs = np.unpackbits(obs, axis=1, bitorder="little")[:, : int(kcount)]
        return cls(detectors=det, observables=obs, seed=seed)


# ── frame propagation core ───────────────────────────────────────────


def _apply_depol1(rng, p, x, z, cols):
    if p <= 0 or len(cols) == 0:
        return
    r = rng.random((x.shape[0], len(cols)))
    hit = r < p
    comp = np.floor_divide(r, p / 3.0, where=hit, out=np.zeros_like(r)).astype(np.int8)
    flip_x = hit & (comp <= 1)  # X or Y
    flip_z = hit & (comp >= 1)  # Y or Z
    x[:, cols] ^= flip_x
    z[:, cols] ^= flip_z


def _apply_depol2(rng, p, x, z, left, right):
    if p <= 0 or len(left) == 0:
        return
    r = rng.random((x.shape[0], len(left)))
    hit = r < p
    comp = np.floor_divide(r, p / 15.0, where=hit, out=np.zeros_like(r)).astype(np.int8) + 1
    comp[~hit] = 0  # 0 = II, 1..15 = the nontrivial two-qubit Paulis
    pa, pb = comp >> 2, comp & 3
    x[:, left] ^= (pa == 1) | (pa == 2)
    z[:, left] ^= (pa == 2) | (pa == 3)
    x[:, right] ^= (pb == 1) | (pb == 2)
    z[:, right] ^= (pb == 2) | (pb == 3)


def _run_frames(
    prog: MemoryCircuit,
    p: float,
    shots: int,
    rng,
    injections: dict | None = None,
):
    """Propagate `shots` frames through the program, returning raw outcomes.

    ``injections`` maps step index -> (rows, qubits, pauli) applied after
    that step's operation and noise (used for DEM extraction); key "flip"
    maps to per-slot outcome flips (rows, slots).
    """
    nq = prog.n_qubits
    x = np.zeros((shots, nq), dtype=bool)
    z = np.zeros((shots, nq), dtype=bool)
    outcomes = np.zeros((shots, prog.n_meas), dtype=bool)
    inj = injections or {}
    for si, st in enumerate(prog.steps):
        if st.kind == "gate":
            if len(st.cx_ctrl):
                x[:, st.cx_tgt] ^= x[:, st.cx_ctrl]
                z[:, st.cx_ctrl] ^= z[:, st.cx_tgt]
            if len(st.cz_a):
                z[:, st.cz_b] ^= x[:, st.cz_a]
                z[:, st.cz_a] ^= x[:, st.cz_b]
            _apply_depol2(rng, p, x, z, st.pair_left, st.pair_right)
            _apply_depol1(rng, p, x, z, st.idle)
        elif st.kind == "prep":
            x[:, st.targets] = False
            z[:, st.targets] = False
            _apply_depol1(rng, p, x, z, st.targets)
            _apply_depol1(rng, p, x, z, st.idle)
        elif st.kind == "mr":
            out = z[:, st.targets].copy()  # X-basis outcome flips under Z
            if p > 0:
                out ^= rng.random(out.shape) < p
            outcomes[:, st.slots] = out
            x[:, st.targets] = False
            z[:, st.targets] = False
            _apply_depol1(rng, p, x, z, st.targets)
            _apply_depol1(rng, p, x, z, st.idle)
        elif st.kind == "readout":
            frame = x if st.basis == "Z" else z
            out = frame[:, st.targets].copy()
            if p > 0:
                out ^= rng.random(out.shape) < p
            outcomes[:, st.slots] = out
        elif st.kind == "shift":
            _apply_depol1(rng, p, x, z, st.idle)
        if si in inj:
            xr, xq, zr, zq = inj[si]
            if len(xr):
                x[xr, xq] ^= True
            if len(zr):
                z[zr, zq] ^= True
    if "flip" in inj:
        rows, slots = inj["flip"]
        outcomes[rows, slots] ^= True
    return outcomes


def _assemble(prog: MemoryCircuit, outcomes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    shots = outcomes.shape[0]
    det = np.zeros((shots, prog.num_detectors), dtype=np.uint8)
    for i, slots in enumerate(prog.detectors):
        det[:, i] = np.logical_xor.reduce(outcomes[:, list(slots)], axis=1)
    obs = np.zeros((shots, prog.num_observables), dtype=np.uint8)
    for j, slots in enumerate(prog.observables):
        obs[:, j] = np.logical_xor.reduce(outcomes[:, list(slots)], axis=1)
    return det, obs


def pauli_frame_sample(
    noisy: NoisyCircuit, shots: int, seed: int, workers: int = 1
) -> ShotBatch:
    """Monte Carlo detector/observable samples, reproducible per seed.

    Shots are processed in fixed-size chunks seeded by
    SeedSequence([seed, chunk]), so the result is byte-identical for any
    worker count.
    """
    prog = noisy.program
    if not prog.detectors and prog.experiment is None:
        raise ValueError("cannot sample a bare circuit: no detectors defined")
    if shots < 1:
        raise ValueError("shots must be >= 1")
    det = np.zeros((shots, prog.num_detectors), dtype=np.uint8)
    obs = np.zeros((shots, prog.num_observables), dtype=np.uint8)
    chunks = [(ci, lo, min(lo + SAMPLE_CHUNK, shots)) for ci, lo in enumerate(range(0, shots, SAMPLE_CHUNK))]

    def run(chunk):
        ci, lo, hi = chunk
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, ci])))
        outcomes = _run_frames(prog, noisy.p, hi - lo, rng)
        det[lo:hi], obs[lo:hi] = _assemble(prog, outcomes)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, chunks))
    else:
        for chunk in chunks:
            run(chunk)
    return ShotBatch(detectors=det, observables=obs, seed=seed)


# ── detector error model ─────────────────────────────────────────────


@dataclass
class DetectorErrorModel:
    """Fault-to-detector/observable incidence with per-fault priors."""

    num_detectors: int
    num_observables: int
    det_lists: list
    obs_lists: list
    priors: np.ndarray

    @property
    def num_faults(self) -> int:
        return len(self.det_lists)

    def to_text(self) -> str:
        lines = [f"# dem D={self.num_detectors} K={self.num_observables}"]
        for dets, obs, p in zip(self.det_lists, self.obs_lists, self.priors):
            parts = [f"error({p:.10g})"]
            parts += [f"D{i}" for i in dets]
            parts += [f"L{j}" for j in obs]
            lines.append(" ".join(parts))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "DetectorErrorModel":
        dcount = kcount = 0
        det_lists, obs_lists, priors = [], [], []
        for raw in text.splitlines():
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                for tok in line[1:].split():
                    if tok.startswith("D="):
                        dcount = int(tok[2:])
                    elif tok.startswith("K="):
                        kcount = int(tok[2:])
                continue
            tokens = line.split()
            if not tokens[0].startswith("error(") or not tokens[0].endswith(")"):
                raise ValueError(f"malformed DEM line {line!r}")
            priors.append(float(tokens[0][6:-1]))
            det_lists.append(tuple(int(t[1:]) for t in tokens[1:] if t[0] == "D"))
            obs_lists.append(tuple(int(t[1:]) for t in tokens[1:] if t[0] == "L"))
        return cls(dcount, kcount, det_lists, obs_lists, np.array(priors))


_PAULI1 = ("X", "Y", "Z")
_PAULI2 = [
    (pa, pb)
    for pa in ("I", "X", "Y", "Z")
    for pb in ("I", "X", "Y", "Z")
    if not (pa == "I" and pb == "I")
]


def _elementary_faults(noisy: NoisyCircuit):
    """(step, [(qubit, pauli), ...], flip_slot, prior) per fault component."""
    p = noisy.p
    for loc in noisy.fault_locations():
        if loc.kind == "gate2":
            left, right = loc.which
            for pa, pb in _PAULI2:
                ops = [(q, pl) for q, pl in ((left, pa), (right, pb)) if pl != "I"]
                yield (loc.step, ops, None, p / 15.0)
        elif loc.kind in ("prep", "reset", "idle"):
            (q,) = loc.which
            for pl in _PAULI1:
                yield (loc.step, [(q, pl)], None, p / 3.0)
        elif loc.kind == "meas_flip":
            (slot,) = loc.which
            yield (loc.step, [], slot, p)


def extract_dem(noisy: NoisyCircuit) -> DetectorErrorModel:
    """Propagate every elementary fault to its detector/observable signature.

    Faults with identical signatures merge with combined prior
    p' = p1 (1 - p2) + p2 (1 - p1); faults with empty signatures drop.
    """
    prog = noisy.program
    if noisy.p <= 0:
        return DetectorErrorModel(prog.num_detectors, prog.num_observables, [], [], np.zeros(0))
    faults = list(_elementary_faults(noisy))
    merged: dict[tuple, float] = {}
    order: list[tuple] = []
    for lo in range(0, len(faults), DEM_CHUNK):
        chunk = faults[lo : lo + DEM_CHUNK]
        by_step: dict[int, list] = {}
        flip_rows, flip_slots = [], []
        for row, (step, ops, flip_slot, _prior) in enumerate(chunk):
            for q, pl in ops:
                by_step.setdefault(step, []).append((row, q, pl))
            if flip_slot is not None:
                flip_rows.append(row)
                flip_slots.append(flip_slot)
        injections: dict = {}
        for step, entries in by_step.items():
            xr = [r for r, q, pl in entries if pl in ("X", "Y")]
            xq = [q for r, q, pl in entries if pl in ("X", "Y")]
            zr = [r for r, q, pl in entries if pl in ("Z", "Y")]
            zq = [q for r, q, pl in entries if pl in ("Z", "Y")]
            injections[step] = (np.array(xr, dtype=int), np.array(xq, dtype=int), np.array(zr, dtype=int), np.array(zq, dtype=int))
        if flip_rows:
            injections["flip"] = (np.array(flip_rows), np.array(flip_slots))
        rng = np.random.Generator(np.random.PCG64(0))
        outcomes = _run_frames(prog, 0.0, len(chunk), rng, injections=injections)
        det, obs = _assemble(prog, outcomes)
        for row, (_step, _ops, _flip, prior) in enumerate(chunk):
            sig = (tuple(np.nonzero(det[row])[0].tolist()), tuple(np.nonzero(obs[row])[0].tolist()))
            if sig == ((), ()):
                continue
            if sig in merged:
                p1, p2 = merged[sig], prior
                merged[sig] = p1 * (1 - p2) + p2 * (1 - p1)
            else:
                merged[sig] = prior
                order.append(sig)
    det_lists = [sig[0] for sig in order]
    obs_lists = [sig[1] for sig in order]
    priors = np.array([merged[sig] for sig in order])
    return DetectorErrorModel(prog.num_detectors, prog.num_observables, det_lists, obs_lists, priors)


def propagate_injection(prog: MemoryCircuit, step: int, ops: list) -> tuple[np.ndarray, np.ndarray]:
    """Detector/observable signature of one hand-built fault (test hook).

    ``ops`` is a list of distinct (sim qubit, pauli) applied after ``step``.
    """
    xq = [q for q, pl in ops if pl in ("X", "Y")]
    zq = [q for q, pl in ops if pl in ("Z", "Y")]
    injections = {
        step: (
            np.zeros(len(xq), dtype=int),
            np.array(xq, dtype=int),
            np.zeros(len(zq), dtype=int),
            np.array(zq, dtype=int),
        )
    }
    rng = np.random.Generator(np.random.PCG64(0))
    outcomes = _run_frames(prog, 0.0, 1, rng, injections=injections)
    det, obs = _assemble(prog, outcomes)
    return det[0], obs[0]


def dem_detector_rates(dem: DetectorErrorModel) -> np.ndarray:
    """Exact marginal firing probability per detector.

    Independent faults XOR into a detector, so
    P(fire) = (1 - prod(1 - 2 p_f)) / 2 over incident faults.
    """
    acc = np.ones(dem.num_detectors)
    for dets, p in zip(dem.det_lists, dem.priors):
        for i in dets:
            acc[i] *= 1.0 - 2.0 * p
    return (1.0 - acc) / 2.0


def sample_dem(dem: DetectorErrorModel, shots: int, seed: int) -> ShotBatch:
    """Sample detector/observable bits directly from the error model."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed])))
    det = np.zeros((shots, dem.num_detectors), dtype=np.uint8)
    obs = np.zeros((shots, dem.num_observables), dtype=np.uint8)
    hits = rng.random((shots, dem.num_faults)) < dem.priors[None, :]
    for f in range(dem.num_faults):
        rows = hits[:, f]
        for i in dem.det_lists[f]:
            det[rows, i] ^= 1
        for j in dem.obs_lists[f]:
            obs[rows, j] ^= 1
    return ShotBatch(detectors=det, observables=obs, seed=seed)


# ── stabilizer-circuit text export ───────────────────────────────────


def emit_stim_text(mem: MemoryCircuit, model: NoiseModel | None = None) -> str:
    """Export to the widely used stabilizer-circuit text dialect.

    Gate set: R/RX preparations, CX/CZ, MRX measure-resets, final M/MX
    readout, DEPOLARIZE1/2 noise, DETECTOR/OBSERVABLE_INCLUDE records.
    Detector and observable placement matches the native conventions, so
    a third-party sampler consuming this text reproduces the same bit
    streams.
    """
    exp = mem.experiment
    if exp is None:
        raise ValueError("stabilizer export needs a memory experiment")
    p = model.p if model is not None else 0.0
    nd = 2 * exp.code.a * exp.code.b
    lines: list[str] = []

    def ids(arr) -> str:
        return " ".join(str(int(q)) for q in arr)

    def noise1(arr):
        if p > 0 and len(arr):
            lines.append(f"DEPOLARIZE1({p}) " + ids(arr))

    for st in mem.steps:
        if st.kind == "prep":
            data = st.targets[st.targets < nd]
            anc = st.targets[st.targets >= nd]
            if len(data):
                lines.append(("R " if exp.basis == "Z" else "RX ") + ids(data))
            lines.append("RX " + ids(anc))
            noise1(st.targets)
            noise1(st.idle)
        elif st.kind == "gate":
            if len(st.cx_ctrl):
                lines.append("CX " + " ".join(f"{c} {t}" for c, t in zip(st.cx_ctrl, st.cx_tgt)))
            if len(st.cz_a):
                lines.append("CZ " + " ".join(f"{a_} {b_}" for a_, b_ in zip(st.cz_a, st.cz_b)))
            if p > 0:
                lines.append(
                    f"DEPOLARIZE2({p}) "
                    + " ".join(f"{l} {r}" for l, r in zip(st.pair_left, st.pair_right))
                )
            noise1(st.idle)
        elif st.kind == "mr":
            flip = f"({p})" if p > 0 else ""
            lines.append(f"MRX{flip} " + ids(st.targets))
            noise1(st.targets)
            noise1(st.idle)
        elif st.kind == "shift":
            noise1(st.idle)
        elif st.kind == "readout":
            flip = f"({p})" if p > 0 else ""
            op = "M" if st.basis == "Z" else "MX"
            lines.append(f"{op}{flip} " + ids(st.targets))
            noise1(st.idle)
        lines.append("TICK")
    total = mem.n_meas
    for slots in mem.detectors:
        recs = " ".join(f"rec[{s - total}]" for s in slots)
        lines.append(f"DETECTOR {recs}")
    for j, slots in enumerate(mem.observables):
        recs = " ".join(f"rec[{s - total}]" for s in slots)
        lines.append(f"OBSERVABLE_INCLUDE({j}) {recs}")
    return "\n".join(lines) + "\n"
