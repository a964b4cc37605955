"""Syndrome-extraction circuits for cyclic hypergraph product codes.

Two scheduling variants are generated from the same gate set:

* the *modular* circuit interleaves every two-qubit gate layer with a
  cyclic shift of the ancilla row, for hardware whose ancillae move as a
  block (depth (2wA + 2wB + 2) d + 2wA + 1);
* the *packed* circuit drops the shifts, leaving a maximally packed
  schedule for monolithic devices (depth (wA + wB + 2) d + wA + 1).

Layer model: a circuit is an ordered list of layers; each layer is a
preparation, a combined two-qubit gate timestep (CX pairs and CZ pairs
acting on disjoint qubits), a measure-reset, or a cyclic shift, and each
layer costs exactly one unit of depth.

Data qubits are indexed u = ab*i + b*j + k for (i, j, k) in
Z2 x Za x Zb; ancillae are indexed v = b*s + t within their type, with X
ancillae occupying ids [0, ab) and Z ancillae [ab, 2ab).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .codes import CxcCode


# ── index maps ───────────────────────────────────────────────────────


def data_index(a: int, b: int, i: int, j: int, k: int) -> int:
    if not (0 <= i < 2 and 0 <= j < a and 0 <= k < b):
        raise IndexError(f"data tuple ({i}, {j}, {k}) out of range for a={a}, b={b}")
    return a * b * i + b * j + k


def data_tuple(a: int, b: int, u: int) -> tuple[int, int, int]:
    if not 0 <= u < 2 * a * b:
        raise IndexError(f"data index {u} out of range")
    i, r = divmod(u, a * b)
    j, k = divmod(r, b)
    return (i, j, k)


def ancilla_index(a: int, b: int, r: str, s: int, t: int) -> int:
    if r not in ("X", "Z") or not (0 <= s < a and 0 <= t < b):
        raise IndexError(f"ancilla tuple ({r}, {s}, {t}) out of range for a={a}, b={b}")
    return (0 if r == "X" else a * b) + b * s + t


def ancilla_tuple(a: int, b: int, v: int) -> tuple[str, int, int]:
    if not 0 <= v < 2 * a * b:
        raise IndexError(f"ancilla index {v} out of range")
    r = "X" if v < a * b else "Z"
    s, t = divmod(v % (a * b), b)
    return (r, s, t)


# ── layers ───────────────────────────────────────────────────────────


@dataclass(frozen=True)
class PrepPlus:
    ancillas: tuple[int, ...]


@dataclass(frozen=True)
class MeasureResetX:
    ancillas: tuple[int, ...]


@dataclass(frozen=True)
class CyclicShift:
    chi: int
    eta: int
    zeta: int


@dataclass(frozen=True)
class GateLayer:
    """One two-qubit timestep: CX pairs (X ancilla control, data target)
    and CZ pairs (Z ancilla listed first), all supports disjoint."""

    cx: tuple[tuple[int, int], ...] = ()
    cz: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        seen_anc: set[int] = set()
        seen_data: set[int] = set()
        for anc, q in self.cx + self.cz:
            if anc in seen_anc or q in seen_data:
                raise ValueError("qubit appears twice within one gate layer")
            seen_anc.add(anc)
            seen_data.add(q)


Layer = PrepPlus | MeasureResetX | CyclicShift | GateLayer


@dataclass
class Circuit:
    a: int
    b: int
    rounds: int
    variant: str
    layers: list = field(default_factory=list)
    code: CxcCode | None = None

    @property
    def num_data(self) -> int:
        return 2 * self.a * self.b

    @property
    def num_ancilla(self) -> int:
        return 2 * self.a * self.b

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Circuit)
            and (self.a, self.b, self.rounds, self.variant) == (other.a, other.b, other.rounds, other.variant)
            and self.layers == other.layers
        )


def circuit_depth(circuit: Circuit) -> int:
    """Number of layers; prep, gate, measure-reset and shift all cost one."""
    return len(circuit.layers)


# ── monomial incidence ───────────────────────────────────────────────


def monomial_incidence(code: CxcCode, exponent: int, which: str) -> list[tuple[int, int]]:
    """(ancilla, data) pairs realized by one monomial of a seed polynomial.

    ``which`` selects the parity-check block: "A" and "B" couple X
    ancillae (CX gates), "AT" and "BT" couple Z ancillae (CZ gates).
    Exactly a*b pairs are returned, sorted by ancilla id.
    """
    a, b = code.a, code.b
    if which in ("A", "AT"):
        support = code.poly_a.support
    elif which in ("B", "BT"):
        support = code.poly_b.support
    else:
        raise ValueError(f"unknown block {which!r}")
    if exponent not in support:
        raise ValueError(f"exponent {exponent} not in the {which} support {support}")
    pairs = []
    for s in range(a):
        for t in range(b):
            if which == "A":
                pairs.append((ancilla_index(a, b, "X", s, t), data_index(a, b, 0, (s + exponent) % a, t)))
            elif which == "AT":
                pairs.append((ancilla_index(a, b, "Z", (s + exponent) % a, t), data_index(a, b, 1, s, t)))
            elif which == "B":
                pairs.append((ancilla_index(a, b, "X", s, t), data_index(a, b, 1, s, (t + exponent) % b)))
            else:  # BT
                pairs.append((ancilla_index(a, b, "Z", s, (t + exponent) % b), data_index(a, b, 0, s, t)))
    pairs.sort()
    return pairs


# ── generators ───────────────────────────────────────────────────────


def _generate(code: CxcCode, d: int, with_shifts: bool) -> Circuit:
    if d < 1:
        raise ValueError(f"rounds must be >= 1, got {d}")
    a, b = code.a, code.b
    ab = a * b
    x_ancillas = tuple(range(ab))
    z_ancillas = tuple(range(ab, 2 * ab))
    variant = "modular" if with_shifts else "packed"
    circ = Circuit(a=a, b=b, rounds=d, variant=variant, code=code)
    lay = circ.layers
    lay.append(PrepPlus(x_ancillas + z_ancillas))
    for l in range(d + 1):
        for eta in code.poly_a.support:
            if with_shifts:
                lay.append(CyclicShift(0, eta, 0))
            cx = tuple(monomial_incidence(code, eta, "A")) if l < d else ()
            cz = tuple(monomial_incidence(code, eta, "AT")) if l > 0 else ()
            lay.append(GateLayer(cx=cx, cz=cz))
        if l > 0:
            lay.append(MeasureResetX(z_ancillas))
        if l < d:
            for zeta in code.poly_b.support:
                if with_shifts:
                    lay.append(CyclicShift(1, 0, zeta))
                lay.append(
                    GateLayer(
                        cx=tuple(monomial_incidence(code, zeta, "B")),
                        cz=tuple(monomial_incidence(code, zeta, "BT")),
                    )
                )
            lay.append(MeasureResetX(x_ancillas))
    return circ


def gen_modular_circuit(code: CxcCode, rounds: int) -> Circuit:
    """The shift-interleaved schedule; d + 1 outer iterations with the
    first and last guarded so exactly ``rounds`` rounds of each check
    type are measured."""
    return _generate(code, rounds, with_shifts=True)


def gen_packed_circuit(code: CxcCode, rounds: int) -> Circuit:
    """The modular schedule with every shift layer removed."""
    return _generate(code, rounds, with_shifts=False)


def modular_depth_formula(code: CxcCode, d: int) -> int:
    wa, wb = code.poly_a.weight, code.poly_b.weight
    return (2 * wa + 2 * wb + 2) * d + 2 * wa + 1


def packed_depth_formula(code: CxcCode, d: int) -> int:
    wa, wb = code.poly_a.weight, code.poly_b.weight
    return (wa + wb + 2) * d + wa + 1


def count_two_qubit_gates(circuit: Circuit) -> int:
    return sum(len(l.cx) + len(l.cz) for l in circuit.layers if isinstance(l, GateLayer))


# ── shift schedule ───────────────────────────────────────────────────


@dataclass(frozen=True)
class ShiftRecord:
    layer_index: int
    target: tuple[int, int, int]
    delta: tuple[int, int, int]
    distances: tuple[int, int, int]

    @property
    def total_distance(self) -> int:
        return sum(self.distances)


@dataclass
class ShiftSchedule:
    """Ordered shift layers with transport-distance accounting.

    A shift labelled (chi, eta, zeta) translates the ancilla row over
    distances (ab*chi, b*eta, zeta) with periods (2ab, ab, b); the X and
    Z ancilla sub-rows translate in opposite chiral senses, recorded in
    ``chirality_note``.  ``delta`` tracks the offset change relative to
    the previous alignment state, reduced modulo (2, a, b).
    """

    shifts: list[ShiftRecord]
    chirality_note: str = "X and Z ancilla rows translate in opposite chiral senses"

    @property
    def total_distance(self) -> int:
        return sum(s.total_distance for s in self.shifts)

    def __len__(self) -> int:
        return len(self.shifts)


def shift_schedule(circuit: Circuit) -> ShiftSchedule:
    """Extract the cyclic-shift layers of a modular circuit.

    Raises ValueError on a packed circuit (it has no shifts).
    """
    a, b = circuit.a, circuit.b
    ab = a * b
    records = []
    state = (0, 0, 0)
    for idx, layer in enumerate(circuit.layers):
        if not isinstance(layer, CyclicShift):
            continue
        target = (layer.chi, layer.eta, layer.zeta)
        delta = (
            (target[0] - state[0]) % 2,
            (target[1] - state[1]) % a,
            (target[2] - state[2]) % b,
        )
        records.append(
            ShiftRecord(
                layer_index=idx,
                target=target,
                delta=delta,
                distances=(ab * target[0], b * target[1], target[2]),
            )
        )
        state = target
    if not records:
        raise ValueError(f"{circuit.variant} circuit has no shift layers")
    return ShiftSchedule(shifts=records)


def shift_alignment(shift: CyclicShift, a: int, b: int) -> dict:
    """Qubit alignments realized by a shift state (chi, eta, zeta).

    Returns maps ancilla id -> data id for the X row
    (a_(X,s,t) <-> q_(chi, s+eta, t+zeta)) and for the Z row
    (a_(Z,s+eta,t+zeta) <-> q_(1-chi, s, t)).
    """
    x_map = {}
    z_map = {}
    for s in range(a):
        for t in range(b):
            x_map[ancilla_index(a, b, "X", s, t)] = data_index(
                a, b, shift.chi, (s + shift.eta) % a, (t + shift.zeta) % b
            )
            z_map[ancilla_index(a, b, "Z", (s + shift.eta) % a, (t + shift.zeta) % b)] = data_index(
                a, b, 1 - shift.chi, s, t
            )
    return {"X": x_map, "Z": z_map}


# ── noiseless frame semantics (shared with the noisy simulator) ──────
#
# Frames are boolean arrays of shape (shots, 4ab): data qubits occupy
# [0, 2ab) and ancillae [2ab, 4ab).  Conjugation through the Clifford
# layers follows CX: X_c -> X_c X_t, Z_t -> Z_c Z_t and
# CZ: X_1 -> X_1 Z_2, X_2 -> Z_1 X_2.


def ancilla_sim_index(circuit_or_ab, anc_id: int) -> int:
    nd = circuit_or_ab.num_data if isinstance(circuit_or_ab, Circuit) else circuit_or_ab
    return nd + anc_id


def apply_gate_layer(layer: GateLayer, x: np.ndarray, z: np.ndarray, num_data: int) -> None:
    if layer.cx:
        ctrl = np.array([num_data + anc for anc, _ in layer.cx])
        tgt = np.array([q for _, q in layer.cx])
        x[:, tgt] ^= x[:, ctrl]
        z[:, ctrl] ^= z[:, tgt]
    if layer.cz:
        p1 = np.array([num_data + anc for anc, _ in layer.cz])
        p2 = np.array([q for _, q in layer.cz])
        z[:, p2] ^= x[:, p1]
        z[:, p1] ^= x[:, p2]


@dataclass
class DetectorMapReport:
    code_label: str
    variant: str
    rounds: int
    checked: int
    mismatches: list

    @property
    def passed(self) -> bool:
        return not self.mismatches


def verify_detector_map(code: CxcCode, circuit: Circuit) -> DetectorMapReport:
    """Check that the noiseless circuit measures exactly H_X and H_Z.

    Every single data-qubit X (resp. Z) fault, injected at the boundary
    after the first measured round, must flip exactly the Z-type (resp.
    X-type) outcomes given by the corresponding column of H_Z (resp.
    H_X) in the first affected round and in every round after it (the
    fault persists), and nothing before.

    Needs rounds >= 3 so that both data blocks have a full downstream
    round regardless of the interleaving offset.
    """
    if circuit.rounds < 3:
        raise ValueError("verify_detector_map needs a circuit with rounds >= 3")
    a, b = code.a, code.b
    ab = a * b
    nd = 2 * ab
    nq = 4 * ab
    hz_cols = code.h_z.to_dense()
    hx_cols = code.h_x.to_dense()

    # One frame per (data qubit, Pauli type): X faults first, then Z.
    S = 2 * nd
    x = np.zeros((S + 1, nq), dtype=bool)  # final row: no-fault reference
    z = np.zeros((S + 1, nq), dtype=bool)

    # Locate the injection boundary: right after the first MeasureResetX
    # of X ancillae (end of outer iteration l = 0).
    boundary = None
    for idx, layer in enumerate(circuit.layers):
        if isinstance(layer, MeasureResetX) and layer.ancillas[0] < ab:
            boundary = idx + 1
            break
    assert boundary is not None

    # Per-frame outcome flips: (type, check index) -> list of rounds.
    per_frame: list[dict[tuple[str, int], list[int]]] = [{} for _ in range(S + 1)]
    rounds_seen = {"X": 0, "Z": 0}
    injected = False
    for idx, layer in enumerate(circuit.layers):
        if idx == boundary:
            x[np.arange(nd), np.arange(nd)] = True
            z[nd + np.arange(nd), np.arange(nd)] = True
            injected = True
        if isinstance(layer, GateLayer):
            apply_gate_layer(layer, x, z, nd)
        elif isinstance(layer, MeasureResetX):
            typ = "X" if layer.ancillas[0] < ab else "Z"
            rnd = rounds_seen[typ]
            rounds_seen[typ] += 1
            cols = np.array([nd + v for v in layer.ancillas])
            outcome_flips = z[:, cols]  # Z frame flips an X-basis outcome
            frames, which = np.nonzero(outcome_flips)
            for f, w in zip(frames.tolist(), which.tolist()):
                per_frame[f].setdefault((typ, layer.ancillas[w] % ab), []).append(rnd)
            x[:, cols] = False
            z[:, cols] = False
        # PrepPlus only occurs before the boundary; shifts are bookkeeping.
    assert injected

    mismatches = []
    total_rounds = {"X": rounds_seen["X"], "Z": rounds_seen["Z"]}

    def expected_map(frame: int) -> tuple[str, np.ndarray]:
        if frame < nd:
            return "Z", np.nonzero(hz_cols[:, frame])[0]
        return "X", np.nonzero(hx_cols[:, frame - nd])[0]

    if per_frame[S]:
        mismatches.append((S, None, None, sorted(per_frame[S]), "no-fault frame flipped"))

    for f in range(S):
        typ, col = expected_map(f)
        got = {v: rounds for (tt, v), rounds in per_frame[f].items() if tt == typ}
        wrong_type = [(tt, v) for (tt, v) in per_frame[f] if tt != typ]
        if wrong_type:
            mismatches.append((f, typ, None, wrong_type, "opposite-type outcomes flipped"))
        if set(got) != set(col.tolist()):
            mismatches.append((f, typ, sorted(got), sorted(col.tolist()), "flip set != check column"))
            continue
        firsts = {min(r) for r in got.values()}
        if len(firsts) != 1:
            mismatches.append((f, typ, sorted(got), None, "column flips split across rounds"))
            continue
        first = firsts.pop()
        for v, rounds in got.items():
            if rounds != list(range(first, total_rounds[typ])):
                mismatches.append((f, typ, v, rounds, "fault did not persist to every later round"))
    return DetectorMapReport(
        code_label=repr(code),
        variant=circuit.variant,
        rounds=circuit.rounds,
        checked=S,
        mismatches=mismatches,
    )


# ── text emission ────────────────────────────────────────────────────


def emit_text(circuit: Circuit) -> str:
    """One layer per line; combined gate layers emit CX pairs then CZ pairs."""
    lines = [
        f"# chgp-circuit a={circuit.a} b={circuit.b} rounds={circuit.rounds} variant={circuit.variant}"
    ]
    for layer in circuit.layers:
        if isinstance(layer, PrepPlus):
            lines.append("PREP_PLUS " + " ".join(f"a{v}" for v in layer.ancillas))
        elif isinstance(layer, MeasureResetX):
            lines.append("MR_X " + " ".join(f"a{v}" for v in layer.ancillas))
        elif isinstance(layer, CyclicShift):
            lines.append(f"SHIFT {layer.chi} {layer.eta} {layer.zeta}")
        elif isinstance(layer, GateLayer):
            parts = []
            if layer.cx:
                parts.append("CX " + " ".join(f"(a{c},q{t})" for c, t in layer.cx))
            if layer.cz:
                parts.append("CZ " + " ".join(f"(a{c},q{t})" for c, t in layer.cz))
            lines.append(" ".join(parts))
        else:
            raise TypeError(f"unknown layer {layer!r}")
    return "\n".join(lines) + "\n"


def _parse_pairs(tokens: list[str]) -> tuple[tuple[int, int], ...]:
    pairs = []
    for tok in tokens:
        inner = tok.strip("()")
        left, right = inner.split(",")
        if not (left.startswith("a") and right.startswith("q")):
            raise ValueError(f"malformed pair {tok!r}")
        pairs.append((int(left[1:]), int(right[1:])))
    return tuple(pairs)


def parse_text(text: str) -> Circuit:
    a = b = rounds = None
    variant = "packed"
    layers: list = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            for tok in line[1:].split():
                if "=" in tok:
                    key, val = tok.split("=", 1)
                    if key == "a":
                        a = int(val)
                    elif key == "b":
                        b = int(val)
                    elif key == "rounds":
                        rounds = int(val)
                    elif key == "variant":
                        variant = val
            continue
        tokens = line.split()
        op = tokens[0]
        if op == "PREP_PLUS":
            layers.append(PrepPlus(tuple(int(t[1:]) for t in tokens[1:])))
        elif op == "MR_X":
            layers.append(MeasureResetX(tuple(int(t[1:]) for t in tokens[1:])))
        elif op == "SHIFT":
            layers.append(CyclicShift(int(tokens[1]), int(tokens[2]), int(tokens[3])))
        elif op == "CX":
            if "CZ" in tokens:
                cut = tokens.index("CZ")
                layers.append(
                    GateLayer(cx=_parse_pairs(tokens[1:cut]), cz=_parse_pairs(tokens[cut + 1 :]))
                )
            else:
                layers.append(GateLayer(cx=_parse_pairs(tokens[1:])))
        elif op == "CZ":
            layers.append(GateLayer(cz=_parse_pairs(tokens[1:])))
        else:
            raise ValueError(f"unknown instruction {op!r}")
    if a is None or b is None or rounds is None:
        raise ValueError("missing circuit header line")
    return Circuit(a=a, b=b, rounds=rounds, variant=variant, layers=layers)


# ── packing structure ────────────────────────────────────────────────


@dataclass
class PackingReport:
    full_layers: int
    half_layers: int
    violations: list

    @property
    def passed(self) -> bool:
        return not self.violations


def packing_report(circuit: Circuit) -> PackingReport:
    """Coverage structure of the two-qubit layers of a packed circuit.

    Interior layers must touch all 2ab data qubits and all 2ab ancillae
    exactly once, with CX and CZ on opposite data blocks (the round
    interleaving of the packed schedule); the boundary layers forced by
    the first/last iteration guards are CX- or CZ-only and cover exactly
    one block.  Any other shape is a violation.
    """
    ab = circuit.a * circuit.b
    full = half = 0
    violations = []
    for idx, layer in enumerate(circuit.layers):
        if not isinstance(layer, GateLayer):
            continue
        data = [q for _, q in layer.cx] + [q for _, q in layer.cz]
        ancs = [v for v, _ in layer.cx] + [v for v, _ in layer.cz]
        if len(set(data)) != len(data) or len(set(ancs)) != len(ancs):
            violations.append((idx, "qubit touched twice"))
            continue
        if layer.cx and layer.cz:
            cx_blocks = {q // ab for _, q in layer.cx}
            cz_blocks = {q // ab for _, q in layer.cz}
            if len(data) != 2 * ab or len(ancs) != 2 * ab:
                violations.append((idx, f"interior layer covers {len(data)} data, {len(ancs)} ancillae"))
            elif len(cx_blocks) != 1 or len(cz_blocks) != 1 or cx_blocks == cz_blocks:
                violations.append((idx, "CX and CZ do not target opposite data blocks"))
            else:
                full += 1
        else:
            if len(data) != ab or len(ancs) != ab:
                violations.append((idx, f"boundary layer covers {len(data)} data, {len(ancs)} ancillae"))
            else:
                half += 1
    return PackingReport(full_layers=full, half_layers=half, violations=violations)
