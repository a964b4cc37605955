import numpy as np
import pytest

from chgp.circuits import (
    Circuit,
    CyclicShift,
    GateLayer,
    MeasureResetX,
    PrepPlus,
    ancilla_index,
    ancilla_tuple,
    circuit_depth,
    count_two_qubit_gates,
    data_index,
    data_tuple,
    emit_text,
    gen_modular_circuit,
    gen_packed_circuit,
    modular_depth_formula,
    monomial_incidence,
    packed_depth_formula,
    packing_report,
    parse_text,
    shift_alignment,
    shift_schedule,
    verify_detector_map,
)
from chgp.codes import build_cxc, build_cxr
from chgp.gf2 import CyclicPoly


def rep(n):
    return CyclicPoly(n, (0, 1))


def toric(d):
    return build_cxc(d, d, rep(d), rep(d))


CODE_240 = build_cxr(CyclicPoly(15, (0, 1, 4)))  # [[240,8,8]], wA=3, wB=2


# ── index maps ───────────────────────────────────────────────────────


def test_data_index_formula():
    a, b = 3, 5
    assert data_index(a, b, 1, 2, 4) == 15 * 1 + 5 * 2 + 4
    for u in range(2 * a * b):
        assert data_index(a, b, *data_tuple(a, b, u)) == u


def test_ancilla_index_roundtrip():
    a, b = 4, 3
    for v in range(2 * a * b):
        r, s, t = ancilla_tuple(a, b, v)
        assert ancilla_index(a, b, r, s, t) == v
    assert ancilla_index(a, b, "Z", 0, 0) == a * b


def test_index_bounds():
    with pytest.raises(IndexError):
        data_index(3, 3, 2, 0, 0)
    with pytest.raises(IndexError):
        ancilla_tuple(3, 3, 18)


# ── monomial incidence ───────────────────────────────────────────────


def test_incidence_identity_monomial():
    code = toric(2)
    pairs = monomial_incidence(code, 0, "A")
    assert pairs == [(ancilla_index(2, 2, "X", s, t), data_index(2, 2, 0, s, t)) for s in range(2) for t in range(2)]


def test_incidence_shift_monomial():
    code = toric(2)
    pairs = dict(monomial_incidence(code, 1, "A"))
    for t in range(2):
        assert pairs[ancilla_index(2, 2, "X", 0, t)] == data_index(2, 2, 0, 1, t)
        assert pairs[ancilla_index(2, 2, "X", 1, t)] == data_index(2, 2, 0, 0, t)


@pytest.mark.parametrize("which", ["A", "AT", "B", "BT"])
def test_incidence_pair_count(which):
    code = CODE_240
    exp = code.poly_a.support[0] if which in ("A", "AT") else code.poly_b.support[0]
    assert len(monomial_incidence(code, exp, which)) == code.a * code.b


def test_incidence_bad_exponent():
    with pytest.raises(ValueError):
        monomial_incidence(toric(2), 1, "bogus")
    with pytest.raises(ValueError):
        monomial_incidence(CODE_240, 2, "A")  # support is {0,1,4}


def test_incidence_matches_parity_checks():
    # The union of all monomial incidences reproduces H_X / H_Z exactly.
    code = CODE_240
    hx = code.h_x.to_dense()
    hz = code.h_z.to_dense()
    got_x = np.zeros_like(hx)
    for eta in code.poly_a.support:
        for anc, q in monomial_incidence(code, eta, "A"):
            got_x[anc, q] ^= 1
    for zeta in code.poly_b.support:
        for anc, q in monomial_incidence(code, zeta, "B"):
            got_x[anc, q] ^= 1
    assert np.array_equal(got_x, hx)
    got_z = np.zeros_like(hz)
    for eta in code.poly_a.support:
        for anc, q in monomial_incidence(code, eta, "AT"):
            got_z[anc - code.a * code.b, q] ^= 1
    for zeta in code.poly_b.support:
        for anc, q in monomial_incidence(code, zeta, "BT"):
            got_z[anc - code.a * code.b, q] ^= 1
    assert np.array_equal(got_z, hz)


# ── depth ────────────────────────────────────────────────────────────


def test_modular_depth_toric_d1():
    assert circuit_depth(gen_modular_circuit(toric(3), 1)) == 15


def test_modular_depth_240_d8():
    assert circuit_depth(gen_modular_circuit(CODE_240, 8)) == 12 * 8 + 7 == 103


def test_amortized_depth_per_round():
    code = CODE_240
    d5 = circuit_depth(gen_modular_circuit(code, 5))
    d4 = circuit_depth(gen_modular_circuit(code, 4))
    assert d5 - d4 == 2 * 3 + 2 * 2 + 2


def test_packed_depth_toric_d3():
    assert circuit_depth(gen_packed_circuit(toric(3), 3)) == 6 * 3 + 3 == 21


@pytest.mark.parametrize("d", [1, 2, 3, 8])
def test_depth_formulas(d):
    for code in (toric(2), CODE_240):
        assert circuit_depth(gen_modular_circuit(code, d)) == modular_depth_formula(code, d)
        assert circuit_depth(gen_packed_circuit(code, d)) == packed_depth_formula(code, d)


def test_empty_circuit_depth():
    assert circuit_depth(Circuit(a=2, b=2, rounds=0, variant="packed")) == 0


def test_modular_depth_toric_d2():
    assert circuit_depth(gen_modular_circuit(toric(2), 2)) == 25


def test_packed_is_modular_minus_shifts():
    for d in (1, 3):
        code = CODE_240
        wa, wb = 3, 2
        m = circuit_depth(gen_modular_circuit(code, d))
        p = circuit_depth(gen_packed_circuit(code, d))
        assert p == m - (wa + wb) * d - wa


def test_rounds_validation():
    with pytest.raises(ValueError):
        gen_modular_circuit(toric(2), 0)


# ── gate structure ───────────────────────────────────────────────────


@pytest.mark.parametrize("gen", [gen_modular_circuit, gen_packed_circuit])
def test_gate_count_per_round(gen):
    for d in (1, 3):
        code = toric(3)
        circ = gen(code, d)
        assert count_two_qubit_gates(circ) == 2 * code.omega * code.a * code.b * d


def test_gate_types_by_ancilla():
    circ = gen_packed_circuit(CODE_240, 2)
    ab = CODE_240.a * CODE_240.b
    for layer in circ.layers:
        if isinstance(layer, GateLayer):
            assert all(anc < ab for anc, _ in layer.cx)
            assert all(anc >= ab for anc, _ in layer.cz)


def test_gate_layer_rejects_duplicates():
    with pytest.raises(ValueError):
        GateLayer(cx=((0, 1), (0, 2)))
    with pytest.raises(ValueError):
        GateLayer(cx=((0, 1),), cz=((5, 1),))


# ── shifts ───────────────────────────────────────────────────────────


def test_shift_schedule_toric_d1():
    circ = gen_modular_circuit(toric(3), 1)
    sched = shift_schedule(circ)
    targets = [s.target for s in sched.shifts]
    assert targets[:4] == [(0, 0, 0), (0, 1, 0), (1, 0, 0), (1, 0, 1)]
    assert len(sched) == (2 + 2) * 1 + 2
    assert sched.shifts[0].total_distance == 0
    assert "opposite chiral senses" in sched.chirality_note


def test_shift_count_formula():
    sched = shift_schedule(gen_modular_circuit(CODE_240, 8))
    assert len(sched) == (3 + 2) * 8 + 3


def test_shift_distances():
    code = toric(3)
    sched = shift_schedule(gen_modular_circuit(code, 1))
    by_target = {s.target: s.distances for s in sched.shifts}
    assert by_target[(0, 1, 0)] == (0, 3, 0)
    assert by_target[(1, 0, 1)] == (9, 0, 1)


def test_shift_schedule_rejects_packed():
    with pytest.raises(ValueError):
        shift_schedule(gen_packed_circuit(toric(2), 2))


def test_gates_vertically_aligned_after_shift():
    # Every two-qubit gate in the modular circuit acts between positions
    # aligned by the preceding shift.
    code = CODE_240
    circ = gen_modular_circuit(code, 2)
    current = None
    for layer in circ.layers:
        if isinstance(layer, CyclicShift):
            current = shift_alignment(layer, code.a, code.b)
        elif isinstance(layer, GateLayer):
            assert current is not None
            for anc, q in layer.cx:
                assert current["X"][anc] == q
            for anc, q in layer.cz:
                assert current["Z"][anc] == q


# ── detector map ─────────────────────────────────────────────────────


@pytest.mark.parametrize("gen", [gen_modular_circuit, gen_packed_circuit])
def test_detector_map_toric(gen):
    code = toric(3)
    report = verify_detector_map(code, gen(code, 3))
    assert report.passed
    assert report.checked == 2 * code.n


def test_detector_map_240():
    report = verify_detector_map(CODE_240, gen_packed_circuit(CODE_240, 3))
    assert report.passed


def test_detector_map_flags_corruption():
    code = toric(3)
    circ = gen_packed_circuit(code, 3)
    target = None
    for idx, layer in enumerate(circ.layers):
        if isinstance(layer, GateLayer) and layer.cx and layer.cz:
            target = idx  # last interleaved layer: downstream of the injection
    layer = circ.layers[target]
    cx = list(layer.cx)
    # Swap two CX data targets: the measured operator is no longer H_X/H_Z.
    (a0, q0), (a1, q1) = cx[0], cx[1]
    cx[0], cx[1] = (a0, q1), (a1, q0)
    circ.layers[target] = GateLayer(cx=tuple(cx), cz=layer.cz)
    report = verify_detector_map(code, circ)
    assert not report.passed


def test_detector_map_needs_rounds():
    with pytest.raises(ValueError):
        verify_detector_map(toric(2), gen_packed_circuit(toric(2), 2))


# ── text round trip ──────────────────────────────────────────────────


def test_emit_format():
    circ = gen_modular_circuit(toric(2), 1)
    lines = emit_text(circ).splitlines()
    assert lines[0].startswith("# chgp-circuit a=2 b=2 rounds=1")
    assert lines[1] == "PREP_PLUS " + " ".join(f"a{v}" for v in range(8))
    assert lines[2] == "SHIFT 0 0 0"
    assert lines[3].startswith("CX (a0,q0)")
    shift_lines = [ln for ln in lines if ln.startswith("SHIFT")]
    assert len(shift_lines) == 6
    assert any(ln.startswith("MR_X") for ln in lines)


def test_emit_cx_ascending_controls():
    circ = gen_packed_circuit(CODE_240, 1)
    for line in emit_text(circ).splitlines():
        if line.startswith("CX"):
            ids = [int(tok.split(",")[0][2:]) for tok in line.split()[1:] if tok.startswith("(a")]
            cx_part = ids[: len(ids)]
            assert cx_part == sorted(cx_part)
            break


@pytest.mark.parametrize("gen", [gen_modular_circuit, gen_packed_circuit])
def test_text_roundtrip(gen):
    circ = gen(toric(2), 2)
    assert parse_text(emit_text(circ)) == circ


def test_parse_rejects_garbage():
    with pytest.raises(ValueError):
        parse_text("# chgp-circuit a=2 b=2 rounds=1 variant=packed\nWIBBLE 1 2\n")
    with pytest.raises(ValueError):
        parse_text("PREP_PLUS a0\n")  # missing header


# ── packing structure ────────────────────────────────────────────────


def test_packing_toric_d3():
    report = packing_report(gen_packed_circuit(toric(3), 3))
    assert report.passed
    assert report.half_layers == 2 * 2  # 2 * wA
    assert report.full_layers == (3 - 1) * 2 + 3 * 2


def test_packing_interior_layers_cover_everything():
    code = CODE_240
    circ = gen_packed_circuit(code, 2)
    report = packing_report(circ)
    assert report.passed
    assert report.half_layers == 2 * 3
    assert report.full_layers == (2 - 1) * 3 + 2 * 2
