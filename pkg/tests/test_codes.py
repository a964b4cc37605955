import numpy as np
import pytest

from chgp.codes import (
    BalanceReport,
    brute_force_distance,
    build_c2,
    build_cxc,
    build_cxr,
    code_params,
    from_catalog_entry,
    in_row_space,
    logical_basis,
    to_catalog_entry,
)
from chgp.cyclic import survey_cyclic_codes
from chgp.gf2 import CyclicPoly, is_zero, matmul_gf2, matvec_gf2, transpose

# Canonical seed supports recovered by the search (parameters match the
# back-derived classical codes; polynomial-level identity is not claimed).
SEED_15_4_8 = CyclicPoly(15, (0, 1, 4))
SEED_21_5_10 = CyclicPoly(21, (0, 1, 5))
SEED_21_7_8 = CyclicPoly(21, (0, 1, 3, 8))
SEED_28_10_6 = CyclicPoly(28, (0, 2, 4, 10))
SEED_31_10_10 = CyclicPoly(31, (0, 1, 2, 6, 27))


def rep(n):
    return CyclicPoly(n, (0, 1))


def toric(d):
    return build_cxc(d, d, rep(d), rep(d))


# ── build_cxc ────────────────────────────────────────────────────────


def test_toric_18_2_3():
    code = toric(3)
    p = code_params(code)
    assert (p.n, p.k, p.d) == (18, 2, 3)
    assert p.omega == 4


def test_toric_8_2_2():
    p = code_params(toric(2))
    assert (p.n, p.k, p.d) == (8, 2, 2)


def test_modulus_mismatch():
    with pytest.raises(ValueError):
        build_cxc(3, 3, rep(3), rep(4))


def test_c2_882_50_10():
    code = build_c2(SEED_21_5_10)
    p = code_params(code)
    assert (p.n, p.k, p.d, p.omega) == (882, 50, 10, 6)
    assert is_zero(matmul_gf2(code.h_x, transpose(code.h_z)))


# ── build_c2 ─────────────────────────────────────────────────────────


def test_c2_450_32_8():
    p = code_params(build_c2(SEED_15_4_8))
    assert (p.n, p.k, p.d, p.omega) == (450, 32, 8, 6)


def test_c2_882_98_8():
    p = code_params(build_c2(SEED_21_7_8))
    assert (p.n, p.k, p.d, p.omega) == (882, 98, 8, 8)


def test_c2_repetition_is_toric():
    code = build_c2(rep(3))
    assert code.h_x == toric(3).h_x and code.h_z == toric(3).h_z


# ── build_cxr ────────────────────────────────────────────────────────


@pytest.mark.parametrize(
    "seed,expected",
    [
        (SEED_15_4_8, (240, 8, 8, 5)),
        (SEED_21_5_10, (420, 10, 10, 5)),
        (SEED_31_10_10, (620, 20, 10, 7)),
        (SEED_28_10_6, (336, 20, 6, 6)),
        (SEED_21_7_8, (336, 14, 8, 6)),
    ],
)
def test_cxr_catalog_codes(seed, expected):
    code = build_cxr(seed)
    p = code_params(code)
    assert (p.n, p.k, p.d, p.omega) == expected
    assert code.family == "CxR"


def test_cxr_of_repetition_is_toric():
    code = build_cxr(rep(3))
    assert code.h_x == toric(3).h_x and code.h_z == toric(3).h_z


def test_cxr_rejects_trivial_seed():
    with pytest.raises(ValueError):
        build_cxr(CyclicPoly(7, (0,)))


# ── code_params ──────────────────────────────────────────────────────


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_toric_params_family(d):
    p = code_params(toric(d))
    assert (p.n, p.k, p.d) == (2 * d * d, 2, d)
    assert p.r_a == p.r_b == d - 1
    assert p.stabilizer_rank == (p.n - p.k) // 2


def test_full_rank_seed_gives_k0():
    code = build_cxc(7, 7, CyclicPoly(7, (0,)), CyclicPoly(7, (0,)))
    p = code_params(code)
    assert p.k == 0 and p.d is None


# ── balance_report ───────────────────────────────────────────────────


def test_balance_toric3():
    r = balance_of(toric(3))
    assert r.rank_x == r.rank_z == 8 == r.expected_rank
    assert r.balanced


def balance_of(code):
    from chgp.codes import balance_report

    return balance_report(code)


def test_balance_450():
    r = balance_of(build_c2(SEED_15_4_8))
    assert r.rank_x == r.rank_z == 209 == (450 - 32) // 2
    assert r.balanced


def test_omega_882_98():
    code = build_c2(SEED_21_7_8)
    r = balance_of(code)
    assert r.omega == 8
    assert (r.row_weights_x == 8).all() and (r.row_weights_z == 8).all()


# ── logical_basis ────────────────────────────────────────────────────


def test_logicals_toric3():
    code = toric(3)
    lb = logical_basis(code)
    assert lb.x_ops.shape == (2, 18) and lb.z_ops.shape == (2, 18)
    assert (lb.x_ops.sum(axis=1) == 3).all()
    assert (lb.z_ops.sum(axis=1) == 3).all()
    assert np.array_equal(lb.pairing, np.eye(2, dtype=np.uint8))
    for x in lb.x_ops:
        assert not matvec_gf2(code.h_z, x).any()
        assert not in_row_space(code.h_x, x)
    for z in lb.z_ops:
        assert not matvec_gf2(code.h_x, z).any()
        assert not in_row_space(code.h_z, z)


@pytest.mark.parametrize("seed", [SEED_15_4_8, rep(4)])
def test_logical_count_is_k(seed):
    code = build_cxr(seed)
    p = code_params(code)
    lb = logical_basis(code)
    assert lb.x_ops.shape[0] == lb.z_ops.shape[0] == p.k
    assert np.array_equal(lb.pairing, np.eye(p.k, dtype=np.uint8))


def test_logicals_error_on_k0():
    code = build_cxc(5, 5, CyclicPoly(5, (0,)), CyclicPoly(5, (0,)))
    with pytest.raises(ValueError):
        logical_basis(code)


def test_logicals_deterministic():
    a = logical_basis(toric(3))
    b = logical_basis(toric(3))
    assert np.array_equal(a.x_ops, b.x_ops) and np.array_equal(a.z_ops, b.z_ops)


# ── brute-force distance ─────────────────────────────────────────────


def test_bf_distance_toric():
    assert brute_force_distance(toric(2), 2) == 2
    assert brute_force_distance(toric(3), 3) == 3


def test_bf_distance_cap():
    assert brute_force_distance(toric(3), 2) is None


def test_bf_distance_both_types_toric2():
    # X and Z distances are both 2 for [[8,2,2]]: the minimum over both is 2.
    assert brute_force_distance(toric(2), 2) == 2


# ── invariants over enumerated seeds ─────────────────────────────────


def test_invariants_over_small_catalog():
    seeds = []
    for w in (2, 3):
        codes, _ = survey_cyclic_codes(6, w)
        seeds.extend(codes)
    assert seeds
    for seed in seeds:
        code = build_c2(seed.poly)
        p = code_params(code)
        r = balance_of(code)
        assert is_zero(matmul_gf2(code.h_x, transpose(code.h_z)))
        assert r.balanced, seed
        assert p.k == code.n - r.rank_x - r.rank_z
        assert (r.row_weights_x == code.omega).all()


def test_formula_distance_matches_brute_force_small():
    # Every C2 code with n <= 72 and d <= 4 from the small-seed survey.
    by_params = {}
    for w in (2, 3):
        codes, _ = survey_cyclic_codes(6, w)
        for c in codes:
            by_params.setdefault(c.params(), c)
    checked = 0
    for (n_c, k_c, d_c), seed in sorted(by_params.items()):
        if 2 * n_c * n_c > 72 or d_c > 4:
            continue
        code = build_c2(seed.poly)
        p = code_params(code)
        assert brute_force_distance(code, p.d) == p.d, seed
        checked += 1
    assert checked >= 4


# ── catalog round trip ───────────────────────────────────────────────


def test_catalog_entry_roundtrip():
    code = build_cxr(SEED_15_4_8)
    entry = to_catalog_entry(code)
    assert entry == {
        "family": "CxR",
        "a": 15,
        "b": 8,
        "supportA": [0, 1, 4],
        "supportB": [0, 1],
        "n": 240,
        "k": 8,
        "d": 8,
        "omega": 5,
        "rank": 116,
    }
    rebuilt = from_catalog_entry(entry)
    assert rebuilt.h_x == code.h_x and rebuilt.h_z == code.h_z
