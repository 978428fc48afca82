import math

import numpy as np
import pytest

import uesa
from uesa.errors import UnsupportedConfigurationError

from conftest import make_rng
from oracles import compositions_brute


def test_compositions_small_case():
    got = list(uesa.enumerate_compositions(5, 2))
    assert got == [(1, 4), (2, 3), (3, 2), (4, 1)]


def test_compositions_match_brute_force():
    for total, parts in ((5, 3), (6, 2), (7, 4)):
        assert list(uesa.enumerate_compositions(total, parts)) == compositions_brute(total, parts)


def test_composition_counts_closed_form_exhaustive():
    for total in range(2, 21):
        for parts in range(2, total + 1):
            count = sum(1 for _ in uesa.enumerate_compositions(total, parts))
            assert count == math.comb(total - 1, parts - 1)


@pytest.mark.parametrize("total,parts,expected", [(32, 4, 4495), (64, 4, 39711)])
def test_composition_counts_large(total, parts, expected):
    assert sum(1 for _ in uesa.enumerate_compositions(total, parts)) == expected


def test_partitions_small_case():
    assert list(uesa.enumerate_partitions_nondecreasing(5, 2)) == [(1, 4), (2, 3)]


def test_partition_counts_reported_sizes():
    assert sum(1 for _ in uesa.enumerate_partitions_nondecreasing(32, 4)) == 249
    assert sum(1 for _ in uesa.enumerate_partitions_nondecreasing(64, 4)) == 1906


def test_partitions_equal_filtered_compositions():
    for total in range(2, 21):
        for parts in range(2, total + 1):
            filtered = [
                c
                for c in uesa.enumerate_compositions(total, parts)
                if all(a <= b for a, b in zip(c, c[1:]))
            ]
            assert filtered == list(uesa.enumerate_partitions_nondecreasing(total, parts))


def test_enumeration_rejects_impossible():
    with pytest.raises(ValueError):
        list(uesa.enumerate_compositions(3, 4))
    with pytest.raises(ValueError):
        list(uesa.enumerate_partitions_nondecreasing(3, 4))


def test_search_space_type():
    s = uesa.SearchSpace(6, 3, "compositions")
    assert s.size() == math.comb(5, 2)
    assert list(s)[:2] == [(1, 1, 4), (1, 2, 3)]
    sr = uesa.SearchSpace(6, 3, "nondecreasing")
    assert all(a <= b for p in sr for a, b in zip(p, p[1:]))
    with pytest.raises(ValueError):
        uesa.SearchSpace(6, 3, "bogus")


def test_pi_metric_examples():
    assert uesa.pi_metric((8, 8, 8, 8)) == 1
    assert uesa.pi_metric((1, 7, 17, 39)) == 7 * 11 * 23
    assert uesa.pi_metric((1, 1, 2)) == 2


def test_pi_order_head_64_4():
    ordered = uesa.order_by_pi_desc(uesa.enumerate_partitions_nondecreasing(64, 4))
    assert ordered[0] == (1, 7, 17, 39)


def test_pi_order_equal_partition_sorts_last():
    ordered = uesa.order_by_pi_desc(uesa.enumerate_partitions_nondecreasing(32, 4))
    assert ordered[-1] == (8, 8, 8, 8)


def test_pi_order_stable_on_ties():
    cands = [(2, 2, 4), (1, 3, 4), (2, 3, 3), (1, 1, 6)]
    assert [uesa.pi_metric(c) for c in cands] == [3, 6, 2, 6]
    ordered = uesa.order_by_pi_desc(cands)
    # the two pi=6 candidates keep their input order
    assert ordered == [(1, 3, 4), (1, 1, 6), (2, 2, 4), (2, 3, 3)]


# ---------------------------------------------------------------------------
# searches
# ---------------------------------------------------------------------------

def _channel(n_r, k, *seed):
    return uesa.generate_channel(uesa.ChannelParams(n_r, k), make_rng(*seed))


def test_es_degenerate_spaces():
    h = _channel(4, 2, 51)
    out = uesa.uesa_es(h, 2.0, num_subarrays=4)
    assert out.best_allocation.parts == (1, 1, 1, 1)
    assert out.candidates_examined == 1
    out1 = uesa.uesa_es(h, 2.0, num_subarrays=1)
    assert out1.best_allocation.parts == (4,)
    assert out1.candidates_examined == 1


def test_es_dominates_fixed_allocation():
    h = _channel(8, 2, 52)
    rho = 3.0
    out = uesa.uesa_es(h, rho, num_subarrays=2)
    ordered = uesa.order_rows_desc_norm(h.entries)
    fixed = uesa.factorized_combining(ordered, (4, 4), rho)
    assert out.best_rate >= fixed.total_rate - 1e-12


def test_res_subset_of_es():
    h = _channel(12, 3, 53)
    es = uesa.uesa_es(h, 2.0, num_subarrays=3)
    res = uesa.uesa_res(h, 2.0, num_subarrays=3)
    assert res.best_rate <= es.best_rate + 1e-12
    assert res.best_allocation.is_nondecreasing()


def test_res_examines_whole_space():
    h = _channel(5, 2, 54)
    out = uesa.uesa_res(h, 1.0, num_subarrays=2)
    assert out.candidates_examined == 2


def test_res_candidate_count_32_4():
    h = _channel(32, 4, 66)
    out = uesa.uesa_res(h, 1.0, num_subarrays=4)
    assert out.candidates_examined == 249


def test_res_et_full_budget_matches_res():
    h = _channel(12, 4, 55)
    res = uesa.uesa_res(h, 2.0, num_subarrays=4)
    et = uesa.uesa_res_et(h, 2.0, count_max=10_000, num_subarrays=4)
    assert et.best_rate == pytest.approx(res.best_rate, abs=1e-12)
    assert et.best_allocation.parts == res.best_allocation.parts
    assert et.candidates_examined == sum(1 for _ in uesa.enumerate_partitions_nondecreasing(12, 4))


def test_res_et_counter_semantics():
    # count_max=1 stops right after the first non-improving candidate
    h = _channel(10, 2, 56)
    ordered = uesa.order_by_pi_desc(uesa.enumerate_partitions_nondecreasing(10, 2))
    h_ord = uesa.order_rows_desc_norm(h.entries)
    rates = [uesa.factorized_combining(h_ord, p, 2.0).total_rate for p in ordered]
    # replay the walk
    tau, count, walked = 0.0, 0, 0
    for r in rates:
        if count >= 1:
            break
        walked += 1
        if r > tau:
            tau, count = r, 0
        else:
            count += 1
    out = uesa.uesa_res_et(h, 2.0, count_max=1, num_subarrays=2)
    assert out.candidates_examined == walked
    assert out.best_rate == pytest.approx(tau, abs=0)


def test_res_et_requires_positive_budget():
    with pytest.raises(ValueError):
        uesa.uesa_res_et(_channel(8, 2, 57), 1.0, count_max=0, num_subarrays=2)


def test_search_dominance_chain():
    for t in range(10):
        h = _channel(16, 4, 58, t)
        rho = uesa.snr_db_to_rho(5.0)
        r_es = uesa.uesa_es(h, rho, num_subarrays=4).best_rate
        r_res = uesa.uesa_res(h, rho, num_subarrays=4).best_rate
        r_et = uesa.uesa_res_et(h, rho, count_max=8, num_subarrays=4).best_rate
        assert r_es >= r_res >= r_et


def test_fast_uesa_gamma_minus_inf_returns_head():
    h = _channel(16, 4, 59)
    head = uesa.order_by_pi_desc(uesa.enumerate_partitions_nondecreasing(16, 4))[0]
    out = uesa.fast_uesa(h, 2.0, max_outer_iters=10, gamma=-np.inf, num_subarrays=4)
    assert out.best_allocation.parts == head
    assert out.candidates_examined >= 1


def test_fast_uesa_outputs_stay_nondecreasing():
    for t in range(8):
        h = _channel(24, 4, 60, t)
        out = uesa.fast_uesa(h, 4.0, max_outer_iters=20, gamma=2.0, num_subarrays=4)
        assert out.best_allocation.is_nondecreasing()
        assert out.best_allocation.num_antennas == 24


def test_fast_uesa_single_chain():
    h = _channel(6, 2, 61)
    out = uesa.fast_uesa(h, 2.0, max_outer_iters=5, gamma=1.0, num_subarrays=1)
    assert out.best_allocation.parts == (6,)
    assert out.candidates_examined == 1


def test_outcomes_reproduced_by_det_oracle():
    from oracles import det_rate

    h = _channel(16, 4, 62)
    rho = uesa.snr_db_to_rho(8.0)
    h_ord = uesa.order_rows_desc_norm(h.entries)
    for out in (
        uesa.uesa_es(h, rho, num_subarrays=4),
        uesa.uesa_res(h, rho, num_subarrays=4),
        uesa.uesa_res_et(h, rho, count_max=12, num_subarrays=4),
        uesa.fast_uesa(h, rho, max_outer_iters=15, gamma=2.0, num_subarrays=4),
    ):
        oracle = det_rate(h_ord.entries, out.best_combiner.to_matrix(), rho)
        assert abs(out.best_rate - oracle) <= 1e-9


def test_num_subarrays_defaults_to_user_count():
    h = _channel(8, 2, 63)
    assert uesa.uesa_res(h, 1.0).best_allocation.num_subarrays == 2


def test_esa_baseline_requires_divisibility():
    h = _channel(9, 3, 64)
    with pytest.raises(UnsupportedConfigurationError):
        uesa.esa_baseline(h, 1.0, num_subarrays=2)
    res = uesa.esa_baseline(h, 1.0, num_subarrays=3)
    assert res.combiner.allocation.parts == (3, 3, 3)


def test_esa_baseline_keeps_row_order():
    # equal architecture has no switching network: rows stay in generation order
    h = _channel(8, 2, 65)
    res = uesa.esa_baseline(h, 2.0, num_subarrays=2)
    direct = uesa.factorized_combining(h.entries, (4, 4), 2.0)
    assert res.total_rate == pytest.approx(direct.total_rate, abs=0)
