import math

import numpy as np
import pytest

from mecsched.phy import (aggregate_rate, local_energy, optimal_transmit_power,
                          queuing_time, remote_exec_time, threshold_power,
                          water_fill)
from mecsched.scenario import EnergyModel, Job

MODEL = EnergyModel(kappa=1e-24, cycles_per_bit=18000.0)
BW = 18750.0


def grid_best_rate(gains, total_power, points=100):
    """Oracle: best rate over a simplex grid of power splits."""
    k = len(gains)
    best = 0.0
    if k == 1:
        return aggregate_rate([total_power], gains, BW)
    if k == 2:
        for a in range(points + 1):
            p0 = total_power * a / points
            r = aggregate_rate([p0, total_power - p0], gains, BW)
            best = max(best, r)
        return best
    assert k == 3
    for a in range(points + 1):
        for b in range(points + 1 - a):
            p0 = total_power * a / points
            p1 = total_power * b / points
            r = aggregate_rate([p0, p1, total_power - p0 - p1], gains, BW)
            best = max(best, r)
    return best


def grid_min_energy_power(gains, data_bits, p_max, p_circuit, points=10000):
    """Oracle: grid argmin of (p + p_c) * D / rate(p) over total power."""
    best_p, best_e = None, math.inf
    for step in range(1, points + 1):
        p = p_max * step / points
        rate = aggregate_rate(water_fill(gains, p), gains, BW)
        e = (p + p_circuit) * data_bits / rate
        if e < best_e:
            best_p, best_e = p, e
    return best_p, best_e


# ---------------------------------------------------------------- local energy

def test_local_energy_hand_value():
    # kappa * X^3 * D^3 / T^2 with the standard constants
    job = Job(data_size_bits=1000.0, deadline_s=0.1)
    assert local_energy(job, MODEL) == pytest.approx(0.5832, rel=1e-12)


def test_local_energy_zero_work():
    assert local_energy(Job(data_size_bits=0.0, deadline_s=0.1), MODEL) == 0.0


def test_local_energy_cubic_scaling():
    job = Job(data_size_bits=2000.0, deadline_s=0.1)
    assert local_energy(job, MODEL) == pytest.approx(4.6656, rel=1e-12)


# ---------------------------------------------------------------- water-filling

def test_water_fill_symmetric():
    assert water_fill([1.0, 1.0], 2.0) == pytest.approx([1.0, 1.0])


def test_water_fill_single_channel():
    assert water_fill([5.0], 1.0) == pytest.approx([1.0])


def test_water_fill_boundary_channel():
    # level 2.0 puts the second channel exactly at zero power
    assert water_fill([1.0, 0.5], 1.0) == pytest.approx([1.0, 0.0], abs=1e-12)


def test_water_fill_rejects_bad_input():
    with pytest.raises(ValueError):
        water_fill([], 1.0)
    with pytest.raises(ValueError):
        water_fill([1.0, 0.0], 1.0)


def test_water_fill_kkt_and_budget():
    rng = np.random.default_rng(7)
    for _ in range(300):
        k = rng.integers(1, 5)
        gains = list(rng.uniform(0.05, 20.0, size=k))
        total = float(rng.uniform(0.01, 2.0))
        powers = water_fill(gains, total)
        assert sum(powers) == pytest.approx(total, abs=1e-9)
        assert all(p >= 0 for p in powers)
        # active channels share one water level, inactive sit above it
        levels = [p + 1.0 / g for p, g in zip(powers, gains) if p > 1e-12]
        if levels:
            mu = levels[0]
            assert all(abs(l - mu) <= 1e-9 * max(1.0, mu) for l in levels)
            for p, g in zip(powers, gains):
                if p <= 1e-12:
                    assert 1.0 / g >= mu - 1e-9


def test_water_fill_beats_simplex_grid():
    rng = np.random.default_rng(11)
    for _ in range(50):
        k = int(rng.integers(2, 4))
        gains = list(rng.uniform(0.1, 10.0, size=k))
        total = float(rng.uniform(0.1, 2.0))
        opt = aggregate_rate(water_fill(gains, total), gains, BW)
        assert opt >= grid_best_rate(gains, total) - 1e-6


# ---------------------------------------------------------------- rates

def test_rate_single_subcarrier():
    assert aggregate_rate([1.0], [1.0], BW) == pytest.approx(18750.0)


def test_rate_zero_power():
    assert aggregate_rate([0.0, 0.0], [3.0, 5.0], BW) == 0.0


def test_rate_two_subcarriers():
    # each p*g = 3 contributes log2(4) = 2
    assert aggregate_rate([3.0, 1.0], [1.0, 3.0], BW) == pytest.approx(75000.0)


def test_rate_mismatched_lengths():
    with pytest.raises(ValueError):
        aggregate_rate([1.0], [1.0, 2.0], BW)


def test_rate_monotone_in_total_power():
    rng = np.random.default_rng(13)
    for _ in range(100):
        k = int(rng.integers(1, 5))
        gains = list(rng.uniform(0.1, 10.0, size=k))
        budgets = sorted(rng.uniform(0.01, 2.0, size=4))
        rates = [aggregate_rate(water_fill(gains, b), gains, BW) for b in budgets]
        assert all(r1 <= r2 + 1e-9 for r1, r2 in zip(rates, rates[1:]))


# ---------------------------------------------------------------- threshold power

def test_threshold_power_hand_value():
    # required rate 18750 b/s over one unit-gain subcarrier: log2(1+p) = 1
    p = threshold_power([1.0], BW, 1875.0, 0.1, p_max_w=2.0)
    assert p == pytest.approx(1.0, abs=1e-5)


def test_threshold_power_zero_data():
    assert threshold_power([1.0], BW, 0.0, 0.1, p_max_w=1.0) == 0.0


def test_threshold_power_infeasible():
    # rate at 0.5 W is 18750*log2(1.5) < 18750
    assert threshold_power([1.0], BW, 1875.0, 0.1, p_max_w=0.5) is None


# ---------------------------------------------------------------- optimal power

def test_optimal_power_threshold_binds():
    plan = optimal_transmit_power([1.0], BW, 1875.0, 0.1, 1.0, 0.05)
    assert plan.total_power_w == pytest.approx(1.0, abs=1e-5)
    assert plan.tx_time_s == pytest.approx(0.1, rel=1e-4)
    assert plan.tx_energy_j == pytest.approx(0.105, rel=1e-3)


def test_optimal_power_efficiency_binds():
    # with a loose deadline the energy-per-bit optimum decides the power
    plan = optimal_transmit_power([1.0], BW, 1875.0, 10.0, 1.0, 0.05)
    oracle_p, _ = grid_min_energy_power([1.0], 1875.0, 1.0, 0.05)
    assert plan.total_power_w == pytest.approx(oracle_p, abs=1e-3)
    assert plan.total_power_w == pytest.approx(0.33, abs=0.02)


def test_optimal_power_empty_group():
    assert optimal_transmit_power([], BW, 1875.0, 0.1, 1.0, 0.05) is None


def test_optimal_power_infeasible_deadline():
    assert optimal_transmit_power([1.0], BW, 1875.0, 0.1, 0.5, 0.05) is None


def test_optimal_power_matches_grid_oracle():
    rng = np.random.default_rng(17)
    checked = 0
    for _ in range(120):
        k = int(rng.integers(1, 4))
        gains = list(rng.uniform(0.2, 15.0, size=k))
        data = float(rng.uniform(200.0, 2000.0))
        deadline = float(rng.uniform(0.02, 0.3))
        p_c = float(rng.uniform(0.0, 0.2))
        plan = optimal_transmit_power(gains, BW, data, deadline, 1.0, p_c)
        p_t = threshold_power(gains, BW, data, deadline, 1.0)
        if plan is None:
            assert p_t is None
            continue
        checked += 1
        oracle_p, _ = grid_min_energy_power(gains, data, 1.0, p_c, points=2000)
        expected = max(oracle_p, p_t)
        assert plan.total_power_w == pytest.approx(expected, abs=1e-3)
        assert plan.total_power_w <= 1.0 + 1e-9
    assert checked > 50


def test_plan_self_consistency():
    rng = np.random.default_rng(19)
    for _ in range(100):
        k = int(rng.integers(1, 5))
        gains = list(rng.uniform(0.2, 15.0, size=k))
        plan = optimal_transmit_power(gains, BW, 1000.0, 0.2, 1.0, 0.05)
        if plan is None:
            continue
        assert plan.rate_bps == pytest.approx(
            aggregate_rate(plan.powers_w, gains, BW), rel=1e-12)
        assert plan.tx_time_s == pytest.approx(1000.0 / plan.rate_bps, rel=1e-12)
        assert plan.tx_energy_j == pytest.approx(
            (plan.total_power_w + 0.05) * plan.tx_time_s, rel=1e-12)
        assert sum(plan.powers_w) == pytest.approx(plan.total_power_w, abs=1e-9)


def test_superset_group_never_costs_more():
    rng = np.random.default_rng(23)
    for _ in range(80):
        base = list(rng.uniform(0.2, 10.0, size=2))
        extra = base + list(rng.uniform(0.2, 10.0, size=2))
        data = float(rng.uniform(500.0, 1500.0))
        deadline = float(rng.uniform(0.03, 0.2))
        small = optimal_transmit_power(base, BW, data, deadline, 1.0, 0.05)
        big = optimal_transmit_power(extra, BW, data, deadline, 1.0, 0.05)
        if small is None:
            continue
        assert big is not None
        assert big.tx_energy_j <= small.tx_energy_j * (1.0 + 1e-6)


# ---------------------------------------------------------------- cloudlet times

def test_remote_exec_time_hand_values():
    job = Job(data_size_bits=1000.0, deadline_s=0.1)
    assert remote_exec_time(job, 6e8, MODEL) == pytest.approx(0.03)
    assert remote_exec_time(job, 1.8e8, MODEL) == pytest.approx(0.1)
    assert remote_exec_time(Job(data_size_bits=0.0, deadline_s=0.1), 6e8, MODEL) == 0.0


def test_queuing_time_first_in_queue():
    assert queuing_time({0: 1}, [1], [0.03], 0) == 0.0


def test_queuing_time_single_predecessor():
    order = {0: 1, 1: 2}
    assert queuing_time(order, [1, 1], [0.03, 0.02], 1) == pytest.approx(0.03)


def test_queuing_time_skips_non_offloaded():
    order = {0: 1, 2: 2}
    flags = [0, 0, 1]
    # rank-1 user is not offloaded, so it contributes nothing
    assert queuing_time(order, flags, [0.03, 0.05, 0.02], 2) == 0.0


def test_queuing_time_rejects_local_user():
    with pytest.raises(ValueError):
        queuing_time({0: 1}, [1, 0], [0.03, 0.02], 1)
