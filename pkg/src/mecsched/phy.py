"""Per-user link and energy math.

All quantities are SI: watts, joules, seconds, bits, Hz. Gains are linear
channel-gain-to-noise ratios, so ``power * gain`` is the SNR contribution
of one subcarrier. Rates use log base 2 (bits per second).

The public functions are pure and stateless; schedulers call them with the
gain slice of whatever subcarrier group they are probing.
"""

import math
from dataclasses import dataclass

from .scenario import EnergyModel, Job

__all__ = [
    "TransmissionPlan",
    "local_energy",
    "water_fill",
    "aggregate_rate",
    "threshold_power",
    "optimal_transmit_power",
    "remote_exec_time",
    "queuing_time",
]

# Absolute tolerance for the bisection / golden-section power searches.
POWER_TOL_W = 1e-6
# Lower search bound; zero power has no defined energy per bit.
MIN_POWER_W = 1e-9

_INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class TransmissionPlan:
    """One user's committed uplink: group, per-subcarrier powers, totals.

    ``powers_w`` is aligned with ``group``; ``tx_energy_j`` already includes
    the static circuit power burned while transmitting.
    """

    group: tuple
    powers_w: tuple
    total_power_w: float
    rate_bps: float
    tx_time_s: float
    tx_energy_j: float

    def power_map(self) -> dict:
        return dict(zip(self.group, self.powers_w))


def local_energy(job: Job, model: EnergyModel) -> float:
    """Energy to run the job on the device at the deadline-exact frequency.

    The device clocks at exactly cycles/deadline, the cheapest speed that
    still finishes on time, so the cost is kappa * X^3 * D^3 / T^2.
    """
    cycles = model.cycles_per_bit * job.data_size_bits
    freq = cycles / job.deadline_s
    return model.kappa * freq * freq * cycles


def water_fill(gains, total_power_w: float) -> list[float]:
    """Rate-maximizing split of a power budget across parallel channels.

    Returns powers aligned with ``gains``; every active channel sits at the
    common water level mu = p_j + 1/g_j and the powers sum to the budget.
    """
    k = len(gains)
    if k == 0:
        raise ValueError("water_fill needs at least one channel gain")
    if any(g <= 0 for g in gains):
        raise ValueError("channel gains must be > 0")
    if total_power_w < 0:
        raise ValueError("total_power_w must be >= 0")
    if total_power_w == 0:
        return [0.0] * k

    inv = [1.0 / g for g in gains]
    order = sorted(range(k), key=lambda j: inv[j])
    # Drop the worst channel until the level covers every active one.
    active = k
    prefix = sum(inv[j] for j in order)
    while active > 1:
        level = (total_power_w + prefix) / active
        if level >= inv[order[active - 1]]:
            break
        prefix -= inv[order[active - 1]]
        active -= 1
    level = (total_power_w + prefix) / active

    powers = [0.0] * k
    for j in order[:active]:
        powers[j] = max(0.0, level - inv[j])
    return powers


def aggregate_rate(powers, gains, bandwidth_hz: float) -> float:
    """Total bit rate of a group: bandwidth * sum of log2(1 + p*g)."""
    if len(powers) != len(gains):
        raise ValueError("powers and gains must cover the same subcarriers")
    return bandwidth_hz * sum(math.log2(1.0 + p * g) for p, g in zip(powers, gains))


def _best_rate(gains, bandwidth_hz, total_power_w):
    return aggregate_rate(water_fill(gains, total_power_w), gains, bandwidth_hz)


def threshold_power(gains, bandwidth_hz: float, data_bits: float,
                    deadline_s: float, p_max_w: float) -> float | None:
    """Least total power whose water-filled rate moves the data by the deadline.

    Returns None when even the full power budget is too slow; bisection on
    total power, absolute tolerance POWER_TOL_W.
    """
    if deadline_s <= 0:
        raise ValueError("deadline_s must be > 0")
    required_bps = data_bits / deadline_s
    if required_bps <= 0:
        return 0.0
    if not gains:
        return None
    if _best_rate(gains, bandwidth_hz, p_max_w) < required_bps:
        return None
    lo, hi = 0.0, p_max_w
    while hi - lo > POWER_TOL_W:
        mid = 0.5 * (lo + hi)
        if _best_rate(gains, bandwidth_hz, mid) >= required_bps:
            hi = mid
        else:
            lo = mid
    return hi


def _min_energy_power(gains, bandwidth_hz, data_bits, p_max_w, p_circuit_w):
    """Golden-section minimum of (p + p_c) * D / rate(p) over (0, p_max]."""
    def energy(p):
        return (p + p_circuit_w) * data_bits / _best_rate(gains, bandwidth_hz, p)

    a, b = MIN_POWER_W, p_max_w
    if b <= a:
        return b
    x1 = b - _INV_GOLDEN * (b - a)
    x2 = a + _INV_GOLDEN * (b - a)
    f1, f2 = energy(x1), energy(x2)
    while b - a > POWER_TOL_W:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INV_GOLDEN * (b - a)
            f1 = energy(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INV_GOLDEN * (b - a)
            f2 = energy(x2)
    return 0.5 * (a + b)


def optimal_transmit_power(gains, bandwidth_hz: float, data_bits: float,
                           deadline_s: float, p_max_w: float,
                           p_circuit_w: float,
                           group: tuple | None = None) -> TransmissionPlan | None:
    """Cheapest feasible uplink over a subcarrier group.

    Total power is the energy-per-bit minimizer, pushed up to the deadline
    threshold when that binds; None when the group cannot meet the deadline
    at all. ``group`` only labels the plan (defaults to 0..k-1).
    """
    if not gains:
        return None
    if group is None:
        group = tuple(range(len(gains)))

    p_threshold = threshold_power(gains, bandwidth_hz, data_bits, deadline_s, p_max_w)
    if p_threshold is None:
        return None
    if data_bits <= 0:
        return TransmissionPlan(group=tuple(group), powers_w=(0.0,) * len(gains),
                                total_power_w=0.0, rate_bps=0.0,
                                tx_time_s=0.0, tx_energy_j=0.0)

    p_efficient = _min_energy_power(gains, bandwidth_hz, data_bits, p_max_w, p_circuit_w)
    total = min(p_max_w, max(p_efficient, p_threshold))

    powers = water_fill(gains, total)
    rate = aggregate_rate(powers, gains, bandwidth_hz)
    tx_time = data_bits / rate
    return TransmissionPlan(
        group=tuple(group),
        powers_w=tuple(powers),
        total_power_w=total,
        rate_bps=rate,
        tx_time_s=tx_time,
        tx_energy_j=(total + p_circuit_w) * tx_time,
    )


def remote_exec_time(job: Job, cloudlet_freq_hz: float, model: EnergyModel) -> float:
    """Non-preemptive runtime of the job on the cloudlet CPU."""
    if cloudlet_freq_hz <= 0:
        raise ValueError("cloudlet_freq_hz must be > 0")
    return model.cycles_per_bit * job.data_size_bits / cloudlet_freq_hz


def queuing_time(exec_order: dict, offload_flags, exec_times, user: int) -> float:
    """Cloudlet wait of one offloaded user: runtimes of everyone ranked earlier.

    ``exec_order`` maps user index to execution rank and is defined only on
    offloaded users; non-offloaded users never occupy the CPU.
    """
    if user not in exec_order or not offload_flags[user]:
        raise ValueError(f"user {user} is not offloaded")
    rank = exec_order[user]
    return sum(exec_times[j] for j, r in exec_order.items()
               if r < rank and offload_flags[j])
