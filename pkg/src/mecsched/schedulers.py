"""Allocation policies and the feasibility/objective checker.

Four policies produce an Assignment (subcarrier map, power map, offload
flags, execution order) for a Scenario:

* ``min_group_allocate``   - greedy minimum subcarrier groups, cloudlet CPU
  treated as unlimited.
* ``per_resource_allocate`` - same subcarrier stage, then an optimal CPU
  ordering picked by dynamic programming; users the CPU cannot fit fall
  back to local execution and their subcarriers are wasted.
* ``joint_allocate``        - tracks the cloudlet busy-until time while
  assigning subcarriers, spending CPU time on the users that save the most
  energy per cloudlet-second.
* ``exhaustive_optimal``    - brute force over every subcarrier-to-user
  map, with or without the CPU constraint; the reference optimum at small
  sizes.

``evaluate`` rescores any assignment from first principles and is the
single source of truth for energies, completion times and constraint
violations.

Timeline convention: a job may transmit while earlier jobs run, so an
offloaded job starts at max(own transmission time, cloudlet busy-until)
and completes exec_time later. The purely sequential reading
(transmit, then queue, then run) is reported alongside as a diagnostic.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np

from .phy import (TransmissionPlan, aggregate_rate, local_energy,
                  optimal_transmit_power, remote_exec_time)
from .scenario import Scenario

__all__ = [
    "Assignment",
    "ScheduleOutcome",
    "DP_CANDIDATE_CAP",
    "EXHAUSTIVE_MAP_BUDGET",
    "find_minimum_group",
    "min_group_allocate",
    "per_resource_allocate",
    "joint_allocate",
    "dp_cpu_schedule",
    "exhaustive_optimal",
    "evaluate",
]

# Slack for deadline comparisons; completion times come out of float
# searches and may sit exactly on the deadline.
DEADLINE_SLACK_S = 1e-9
# Power sums may drift by rounding when rebuilt from matrices.
POWER_SLACK_W = 1e-9

DP_CANDIDATE_CAP = 20
EXHAUSTIVE_MAP_BUDGET = 100_000


@dataclass
class Assignment:
    """The full decision tuple for one scenario.

    ``exec_order`` maps user index to 1-based execution rank and is defined
    exactly on offloaded users. ``cpu_constrained`` records which cloudlet
    model the policy targeted: False means the cloudlet was treated as
    unlimited, and deadline feasibility only covers the transmission time.
    """

    subcarrier_map: np.ndarray
    power_map: np.ndarray
    offload_flags: np.ndarray
    exec_order: dict = field(default_factory=dict)
    cpu_constrained: bool = True

    @classmethod
    def all_local(cls, num_users: int, num_subcarriers: int,
                  cpu_constrained: bool = True) -> "Assignment":
        return cls(
            subcarrier_map=np.zeros((num_users, num_subcarriers), dtype=np.int8),
            power_map=np.zeros((num_users, num_subcarriers)),
            offload_flags=np.zeros(num_users, dtype=np.int8),
            exec_order={},
            cpu_constrained=cpu_constrained,
        )


@dataclass
class ScheduleOutcome:
    """Recomputed energies, timings and constraint checks for an assignment."""

    per_user_energy_j: list
    per_user_completion_s: dict
    per_user_completion_no_overlap_s: dict
    total_energy_j: float
    total_saving_j: float
    offload_count: int
    feasible: bool
    violations: list
    wasted_subcarriers: int = 0


class _UserView:
    """Per-user constants pulled out of a scenario once per policy run."""

    def __init__(self, scenario: Scenario, user: int):
        job = scenario.jobs[user]
        dev = scenario.devices[user]
        self.index = user
        self.data_bits = job.data_size_bits
        self.deadline_s = job.deadline_s
        self.p_max_w = dev.max_tx_power_w
        self.p_circuit_w = dev.circuit_power_w
        self.gains = [float(g) for g in scenario.channel.gains[user]]
        self.e_local_j = local_energy(job, scenario.energy_model)
        self.t_exec_s = remote_exec_time(job, scenario.cloudlet_freq_hz,
                                         scenario.energy_model)


def _views(scenario: Scenario) -> list:
    return [_UserView(scenario, i) for i in range(scenario.num_users)]


def _plan_for(view: _UserView, group, bandwidth_hz, tx_deadline_s):
    if tx_deadline_s <= 0:
        # execution alone already overruns the deadline
        return None
    gains = [view.gains[j] for j in group]
    return optimal_transmit_power(gains, bandwidth_hz, view.data_bits,
                                  tx_deadline_s, view.p_max_w,
                                  view.p_circuit_w, group=tuple(group))


def _tx_deadline(view: _UserView, include_exec_time: bool) -> float:
    if include_exec_time:
        return view.deadline_s - view.t_exec_s
    return view.deadline_s


def find_minimum_group(user: int, available, scenario: Scenario,
                       busy_until_s: float = 0.0,
                       include_exec_time: bool = False):
    """Smallest greedy subcarrier group that makes offloading worthwhile.

    Subcarriers are added best-gain-first until the transmission both beats
    the local energy and fits the deadline. With ``include_exec_time`` the
    transmission must finish by deadline - exec_time and the cloudlet must
    be free early enough (start at max(tx time, busy_until), run to
    completion before the deadline). Returns (group, plan) or None when no
    prefix qualifies.
    """
    view = _UserView(scenario, user)
    return _find_minimum_group(view, available, scenario.subcarrier_bandwidth_hz,
                               busy_until_s, include_exec_time)


def _find_minimum_group(view: _UserView, available, bandwidth_hz,
                        busy_until_s, include_exec_time):
    if not available:
        return None
    tx_deadline = _tx_deadline(view, include_exec_time)
    if tx_deadline <= 0:
        return None
    if include_exec_time and busy_until_s > tx_deadline + DEADLINE_SLACK_S:
        return None

    ranked = sorted(available, key=lambda j: (-view.gains[j], j))
    for k in range(1, len(ranked) + 1):
        group = tuple(ranked[:k])
        plan = _plan_for(view, group, bandwidth_hz, tx_deadline)
        if plan is not None and plan.tx_energy_j < view.e_local_j:
            return group, plan
    return None


def _distribute_leftovers(views, bandwidth_hz, groups, plans, leftovers,
                          include_exec_time, timeline_ok=None):
    """Hand each unused subcarrier to the offloaded user it helps most.

    Every append re-runs the power search over the enlarged group. When a
    ``timeline_ok`` callback is given (joint allocation), appends that would
    break any committed completion deadline are skipped for that user.
    """
    for j in sorted(leftovers):
        best = None
        for i in sorted(groups):
            view = views[i]
            new_group = groups[i] + (j,)
            new_plan = _plan_for(view, new_group, bandwidth_hz,
                                 _tx_deadline(view, include_exec_time))
            if new_plan is None:
                continue
            if timeline_ok is not None and not timeline_ok(i, new_plan):
                continue
            delta = plans[i].tx_energy_j - new_plan.tx_energy_j
            if best is None or delta > best[0]:
                best = (delta, i, new_group, new_plan)
        if best is not None:
            _, i, new_group, new_plan = best
            groups[i] = new_group
            plans[i] = new_plan


def _build_assignment(scenario, groups, plans, exec_order, cpu_constrained,
                      wasted_groups=None):
    asm = Assignment.all_local(scenario.num_users, scenario.num_subcarriers,
                               cpu_constrained=cpu_constrained)
    for i, group in groups.items():
        asm.offload_flags[i] = 1
        for j, p in zip(group, plans[i].powers_w):
            asm.subcarrier_map[i, j] = 1
            asm.power_map[i, j] = p
    if wasted_groups:
        # Subcarriers granted to users that ended up local stay blocked.
        for i, group in wasted_groups.items():
            for j in group:
                asm.subcarrier_map[i, j] = 1
    asm.exec_order = dict(exec_order)
    return asm


def _min_group_stage(scenario: Scenario, include_exec_time: bool):
    """Greedy loop shared by the unlimited-cloudlet policy and stage one of
    the per-resource policy: repeatedly offload the user whose minimum group
    saves the most energy, then distribute the leftover subcarriers."""
    views = _views(scenario)
    bandwidth = scenario.subcarrier_bandwidth_hz
    remaining = list(range(scenario.num_users))
    available = list(range(scenario.num_subcarriers))
    groups, plans, exec_order = {}, {}, {}

    while remaining and available:
        best = None
        for i in remaining:
            found = _find_minimum_group(views[i], available, bandwidth,
                                        0.0, include_exec_time)
            if found is None:
                continue
            group, plan = found
            saving = views[i].e_local_j - plan.tx_energy_j
            if best is None or saving > best[0]:
                best = (saving, i, group, plan)
        if best is None:
            break
        _, m, group, plan = best
        groups[m] = group
        plans[m] = plan
        exec_order[m] = len(exec_order) + 1
        remaining.remove(m)
        available = [j for j in available if j not in group]

    if groups and available:
        _distribute_leftovers(views, bandwidth, groups, plans, available,
                              include_exec_time)
    return views, groups, plans, exec_order


def min_group_allocate(scenario: Scenario):
    """Greedy subcarrier allocation assuming an unlimited cloudlet CPU."""
    _, groups, plans, exec_order = _min_group_stage(scenario, include_exec_time=False)
    asm = _build_assignment(scenario, groups, plans, exec_order,
                            cpu_constrained=False)
    return asm, evaluate(asm, scenario)


def per_resource_allocate(scenario: Scenario):
    """Subcarriers first, CPU order second, with no shared congestion info.

    Stage one allocates subcarriers as if every offloader will get the CPU
    in time (deadline test covers transmission plus own execution). Stage
    two picks the saving-maximizing execution order; users the CPU cannot
    fit revert to local execution but keep their now-useless subcarriers
    blocked.
    """
    views, groups, plans, _ = _min_group_stage(scenario, include_exec_time=True)

    offloaders = sorted(groups)
    candidates = [(views[i].e_local_j - plans[i].tx_energy_j,
                   plans[i].tx_time_s, views[i].t_exec_s, views[i].deadline_s)
                  for i in offloaders]
    accepted_pos, order_pos, _, _ = dp_cpu_schedule(candidates)
    accepted = {offloaders[k] for k in accepted_pos}
    exec_order = {offloaders[k]: rank for k, rank in order_pos.items()}

    kept = {i: groups[i] for i in accepted}
    kept_plans = {i: plans[i] for i in accepted}
    wasted = {i: groups[i] for i in groups if i not in accepted}
    asm = _build_assignment(scenario, kept, kept_plans, exec_order,
                            cpu_constrained=True, wasted_groups=wasted)
    return asm, evaluate(asm, scenario)


def joint_allocate(scenario: Scenario):
    """Coordinated subcarrier + CPU-time allocation.

    Grows the schedule one user at a time, always knowing the cloudlet
    busy-until time t: a user qualifies only if its minimum group lets it
    finish by its deadline when started at max(tx time, t), and among the
    qualifiers the one saving the most energy per cloudlet-second wins.
    Leftover subcarriers are then appended where they cut energy most,
    re-checking every committed deadline after each append.
    """
    views = _views(scenario)
    bandwidth = scenario.subcarrier_bandwidth_hz
    remaining = list(range(scenario.num_users))
    available = list(range(scenario.num_subcarriers))
    groups, plans, exec_order = {}, {}, {}
    busy_until = 0.0

    while remaining and available:
        best = None
        for i in remaining:
            found = _find_minimum_group(views[i], available, bandwidth,
                                        busy_until, include_exec_time=True)
            if found is None:
                continue
            group, plan = found
            saving = views[i].e_local_j - plan.tx_energy_j
            rate = saving / views[i].t_exec_s
            if best is None or rate > best[0]:
                best = (rate, i, group, plan)
        if best is None:
            break
        _, m, group, plan = best
        groups[m] = group
        plans[m] = plan
        exec_order[m] = len(exec_order) + 1
        busy_until = max(plan.tx_time_s, busy_until) + views[m].t_exec_s
        remaining.remove(m)
        available = [j for j in available if j not in group]

    if groups and available:
        ranked = sorted(exec_order, key=exec_order.get)

        def timeline_ok(user, new_plan):
            t = 0.0
            for i in ranked:
                tx = new_plan.tx_time_s if i == user else plans[i].tx_time_s
                t = max(tx, t) + views[i].t_exec_s
                if t > views[i].deadline_s + DEADLINE_SLACK_S:
                    return False
            return True

        _distribute_leftovers(views, bandwidth, groups, plans, available,
                              include_exec_time=True, timeline_ok=timeline_ok)

    asm = _build_assignment(scenario, groups, plans, exec_order,
                            cpu_constrained=True)
    return asm, evaluate(asm, scenario)


def dp_cpu_schedule(candidates, cap: int = DP_CANDIDATE_CAP):
    """Saving-maximizing non-preemptive execution order over candidates.

    Each candidate is (saving_j, tx_time_s, exec_time_s, deadline_s). The
    table holds, per subset, the best reachable (saving, completion time)
    when the subset's users have been considered in some order and each was
    either accepted (it fit: start at max(own tx time, previous completion),
    finish before its deadline) or skipped. Subsets are filled in increasing
    cardinality by trying every user as the last considered one; ties on
    saving prefer the earlier completion, then the lower index.

    Returns (accepted indices sorted, exec_order index->rank, total saving,
    completion time of the last accepted job).
    """
    n = len(candidates)
    if n > cap:
        raise ValueError(f"{n} candidates exceed the DP cap of {cap} "
                         "(table grows as 2^n)")
    if n == 0:
        return (), {}, 0.0, 0.0

    size = 1 << n
    saving = [0.0] * size
    finish = [0.0] * size
    choice = [(-1, False)] * size

    for mask in range(1, size):
        best = None
        m = mask
        while m:
            i = (m & -m).bit_length() - 1
            m &= m - 1
            prev = mask ^ (1 << i)
            s, t = saving[prev], finish[prev]
            s_i, tx_i, exec_i, deadline_i = candidates[i]
            accepted = False
            done = max(tx_i, t) + exec_i
            if done <= deadline_i + DEADLINE_SLACK_S:
                s, t, accepted = s + s_i, done, True
            key = (-s, t, i)
            if best is None or key < best[0]:
                best = (key, s, t, (i, accepted))
        _, saving[mask], finish[mask], choice[mask] = best

    full = size - 1
    accepted_rev = []
    mask = full
    while mask:
        i, was_accepted = choice[mask]
        if was_accepted:
            accepted_rev.append(i)
        mask ^= 1 << i
    accepted = tuple(reversed(accepted_rev))
    exec_order = {i: rank for rank, i in enumerate(accepted, start=1)}
    return tuple(sorted(accepted)), exec_order, saving[full], finish[full]


def exhaustive_optimal(scenario: Scenario, cpu_constrained: bool,
                       map_budget: int = EXHAUSTIVE_MAP_BUDGET):
    """Best assignment over every subcarrier-to-user map (brute force).

    Each subcarrier goes to one user or stays unassigned, so (M+1)^N maps
    are scored; refuse when that exceeds ``map_budget``. Per map, each user
    with subcarriers gets its optimal plan; without the CPU constraint
    every energy-saving user offloads, with it the DP picks the best
    schedulable subset. Ties keep the first map in enumeration order.
    """
    m_users = scenario.num_users
    n_subs = scenario.num_subcarriers
    total_maps = (m_users + 1) ** n_subs
    if total_maps > map_budget:
        raise ValueError(
            f"exhaustive search needs {total_maps} subcarrier maps, over the "
            f"budget of {map_budget}; shrink the scenario or raise the budget")

    views = _views(scenario)
    bandwidth = scenario.subcarrier_bandwidth_hz
    plan_cache: dict = {}

    def cached_plan(i, group):
        key = (i, group)
        if key not in plan_cache:
            plan_cache[key] = _plan_for(views[i], group, bandwidth,
                                        _tx_deadline(views[i], cpu_constrained))
        return plan_cache[key]

    best = None  # (saving, groups, plans, exec_order)
    for assignment_map in itertools.product(range(-1, m_users), repeat=n_subs):
        groups: dict = {}
        for j, owner in enumerate(assignment_map):
            if owner >= 0:
                groups.setdefault(owner, []).append(j)

        cand_users, cand_plans = [], {}
        for i in sorted(groups):
            plan = cached_plan(i, tuple(groups[i]))
            if plan is None or plan.tx_energy_j >= views[i].e_local_j:
                continue
            cand_users.append(i)
            cand_plans[i] = plan

        if cpu_constrained:
            candidates = [(views[i].e_local_j - cand_plans[i].tx_energy_j,
                           cand_plans[i].tx_time_s, views[i].t_exec_s,
                           views[i].deadline_s) for i in cand_users]
            accepted_pos, order_pos, total_saving, _ = dp_cpu_schedule(candidates)
            accepted = [cand_users[k] for k in accepted_pos]
            exec_order = {cand_users[k]: rank for k, rank in order_pos.items()}
        else:
            accepted = cand_users
            exec_order = {i: rank for rank, i in enumerate(accepted, start=1)}
            total_saving = sum(views[i].e_local_j - cand_plans[i].tx_energy_j
                               for i in accepted)

        if best is None or total_saving > best[0]:
            best = (total_saving,
                    {i: cand_plans[i].group for i in accepted},
                    {i: cand_plans[i] for i in accepted},
                    exec_order)

    _, groups, plans, exec_order = best
    asm = _build_assignment(scenario, groups, plans, exec_order,
                            cpu_constrained=cpu_constrained)
    return asm, evaluate(asm, scenario)


def evaluate(assignment: Assignment, scenario: Scenario) -> ScheduleOutcome:
    """Score an assignment from first principles and check every constraint.

    Recomputes rates, times and energies from the subcarrier and power maps
    alone. Violation identifiers: "9a" subcarrier shared, "9b" broken
    execution order, "9c" power budget exceeded, "9g" deadline missed,
    "power-support" power on an unassigned subcarrier. Deadline checking
    follows the assignment's cloudlet model: transmission only when
    ``cpu_constrained`` is False, the full cloudlet timeline otherwise.
    """
    w = np.asarray(assignment.subcarrier_map)
    p = np.asarray(assignment.power_map)
    alpha = np.asarray(assignment.offload_flags)
    m_users, n_subs = scenario.num_users, scenario.num_subcarriers
    if w.shape != (m_users, n_subs) or p.shape != (m_users, n_subs) \
            or alpha.shape != (m_users,):
        raise ValueError("assignment dimensions do not match the scenario")

    violations = []
    if np.any(w.sum(axis=0) > 1):
        violations.append("9a")
    if np.any((p > POWER_SLACK_W) & (w == 0)):
        violations.append("power-support")

    order = assignment.exec_order
    offloaded = [i for i in range(m_users) if alpha[i]]
    ranks = [order[i] for i in offloaded if i in order]
    if sorted(order) != sorted(offloaded) or len(set(ranks)) != len(offloaded):
        violations.append("9b")

    views = _views(scenario)
    e_local = [v.e_local_j for v in views]
    tx_time = {}
    energy = list(e_local)
    for i in offloaded:
        total_p = float(p[i].sum())
        if total_p > views[i].p_max_w + POWER_SLACK_W:
            violations.append("9c")
        group = [j for j in range(n_subs) if w[i, j]]
        powers = [float(p[i, j]) for j in group]
        rate = aggregate_rate(powers, [views[i].gains[j] for j in group],
                              scenario.subcarrier_bandwidth_hz) if group else 0.0
        tx_time[i] = views[i].data_bits / rate if rate > 0 else float("inf")
        energy[i] = (total_p + views[i].p_circuit_w) * tx_time[i]

    # Cloudlet timeline in execution-rank order: a job starts once its data
    # is in and the CPU is free, so transmission overlaps other jobs' runs.
    completion = {}
    completion_no_overlap = {}
    deadline_ok = True
    busy = 0.0
    queued = 0.0
    for i in sorted(offloaded, key=lambda u: order.get(u, 0)):
        busy = max(tx_time[i], busy) + views[i].t_exec_s
        completion[i] = busy
        completion_no_overlap[i] = tx_time[i] + queued + views[i].t_exec_s
        queued += views[i].t_exec_s
        checked = busy if assignment.cpu_constrained else tx_time[i]
        if checked > views[i].deadline_s + DEADLINE_SLACK_S:
            deadline_ok = False
    if not deadline_ok:
        violations.append("9g")

    total_energy = float(sum(energy))
    wasted = int(sum(w[i].sum() for i in range(m_users) if not alpha[i]))
    return ScheduleOutcome(
        per_user_energy_j=energy,
        per_user_completion_s=completion,
        per_user_completion_no_overlap_s=completion_no_overlap,
        total_energy_j=total_energy,
        total_saving_j=float(sum(e_local)) - total_energy,
        offload_count=int(alpha.sum()),
        feasible=not violations,
        violations=violations,
        wasted_subcarriers=wasted,
    )
