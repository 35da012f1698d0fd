"""Energy-minimal computation offloading in an OFDMA cloudlet cell.

Library layout:

* :mod:`mecsched.scenario`   - random problem instances (channel, jobs, devices)
* :mod:`mecsched.phy`        - link and energy math (water-filling, power search)
* :mod:`mecsched.schedulers` - allocation policies and the feasibility checker
* :mod:`mecsched.bench`      - Monte Carlo sweeps with CSV output
* :mod:`mecsched.plots`      - figure rendering for sweep summaries
* :mod:`mecsched.cli`        - the ``mecsched`` command
"""

from .scenario import (ChannelMatrix, Device, EnergyModel, Job, Scenario,
                       ScenarioConfig, generate_channel, generate_scenario,
                       load_config, path_loss_db, snapshot)
from .phy import (TransmissionPlan, aggregate_rate, local_energy,
                  optimal_transmit_power, queuing_time, remote_exec_time,
                  threshold_power, water_fill)
from .schedulers import (Assignment, ScheduleOutcome, dp_cpu_schedule,
                         evaluate, exhaustive_optimal, find_minimum_group,
                         joint_allocate, min_group_allocate,
                         per_resource_allocate)
from .bench import (ExperimentSpec, ResultRow, emit_results, figure_presets,
                    preset_experiments, run_experiment, run_policy, summarize)

__version__ = "0.1.0"
