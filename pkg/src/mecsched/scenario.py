"""Reproducible random problem instances for an OFDMA cloudlet cell.

A scenario bundles everything a scheduling policy needs: one job and one
device per user, the per-user/per-subcarrier channel-gain-to-noise matrix,
the energy model constants, and the cloudlet CPU frequency.

Channel construction: users are placed uniformly over a disk centered at
the access point, large-scale attenuation follows
``20*log10(d_km) + 20*log10(f_khz) + 32.45`` dB, small-scale fading is a
unit-mean exponential power factor drawn independently per (user,
subcarrier), and the result is normalized by the thermal noise power over
one subcarrier. The carrier frequencies are taken in kHz exactly as
configured (the default band is 1850-1960 kHz); override ``band_low_khz``
and ``band_high_khz`` if a different unit convention is wanted.
"""

import math
from dataclasses import dataclass, fields, replace

import numpy as np

__all__ = [
    "Job",
    "Device",
    "EnergyModel",
    "ChannelMatrix",
    "ScenarioConfig",
    "Scenario",
    "path_loss_db",
    "subcarrier_centers_khz",
    "generate_channel",
    "generate_scenario",
    "load_config",
    "snapshot",
]

# Fallback device CPU ceiling; raised when the deadline-exact frequency of
# the job is higher, so running locally is always possible.
DEFAULT_LOCAL_CPU_HZ = 1e9

# Users cannot sit exactly on the access point (log-distance blows up).
MIN_USER_DISTANCE_KM = 1e-6


@dataclass(frozen=True)
class Job:
    """One offloadable job: input size in bits and a hard deadline."""

    data_size_bits: float
    deadline_s: float

    def __post_init__(self):
        if self.data_size_bits < 0:
            raise ValueError("data_size_bits must be >= 0")
        if self.deadline_s <= 0:
            raise ValueError("deadline_s must be > 0")


@dataclass(frozen=True)
class Device:
    """Radio/CPU capabilities of one mobile device."""

    max_local_freq_hz: float
    max_tx_power_w: float
    circuit_power_w: float

    def __post_init__(self):
        if self.max_local_freq_hz <= 0:
            raise ValueError("max_local_freq_hz must be > 0")
        if self.max_tx_power_w <= 0:
            raise ValueError("max_tx_power_w must be > 0")
        if self.circuit_power_w < 0:
            raise ValueError("circuit_power_w must be >= 0")


@dataclass(frozen=True)
class EnergyModel:
    """CPU energy constants: J*s^2 per cycle^3 and cycles per input bit."""

    kappa: float
    cycles_per_bit: float

    def __post_init__(self):
        if self.kappa <= 0:
            raise ValueError("kappa must be > 0")
        if self.cycles_per_bit <= 0:
            raise ValueError("cycles_per_bit must be > 0")


@dataclass(frozen=True)
class ChannelMatrix:
    """Linear channel-gain-to-noise ratios, one row per user."""

    gains: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.gains, dtype=float)
        if g.ndim != 2:
            raise ValueError("gains must be a 2-D matrix")
        if not np.all(np.isfinite(g)) or np.any(g < 0):
            raise ValueError("gains must be finite and >= 0")
        object.__setattr__(self, "gains", g)

    @property
    def num_users(self) -> int:
        return self.gains.shape[0]

    @property
    def num_subcarriers(self) -> int:
        return self.gains.shape[1]


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything needed to draw a random scenario, plus the RNG seed."""

    num_users: int = 4
    num_subcarriers: int = 4
    subcarrier_bandwidth_hz: float = 18750.0
    band_low_khz: float = 1850.0
    band_high_khz: float = 1960.0
    cell_radius_km: float = 0.2
    cloudlet_freq_hz: float = 6e8
    data_size_range_bits: tuple = (900.0, 1100.0)
    deadline_range_s: tuple = (0.05, 0.15)
    kappa: float = 1e-24
    cycles_per_bit: float = 18000.0
    circuit_power_w: float = 0.05
    max_tx_power_w: float = 1.0
    noise_psd_dbm_hz: float = -174.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.num_users < 1 or self.num_subcarriers < 1:
            raise ValueError("need at least one user and one subcarrier")
        for name in ("subcarrier_bandwidth_hz", "band_low_khz", "band_high_khz",
                     "cell_radius_km", "cloudlet_freq_hz", "kappa",
                     "cycles_per_bit", "max_tx_power_w"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if self.circuit_power_w < 0:
            raise ValueError("circuit_power_w must be >= 0")
        for name in ("data_size_range_bits", "deadline_range_s"):
            lo, hi = getattr(self, name)
            if not (0 < lo <= hi):
                raise ValueError(f"{name} must be a nonempty positive interval")
        span_hz = (self.band_high_khz - self.band_low_khz) * 1e3
        if self.num_subcarriers * self.subcarrier_bandwidth_hz > span_hz:
            raise ValueError("subcarriers do not fit in the configured band")


@dataclass(frozen=True)
class Scenario:
    """A fully instantiated problem: jobs, devices, channel, constants."""

    jobs: tuple
    devices: tuple
    channel: ChannelMatrix
    energy_model: EnergyModel
    cloudlet_freq_hz: float
    subcarrier_bandwidth_hz: float

    def __post_init__(self):
        m = self.channel.num_users
        if len(self.jobs) != m or len(self.devices) != m:
            raise ValueError("jobs/devices length must match channel rows")

    @property
    def num_users(self) -> int:
        return self.channel.num_users

    @property
    def num_subcarriers(self) -> int:
        return self.channel.num_subcarriers


def path_loss_db(distance_km: float, carrier_khz: float) -> float:
    """Large-scale attenuation in dB at a distance (km) and carrier (kHz)."""
    if distance_km <= 0 or carrier_khz <= 0:
        raise ValueError("distance_km and carrier_khz must be > 0")
    return 20.0 * math.log10(distance_km) + 20.0 * math.log10(carrier_khz) + 32.45


def subcarrier_centers_khz(config: ScenarioConfig) -> list[float]:
    """Center frequencies: the band split into equal slots, one per subcarrier."""
    lo, hi = config.band_low_khz, config.band_high_khz
    slot = (hi - lo) / config.num_subcarriers
    return [lo + (j + 0.5) * slot for j in range(config.num_subcarriers)]


def _noise_power_w(config: ScenarioConfig) -> float:
    psd_w_hz = 10.0 ** ((config.noise_psd_dbm_hz - 30.0) / 10.0)
    return psd_w_hz * config.subcarrier_bandwidth_hz


def generate_channel(config: ScenarioConfig, rng: np.random.Generator,
                     fading: bool = True,
                     centers_khz: list[float] | None = None) -> ChannelMatrix:
    """Draw the gain-to-noise matrix for one snapshot.

    ``fading=False`` keeps only the distance/frequency term (test hook);
    ``centers_khz`` overrides the computed subcarrier center frequencies.
    Consumes exactly M uniform draws (positions) and, with fading, M*N
    exponential draws, so generation stays bit-reproducible.
    """
    m, n = config.num_users, config.num_subcarriers
    if centers_khz is None:
        centers_khz = subcarrier_centers_khz(config)
    elif len(centers_khz) != n:
        raise ValueError("centers_khz must have one entry per subcarrier")

    # Uniform over the disk area: density of the radius grows linearly.
    distances_km = config.cell_radius_km * np.sqrt(rng.uniform(size=m))
    distances_km = np.maximum(distances_km, MIN_USER_DISTANCE_KM)

    noise_w = _noise_power_w(config)
    gains = np.empty((m, n))
    for i in range(m):
        for j in range(n):
            pl = path_loss_db(distances_km[i], centers_khz[j])
            gains[i, j] = 10.0 ** (-pl / 10.0) / noise_w
    if fading:
        gains *= rng.exponential(1.0, size=(m, n))
    return ChannelMatrix(gains=gains)


def generate_scenario(config: ScenarioConfig,
                      rng: np.random.Generator | None = None) -> Scenario:
    """Draw a full scenario; deterministic for a given config and seed."""
    if rng is None:
        rng = np.random.default_rng(config.rng_seed)
    channel = generate_channel(config, rng)

    d_lo, d_hi = config.data_size_range_bits
    t_lo, t_hi = config.deadline_range_s
    sizes = rng.uniform(d_lo, d_hi, size=config.num_users)
    deadlines = rng.uniform(t_lo, t_hi, size=config.num_users)

    jobs = []
    devices = []
    for i in range(config.num_users):
        jobs.append(Job(data_size_bits=float(sizes[i]), deadline_s=float(deadlines[i])))
        needed_hz = config.cycles_per_bit * sizes[i] / deadlines[i]
        devices.append(Device(
            max_local_freq_hz=max(DEFAULT_LOCAL_CPU_HZ, float(needed_hz)),
            max_tx_power_w=config.max_tx_power_w,
            circuit_power_w=config.circuit_power_w,
        ))
    return Scenario(
        jobs=tuple(jobs),
        devices=tuple(devices),
        channel=channel,
        energy_model=EnergyModel(kappa=config.kappa, cycles_per_bit=config.cycles_per_bit),
        cloudlet_freq_hz=config.cloudlet_freq_hz,
        subcarrier_bandwidth_hz=config.subcarrier_bandwidth_hz,
    )


_INT_FIELDS = {"num_users", "num_subcarriers", "rng_seed"}
_RANGE_FIELDS = {"data_size_range_bits", "deadline_range_s"}


def load_config(path) -> ScenarioConfig:
    """Read a flat ``key = value`` config file; unset keys keep defaults.

    Interval fields take two comma- or space-separated numbers, e.g.
    ``data_size_range_bits = 900, 1100``. ``#`` starts a comment.
    """
    known = {f.name for f in fields(ScenarioConfig)}
    overrides = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in known:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            if key in _RANGE_FIELDS:
                parts = value.replace(",", " ").split()
                if len(parts) != 2:
                    raise ValueError(f"{path}:{lineno}: {key} needs two numbers")
                overrides[key] = (float(parts[0]), float(parts[1]))
            elif key in _INT_FIELDS:
                overrides[key] = int(value)
            else:
                overrides[key] = float(value)
    return replace(ScenarioConfig(), **overrides)


def snapshot(scenario: Scenario) -> str:
    """Deterministic text dump of a scenario, for golden-file comparisons."""
    out = []
    out.append(f"users {scenario.num_users} subcarriers {scenario.num_subcarriers}")
    out.append(f"subcarrier_bandwidth_hz {scenario.subcarrier_bandwidth_hz!r}")
    out.append(f"cloudlet_freq_hz {scenario.cloudlet_freq_hz!r}")
    out.append(f"kappa {scenario.energy_model.kappa!r}")
    out.append(f"cycles_per_bit {scenario.energy_model.cycles_per_bit!r}")
    for i, (job, dev) in enumerate(zip(scenario.jobs, scenario.devices)):
        out.append(f"job {i} bits {job.data_size_bits!r} deadline_s {job.deadline_s!r}")
        out.append(f"device {i} cpu_hz {dev.max_local_freq_hz!r} "
                   f"tx_w {dev.max_tx_power_w!r} circuit_w {dev.circuit_power_w!r}")
    out.append("gains")
    for row in scenario.channel.gains:
        out.append(" ".join(repr(float(x)) for x in row))
    return "\n".join(out) + "\n"
