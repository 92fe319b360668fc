"""Domain types and energy bookkeeping for a hybrid array transmitter.

All quantities are SI: watts, hertz, seconds, bits. Conversions from dBm or
dB happen only in :mod:`hybrid_ee.sim.config` and the helpers at the bottom
of this module.

The amplifier model is the traditional power amplifier (TPA): a subarray
radiating ``p`` watts draws ``sqrt(p * p_max) / eta_max`` watts. Working in
the auxiliary variable ``x = p * p_max / eta_max**2`` makes the drawn power
simply ``sqrt(x)`` with ``0 <= x <= p_max**2``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

LN2 = math.log(2.0)


class InfeasibleError(ValueError):
    """The rate target cannot be met inside the slot at full power."""


class ThetaOverflowError(OverflowError):
    """Requested duration is so short that the SNR target overflows."""


class BeamformingMode(str, enum.Enum):
    COHERENT = "coherent"
    NONCOHERENT = "noncoherent"


@dataclass(frozen=True)
class SystemConfig:
    """Slot, link and array geometry parameters.

    Attributes
    ----------
    bandwidth : float
        System bandwidth in Hz.
    slot : float
        Slot duration ``T`` in seconds.
    noise_psd : float
        Noise power spectral density in W/Hz.
    rate : float
        Target average data rate in bit/s.
    num_subarrays, antennas_per_subarray : int
        Array geometry ``M`` and ``K``.
    mode : BeamformingMode
    theta_exponent_cap : float
        Largest admissible SNR exponent (in bits) before :func:`theta`
        refuses to evaluate.
    """

    bandwidth: float
    slot: float
    noise_psd: float
    rate: float
    num_subarrays: int
    antennas_per_subarray: int
    mode: BeamformingMode = BeamformingMode.NONCOHERENT
    theta_exponent_cap: float = 1024.0

    def __post_init__(self):
        for name in ("bandwidth", "slot", "noise_psd", "rate", "theta_exponent_cap"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be a positive finite number, got {value!r}")
        for name in ("num_subarrays", "antennas_per_subarray"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")
        object.__setattr__(self, "mode", BeamformingMode(self.mode))

    @property
    def bits_per_slot(self) -> float:
        return self.rate * self.slot

    @property
    def noise_power(self) -> float:
        return noise_power(self)

    def replace(self, **changes) -> "SystemConfig":
        from dataclasses import replace

        return replace(self, **changes)


@dataclass(frozen=True)
class PaModel:
    """Subarray-level TPA with maximum output ``p_max`` (``K`` times the
    per-antenna maximum) and peak efficiency ``eta_max``."""

    p_max: float
    eta_max: float

    def __post_init__(self):
        if not self.p_max > 0:
            raise ValueError(f"p_max must be positive, got {self.p_max!r}")
        if not 0 < self.eta_max <= 1:
            raise ValueError(f"eta_max must lie in (0, 1], got {self.eta_max!r}")

    @property
    def full_drive(self) -> float:
        """Radiated power at which the amplifier draws exactly ``p_max``."""
        return self.p_max * self.eta_max**2

    @property
    def x_max(self) -> float:
        return self.p_max**2

    def to_x(self, p):
        return np.asarray(p, dtype=float) * (self.p_max / self.eta_max**2)

    def to_power(self, x):
        return np.asarray(x, dtype=float) * (self.eta_max**2 / self.p_max)


@dataclass(frozen=True)
class CircuitModel:
    """Static, rate-dependent and idle circuit power of one subarray.

    ``dynamic`` overrides the default linear model ``epsilon * R_a``; it must
    vanish at zero rate, be non-decreasing and (for the curvature results to
    hold) convex.
    """

    p_base: float
    p_idle: float
    epsilon: float = 0.0
    dynamic: Optional[Callable[[float], float]] = field(default=None, compare=False)

    def __post_init__(self):
        if self.p_base < 0 or self.p_idle < 0 or self.epsilon < 0:
            raise ValueError("circuit powers and epsilon must be non-negative")

    @property
    def is_linear(self) -> bool:
        return self.dynamic is None

    def dynamic_power(self, rate):
        """Rate-dependent circuit power in W at instantaneous rate ``rate``."""
        if self.dynamic is None:
            return self.epsilon * np.asarray(rate, dtype=float)
        return self.dynamic(rate)


@dataclass(frozen=True)
class ChannelRealization:
    """``M x K`` complex channel coefficients including path loss."""

    coefficients: np.ndarray
    distance: float = float("nan")
    shadowing_db: float = 0.0

    def __post_init__(self):
        coeffs = np.asarray(self.coefficients, dtype=complex)
        if coeffs.ndim != 2:
            raise ValueError("coefficients must be an M x K array")
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("channel coefficients must be finite")
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def shape(self):
        return self.coefficients.shape


@dataclass(frozen=True)
class EffectiveChannel:
    """Per-subarray effective amplitudes ``h``, effective gains ``kappa`` and
    the permutation ``order`` listing subarray indices by descending kappa."""

    h: np.ndarray
    kappa: np.ndarray
    order: np.ndarray
    mode: BeamformingMode

    @property
    def num_subarrays(self) -> int:
        return len(self.kappa)

    @property
    def sorted_kappa(self) -> np.ndarray:
        return self.kappa[self.order]


@dataclass(frozen=True)
class EnergyBreakdown:
    """Energy spent over one slot, in joules."""

    pa_energy: float
    static_circuit_energy: float
    dynamic_circuit_energy: float
    idle_energy: float

    @property
    def total(self) -> float:
        return (
            self.pa_energy
            + self.static_circuit_energy
            + self.dynamic_circuit_energy
            + self.idle_energy
        )


@dataclass(frozen=True)
class AllocationSolution:
    t_star: float
    m_star: int
    powers: np.ndarray
    energy: EnergyBreakdown
    ee: float
    feasible: bool = True
    scheme: str = "proposed"
    mode: Optional[BeamformingMode] = None

    @property
    def e_total(self) -> float:
        return self.energy.total


def noise_power(cfg: SystemConfig) -> float:
    return cfg.noise_psd * cfg.bandwidth


def snr_exponent(t, cfg: SystemConfig):
    """Spectral efficiency ``r T / (t W)`` (bits/s/Hz) needed at duration ``t``."""
    return cfg.bits_per_slot / (np.asarray(t, dtype=float) * cfg.bandwidth)


def theta(t, cfg: SystemConfig):
    """Received power (W) needed to deliver the slot's bits within ``t`` seconds.

    Evaluated as ``expm1(u ln 2) * sigma^2`` so that ``u`` close to zero keeps
    full precision. Accepts scalars or arrays.
    """
    u = snr_exponent(t, cfg)
    if np.any(u > cfg.theta_exponent_cap):
        raise ThetaOverflowError(
            f"SNR exponent {np.max(u):.4g} bits exceeds cap {cfg.theta_exponent_cap}; "
            "duration is far below any feasible minimum"
        )
    out = np.expm1(u * LN2) * noise_power(cfg)
    return float(out) if np.ndim(out) == 0 else out


def pa_power(p, pa: PaModel):
    """Power drawn by a subarray amplifier radiating ``p`` watts."""
    p = np.asarray(p, dtype=float)
    if np.any(p < 0) or np.any(p > pa.full_drive * (1 + 1e-12)):
        raise ValueError(
            f"PA input outside [0, {pa.full_drive:.6g}] W (full drive p_max * eta_max^2)"
        )
    # ratio form keeps pa_power(full_drive) == p_max exactly
    out = pa.p_max * np.sqrt(np.minimum(p / pa.full_drive, 1.0))
    return float(out) if out.ndim == 0 else out


def total_energy(
    t: float,
    powers,
    circuit: CircuitModel,
    pa: PaModel,
    cfg: SystemConfig,
    n_active: Optional[int] = None,
) -> EnergyBreakdown:
    """Energy of one slot when the subarrays radiate ``powers`` for ``t`` seconds.

    Subarrays with non-zero power are active: they pay amplifier, static and
    rate-dependent circuit power while transmitting and idle power for the
    remainder of the slot. Inactive subarrays idle for the whole slot.
    ``n_active`` overrides the count of subarrays whose RF chains are on
    (used by benchmarks that keep every chain powered).
    """
    powers = np.asarray(powers, dtype=float)
    M = cfg.num_subarrays
    T = cfg.slot
    m = int(np.count_nonzero(powers > 0)) if n_active is None else int(n_active)
    pa_e = float(np.sum(pa_power(powers, pa))) * t
    static = m * circuit.p_base * t
    dynamic = m * float(circuit.dynamic_power(cfg.bits_per_slot / t)) * t if m else 0.0
    idle = m * circuit.p_idle * (T - t) + (M - m) * circuit.p_idle * T
    return EnergyBreakdown(pa_e, static, dynamic, idle)


def energy_efficiency(energy: EnergyBreakdown, cfg: SystemConfig) -> float:
    """Delivered bits per joule."""
    return cfg.bits_per_slot / energy.total


def make_solution(
    t: float,
    powers,
    circuit: CircuitModel,
    pa: PaModel,
    cfg: SystemConfig,
    scheme: str = "proposed",
    n_active: Optional[int] = None,
    mode: Optional[BeamformingMode] = None,
) -> AllocationSolution:
    powers = np.asarray(powers, dtype=float)
    energy = total_energy(t, powers, circuit, pa, cfg, n_active=n_active)
    m = int(np.count_nonzero(powers > 0)) if n_active is None else int(n_active)
    return AllocationSolution(
        t_star=float(t),
        m_star=m,
        powers=powers,
        energy=energy,
        ee=energy_efficiency(energy, cfg),
        scheme=scheme,
        mode=cfg.mode if mode is None else BeamformingMode(mode),
    )


def received_power(powers, h, mode: BeamformingMode):
    """Received signal power for per-subarray powers and effective amplitudes."""
    powers = np.asarray(powers, dtype=float)
    h = np.asarray(h, dtype=float)
    if BeamformingMode(mode) is BeamformingMode.COHERENT:
        return float(np.sum(np.sqrt(powers) * h)) ** 2
    return float(np.sum(powers * h**2))


def achieved_rate(t: float, powers, eff: EffectiveChannel, cfg: SystemConfig) -> float:
    """Average rate over the slot when transmitting ``powers`` for ``t`` seconds."""
    s = received_power(powers, eff.h, eff.mode)
    return t / cfg.slot * cfg.bandwidth * math.log2(1 + s / noise_power(cfg))


def dbm_to_watt(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watt_to_dbm(watt: float) -> float:
    return 10.0 * math.log10(watt) + 30.0


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)
