"""Grid-search reference optimizer and an independent solution checker.

Nothing here relies on the saturation structure or on segment curvature:
the oracle enumerates durations and per-subarray ``x`` levels and keeps the
cheapest combination that meets the rate. It is meant for ``M <= 3``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List

import numpy as np

from .model import (
    LN2,
    AllocationSolution,
    BeamformingMode,
    CircuitModel,
    EffectiveChannel,
    InfeasibleError,
    PaModel,
    SystemConfig,
    achieved_rate,
    make_solution,
    noise_power,
    total_energy,
)


def _required_power(t, cfg: SystemConfig):
    u = cfg.bits_per_slot / (np.asarray(t, dtype=float) * cfg.bandwidth)
    return np.expm1(u * LN2) * noise_power(cfg)


def _shortest_duration(eff: EffectiveChannel, pa: PaModel, cfg: SystemConfig) -> float:
    """Duration at which every subarray at full drive exactly meets the rate."""
    full = np.full(eff.num_subarrays, pa.x_max)
    if eff.mode is BeamformingMode.COHERENT:
        s = float(np.sum(np.sqrt(full) * eff.kappa)) ** 2
    else:
        s = float(np.sum(full * eff.kappa**2))
    if s <= 0:
        return math.inf
    return cfg.bits_per_slot / (cfg.bandwidth * math.log2(1 + s / noise_power(cfg)))


def power_levels(xmax: float, n_p: int, floor: float = 1e-12) -> np.ndarray:
    """``n_p`` uniform levels on ``[0, xmax]`` merged with ``n_p`` log-spaced
    levels on ``[floor * xmax, xmax]``; the log part resolves the small
    powers a uniform grid misses entirely."""
    uni = np.linspace(0.0, xmax, n_p)
    geo = xmax * np.logspace(math.log10(floor), 0.0, n_p)
    return np.unique(np.concatenate([uni, geo]))


def brute_force_solve(
    eff: EffectiveChannel,
    pa: PaModel,
    circuit: CircuitModel,
    cfg: SystemConfig,
    n_t: int = 2000,
    n_p: int = 400,
    slack: float = 1e-3,
    exhaustive: bool = False,
) -> AllocationSolution:
    """Cheapest grid point meeting the rate.

    Durations span ``[t_min^M, T]`` on ``n_t`` points. At each duration one
    subarray at a time is left free: every other subarray takes each level of
    :func:`power_levels` and the free one is solved from the rate equation,
    kept if it lands in ``[0, p_max^2]``. All choices of the free subarray are
    scanned.

    ``exhaustive=True`` instead scans the full uniform ``n_p``-per-axis grid
    and accepts points whose received power lies within relative ``slack`` of
    the requirement. That variant is much coarser at realistic power levels.
    """
    M = eff.num_subarrays
    if M > 3:
        raise ValueError("brute-force oracle supports at most 3 subarrays")
    T = cfg.slot
    lo = _shortest_duration(eff, pa, cfg)
    if not lo <= T:
        raise InfeasibleError("no duration within the slot meets the rate")
    ts = np.linspace(lo, T, n_t)
    xmax = pa.x_max
    coherent = eff.mode is BeamformingMode.COHERENT
    k = eff.kappa

    if exhaustive:
        levels = np.linspace(0.0, xmax, n_p)
        mesh = np.stack(np.meshgrid(*([levels] * M), indexing="ij"), axis=-1).reshape(-1, M)
        delivered = (np.sqrt(mesh) @ k) ** 2 if coherent else mesh @ k**2
    else:
        levels = power_levels(xmax, n_p)
        if M > 1:
            lead = np.stack(np.meshgrid(*([levels] * (M - 1)), indexing="ij"), axis=-1).reshape(-1, M - 1)
        else:
            lead = np.zeros((1, 0))

    best = (math.inf, None, None)
    for t in ts:
        th = float(_required_power(t, cfg))
        if exhaustive:
            cand = mesh[np.abs(delivered - th) <= slack * th]
        else:
            parts = []
            for j in range(M):
                others = [i for i in range(M) if i != j]
                if k[j] <= 0:
                    continue
                if coherent:
                    head = np.sqrt(lead) @ k[others]
                    gap = math.sqrt(th) - head
                    xj = (gap / k[j]) ** 2
                else:
                    gap = th - lead @ k[others] ** 2
                    xj = gap / k[j] ** 2
                ok = (gap >= 0) & (xj <= xmax)
                if not np.any(ok):
                    continue
                x = np.empty((int(ok.sum()), M))
                x[:, others] = lead[ok]
                x[:, j] = xj[ok]
                parts.append(x)
            cand = np.concatenate(parts) if parts else np.zeros((0, M))
        if cand.size == 0:
            continue
        energy = _grid_energy(cand, t, circuit, cfg)
        i = int(np.argmin(energy))
        if energy[i] < best[0]:
            best = (float(energy[i]), t, cand[i])
    if best[1] is None:
        raise InfeasibleError("no grid point meets the rate")
    _, t, x = best
    return make_solution(t, pa.to_power(x), circuit, pa, cfg, scheme="oracle", mode=eff.mode)


def _grid_energy(x: np.ndarray, t: float, circuit: CircuitModel, cfg: SystemConfig) -> np.ndarray:
    M = cfg.num_subarrays
    T = cfg.slot
    n_on = np.count_nonzero(x > 0, axis=1)
    dyn = float(circuit.dynamic_power(cfg.bits_per_slot / t))
    return (
        np.sum(np.sqrt(x), axis=1) * t
        + n_on * (circuit.p_base + dyn) * t
        + n_on * circuit.p_idle * (T - t)
        + (M - n_on) * circuit.p_idle * T
    )


@dataclass
class Check:
    name: str
    passed: bool
    residual: float


@dataclass
class VerificationReport:
    checks: List[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self) -> List[str]:
        return [c.name for c in self.checks if not c.passed]

    def __str__(self):
        return "\n".join(
            f"{c.name:<16} {'pass' if c.passed else 'FAIL'}  residual={c.residual:.3e}" for c in self.checks
        )


def verify_solution(
    sol: AllocationSolution,
    eff: EffectiveChannel,
    pa: PaModel,
    circuit: CircuitModel,
    cfg: SystemConfig,
    rtol: float = 1e-9,
    check_structure: bool = True,
) -> VerificationReport:
    """Re-derive rate, power bounds, ordering, duration bounds and energy."""
    report = VerificationReport()
    p = np.asarray(sol.powers, dtype=float)
    x = pa.to_x(p)
    xmax = pa.x_max

    rate = achieved_rate(sol.t_star, p, eff, cfg)
    rate_res = abs(rate - cfg.rate) / cfg.rate
    report.checks.append(Check("rate", rate_res <= rtol, rate_res))

    over = max(float(np.max(x - xmax)) / xmax, float(np.max(-x)) / xmax, 0.0)
    report.checks.append(Check("power-bounds", over <= 1e-12, over))

    if check_structure:
        xs = x[np.argsort(-eff.kappa, kind="stable")]
        on = np.flatnonzero(xs > 0)
        worst = 0.0
        if on.size:
            m = on[-1] + 1
            if on.size != m:
                worst = 1.0  # gap in the active prefix
            worst = max(worst, float(np.max(np.abs(xs[: m - 1] - xmax) / xmax, initial=0.0)))
        report.checks.append(Check("ordering", worst <= 1e-9, worst))

    lo = _shortest_duration(eff, pa, cfg)
    dur_res = max(lo - sol.t_star, sol.t_star - cfg.slot, 0.0) / cfg.slot
    report.checks.append(Check("duration", dur_res <= 1e-12, dur_res))

    n_active = None if sol.scheme == "proposed" or sol.scheme == "oracle" else sol.m_star
    energy = total_energy(sol.t_star, np.clip(p, 0.0, pa.full_drive), circuit, pa, cfg, n_active=n_active)
    e_res = abs(energy.total - sol.energy.total) / energy.total
    ee_res = abs(cfg.bits_per_slot / energy.total - sol.ee) / sol.ee
    report.checks.append(Check("energy", max(e_res, ee_res) <= 1e-12, max(e_res, ee_res)))
    return report
