"""Benchmark schemes that keep every subarray powered.

* ``fixed``: equal powers, transmit for the whole slot.
* ``uniform-duration``: equal powers, transmit duration optimized.
* ``water-filling``: duration optimized, powers shaped to maximize received
  power for a given total (maximum-ratio weighting under coherent combining,
  best-channel-first filling under non-coherent combining).

Every scheme meets the rate target with equality at its returned duration.
"""

from __future__ import annotations

import enum
from typing import Callable, Optional, Tuple

import numpy as np

from .duration import DEFAULT_TOL, golden_section, solve, t_min
from .model import (
    AllocationSolution,
    BeamformingMode,
    CircuitModel,
    EffectiveChannel,
    InfeasibleError,
    PaModel,
    SystemConfig,
    make_solution,
    theta,
)
from .power import unsort

N_GRID = 1024


class SchemeId(str, enum.Enum):
    PROPOSED = "proposed"
    FIXED = "fixed"
    UNIFORM_DURATION = "uniform-duration"
    WATER_FILLING = "water-filling"


def _uniform_x(th, eff: EffectiveChannel):
    k = eff.kappa
    if eff.mode is BeamformingMode.COHERENT:
        return np.asarray(th) / np.sum(k) ** 2
    return np.asarray(th) / np.sum(k**2)


def _all_on_energy(sum_sqrt_x, t, circuit: CircuitModel, cfg: SystemConfig):
    """Slot energy with all ``M`` chains on for ``t`` seconds."""
    M = cfg.num_subarrays
    per_chain = circuit.p_base - circuit.p_idle + np.asarray(circuit.dynamic_power(cfg.bits_per_slot / t))
    return (sum_sqrt_x + M * per_chain) * t + M * circuit.p_idle * cfg.slot


def search_duration(
    f: Callable[[np.ndarray], np.ndarray],
    lo: float,
    hi: float,
    n_grid: int = N_GRID,
    tol: float = 1e-12,
    max_basins: int = 4,
) -> Tuple[float, float]:
    """Minimize ``f`` on ``[lo, hi]`` without assuming unimodality.

    ``f`` is evaluated on a uniform grid; golden-section refinement then runs
    in the two cells around each of the best grid-local minima.
    """
    if hi <= lo:
        return lo, float(f(np.array([lo]))[0])
    grid = np.linspace(lo, hi, n_grid)
    vals = f(grid)
    left = np.r_[np.inf, vals[:-1]]
    right = np.r_[vals[1:], np.inf]
    basins = np.flatnonzero((vals <= left) & (vals <= right))
    basins = basins[np.argsort(vals[basins], kind="stable")][:max_basins]
    best_t, best_v = grid[basins[0]], vals[basins[0]]
    scalar = lambda t: float(f(np.array([t]))[0])
    for i in basins:
        a, b = grid[max(i - 1, 0)], grid[min(i + 1, n_grid - 1)]
        t, v = golden_section(scalar, a, b, tol)
        if v < best_v:
            best_t, best_v = t, v
    return float(best_t), float(best_v)


def _feasible_window(eff, pa, cfg) -> float:
    lo = t_min(eff.num_subarrays, eff, pa, cfg)
    if not lo <= cfg.slot:
        raise InfeasibleError(f"all subarrays at full drive need {lo:.6g} s > T = {cfg.slot:.6g} s")
    return lo


def fixed_scheme(eff: EffectiveChannel, pa: PaModel, circuit: CircuitModel, cfg: SystemConfig) -> AllocationSolution:
    """All subarrays on at equal power for the whole slot."""
    x = float(_uniform_x(theta(cfg.slot, cfg), eff))
    if x > pa.x_max * (1 + 1e-12):
        raise InfeasibleError("equal powers at full drive cannot meet the rate within the slot")
    x = min(x, pa.x_max)
    powers = np.full(eff.num_subarrays, float(pa.to_power(x)))
    return make_solution(cfg.slot, powers, circuit, pa, cfg, scheme=SchemeId.FIXED.value,
                         n_active=cfg.num_subarrays, mode=eff.mode)


def uniform_optimized_duration(
    eff: EffectiveChannel, pa: PaModel, circuit: CircuitModel, cfg: SystemConfig, n_grid: int = N_GRID
) -> AllocationSolution:
    """All subarrays on at equal power; the duration is searched numerically."""
    lo = _feasible_window(eff, pa, cfg)
    M = eff.num_subarrays

    def energy(t):
        x = np.minimum(_uniform_x(theta(t, cfg), eff), pa.x_max)
        return _all_on_energy(M * np.sqrt(x), t, circuit, cfg)

    t, _ = search_duration(energy, lo, cfg.slot, n_grid=n_grid, tol=DEFAULT_TOL * cfg.slot)
    x = min(float(_uniform_x(theta(t, cfg), eff)), pa.x_max)
    powers = np.full(M, float(pa.to_power(x)))
    return make_solution(t, powers, circuit, pa, cfg, scheme=SchemeId.UNIFORM_DURATION.value,
                         n_active=M, mode=eff.mode)


def _tie_groups(values: np.ndarray, rtol: float = 1e-12):
    """Split a descending array into runs of (numerically) equal values."""
    groups, start = [], 0
    for i in range(1, len(values) + 1):
        if i == len(values) or values[i] < values[start] * (1 - rtol):
            groups.append((start, i))
            start = i
    return groups


def water_filling_x(th, eff: EffectiveChannel, pa: PaModel) -> np.ndarray:
    """Least total radiated power meeting ``theta`` under per-subarray caps,
    returned in original subarray order (shape ``th.shape + (M,)``).

    Minimizing total power at a given received power has the same solution
    family as maximizing received power at a given total power. Coherent:
    ``sqrt(x)`` proportional to ``kappa`` with saturated subarrays clipped at
    ``p_max``. Non-coherent: fill the strongest subarrays to the cap, with
    equal-gain subarrays sharing the level evenly. Infeasible entries are NaN.
    """
    th = np.atleast_1d(np.asarray(th, dtype=float))
    ks = eff.sorted_kappa
    M = len(ks)
    P = pa.p_max
    out = np.full(th.shape + (M,), np.nan)
    if eff.mode is BeamformingMode.COHERENT:
        demand = np.sqrt(th)
        pending = np.ones(th.shape, dtype=bool)
        for s in range(M + 1):
            head = P * np.sum(ks[:s])
            if s == M:
                ok = pending & (demand <= head * (1 + 1e-12))
                out[ok] = P**2
                break
            tail = np.sum(ks[s:] ** 2)
            if tail <= 0:
                continue
            c = (demand - head) / tail
            ok = pending & (c * ks[s] <= P)
            if np.any(ok):
                y = np.empty((int(ok.sum()), M))
                y[:, :s] = P
                y[:, s:] = np.clip(c[ok, None] * ks[None, s:], 0.0, P)
                out[ok] = y**2
                pending &= ~ok
    else:
        k2 = ks**2
        xmax = pa.x_max
        filled = np.zeros(th.shape)
        pending = np.ones(th.shape, dtype=bool)
        for a, b in _tie_groups(ks):
            cap = xmax * np.sum(k2[a:b])
            if cap <= 0:
                continue
            need = th - filled
            ok = pending & (need <= cap)
            if np.any(ok):
                x = np.zeros((int(ok.sum()), M))
                x[:, :a] = xmax
                x[:, a:b] = (need[ok] / np.sum(k2[a:b]))[:, None]
                out[ok] = np.minimum(x, xmax)
                pending &= ~ok
            filled = filled + cap
    return unsort(out, eff)


def max_received_power_allocation(h, total_power: float, cap: float, mode: BeamformingMode) -> np.ndarray:
    """Radiated powers maximizing received power for a fixed ``total_power``
    with every subarray capped at ``cap`` (both in W).

    Coherent: ``p`` proportional to ``h**2``, capped and redistributed.
    Non-coherent: strongest channels first, equal gains sharing evenly.
    """
    h = np.asarray(h, dtype=float)
    M = len(h)
    if total_power > M * cap * (1 + 1e-12):
        raise ValueError("total power exceeds the sum of the caps")
    order = np.argsort(-h, kind="stable")
    hs = h[order]
    p = np.zeros(M)
    if BeamformingMode(mode) is BeamformingMode.COHERENT:
        free = np.ones(M, dtype=bool)
        remaining = total_power
        while True:
            w = np.where(free, hs**2, 0.0)
            if w.sum() <= 0:
                p[free] = remaining / free.sum()
                break
            trial = remaining * w / w.sum()
            over = free & (trial > cap)
            if not over.any():
                p[free] = trial[free]
                break
            p[over] = cap
            remaining -= cap * over.sum()
            free &= ~over
    else:
        remaining = total_power
        for a, b in _tie_groups(hs):
            share = min(remaining, cap * (b - a))
            p[a:b] = share / (b - a)
            remaining -= share
            if remaining <= 0:
                break
    out = np.empty(M)
    out[order] = p
    return out


def water_filling_scheme(
    eff: EffectiveChannel, pa: PaModel, circuit: CircuitModel, cfg: SystemConfig, n_grid: int = N_GRID
) -> AllocationSolution:
    """All chains on, water-filled powers, duration searched numerically."""
    lo = _feasible_window(eff, pa, cfg)
    M = eff.num_subarrays

    def energy(t):
        x = water_filling_x(theta(t, cfg), eff, pa)
        return _all_on_energy(np.sum(np.sqrt(x), axis=-1), t, circuit, cfg)

    t, _ = search_duration(energy, lo, cfg.slot, n_grid=n_grid, tol=DEFAULT_TOL * cfg.slot)
    x = water_filling_x(theta(t, cfg), eff, pa)[0]
    if np.any(np.isnan(x)):
        raise InfeasibleError("water-filling cannot meet the rate at the selected duration")
    return make_solution(t, pa.to_power(x), circuit, pa, cfg, scheme=SchemeId.WATER_FILLING.value,
                         n_active=M, mode=eff.mode)


SCHEMES = {
    SchemeId.PROPOSED: solve,
    SchemeId.FIXED: fixed_scheme,
    SchemeId.UNIFORM_DURATION: uniform_optimized_duration,
    SchemeId.WATER_FILLING: water_filling_scheme,
}


def run_scheme(
    scheme, eff: EffectiveChannel, pa: PaModel, circuit: CircuitModel, cfg: SystemConfig
) -> AllocationSolution:
    return SCHEMES[SchemeId(scheme)](eff, pa, circuit, cfg)
