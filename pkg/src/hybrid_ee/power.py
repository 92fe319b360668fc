"""Most energy-efficient transmit powers for a fixed transmit duration.

Given ``t``, the rate target fixes a required received power ``theta(t)``.
Subarrays are switched on in descending order of effective gain; all but the
last active one radiate at full drive and the last one carries whatever is
left. Everything here is expressed in the auxiliary variable
``x = p * p_max / eta_max**2`` (so the amplifier draws ``sqrt(x)``), and
converted back to watts at the end.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import (
    BeamformingMode,
    EffectiveChannel,
    InfeasibleError,
    PaModel,
    SystemConfig,
    theta as theta_of,
)

X_FLOOR = 1e-18
PREFIX_RTOL = 1e-12


@dataclass(frozen=True)
class PowerAllocation:
    """Active count plus per-subarray ``x`` (W^2) and radiated power ``p`` (W),
    both indexed by original subarray number."""

    m_star: int
    x: np.ndarray
    p: np.ndarray


def _prefix(eff: EffectiveChannel, pa: PaModel) -> np.ndarray:
    """Cumulative full-drive contribution of the best ``m`` subarrays, on the
    scale the rate constraint is compared in (``theta`` for non-coherent,
    ``sqrt(theta)`` for coherent)."""
    ks = eff.sorted_kappa
    if eff.mode is BeamformingMode.COHERENT:
        return np.cumsum(pa.p_max * ks)
    return np.cumsum(pa.p_max**2 * ks**2)


def _demand(theta, mode: BeamformingMode):
    return np.sqrt(theta) if mode is BeamformingMode.COHERENT else theta


def count_for_theta(theta: float, eff: EffectiveChannel, pa: PaModel) -> int:
    """Smallest ``m`` whose best-``m`` full-drive contribution covers ``theta``."""
    prefix = _prefix(eff, pa)
    demand = _demand(theta, eff.mode)
    m = int(np.searchsorted(prefix, demand, side="left")) + 1
    if m > len(prefix) and demand <= prefix[-1] * (1 + PREFIX_RTOL):
        # rounding at t = t_min^M: every subarray at full drive
        m = len(prefix)
    if m > len(prefix):
        raise InfeasibleError(
            f"even all {len(prefix)} subarrays at full drive cannot meet the rate"
        )
    return m


def active_count(t: float, eff: EffectiveChannel, pa: PaModel, cfg: SystemConfig) -> int:
    """Number of subarrays switched on at duration ``t``.

    A demand sitting exactly on a prefix boundary takes the smaller count.
    """
    return count_for_theta(theta_of(t, cfg), eff, pa)


def sorted_x_for_count(theta, m: int, eff: EffectiveChannel, pa: PaModel) -> np.ndarray:
    """Sorted-order ``x`` vectors with the best ``m - 1`` subarrays saturated and
    subarray ``m`` (1-based, in sorted order) carrying the residual.

    ``theta`` may be an array; the result then has shape ``theta.shape + (M,)``.
    The residual is clipped to ``[0, p_max^2]``.
    """
    theta = np.asarray(theta, dtype=float)
    ks = eff.sorted_kappa
    M = len(ks)
    xmax = pa.x_max
    x = np.zeros(theta.shape + (M,))
    x[..., : m - 1] = xmax
    k_m = ks[m - 1]
    if eff.mode is BeamformingMode.COHERENT:
        head = pa.p_max * float(np.sum(ks[: m - 1]))
        resid = ((np.sqrt(theta) - head) / k_m) ** 2
        resid = np.where(np.sqrt(theta) > head, resid, 0.0)
    else:
        head = xmax * float(np.sum(ks[: m - 1] ** 2))
        resid = (theta - head) / k_m**2
    x[..., m - 1] = np.clip(resid, 0.0, xmax)
    return x


def sorted_x(theta, eff: EffectiveChannel, pa: PaModel) -> np.ndarray:
    """Vectorized optimal structure for an array of required powers.

    Entries whose demand exceeds every subarray at full drive come back as NaN.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    prefix = _prefix(eff, pa)
    demand = _demand(theta, eff.mode)
    idx = np.searchsorted(prefix, demand, side="left")
    M = len(prefix)
    out = np.full(theta.shape + (M,), np.nan)
    for m in np.unique(idx):
        if m >= M:
            continue
        sel = idx == m
        out[sel] = sorted_x_for_count(theta[sel], int(m) + 1, eff, pa)
    return out


def unsort(x_sorted, eff: EffectiveChannel) -> np.ndarray:
    x = np.empty_like(np.asarray(x_sorted, dtype=float))
    x[..., eff.order] = x_sorted
    return x


def allocation_for_count(
    t: float, m: int, eff: EffectiveChannel, pa: PaModel, cfg: SystemConfig
) -> PowerAllocation:
    """Optimal structure at ``t`` with the active count forced to ``m``."""
    xs = sorted_x_for_count(theta_of(t, cfg), m, eff, pa)
    x = unsort(xs, eff)
    return PowerAllocation(m_star=int(np.count_nonzero(x > 0)), x=x, p=pa.to_power(x))


def optimal_powers(
    t: float, eff: EffectiveChannel, pa: PaModel, cfg: SystemConfig
) -> PowerAllocation:
    """Energy-minimizing powers at duration ``t``.

    Raises :class:`InfeasibleError` when the rate cannot be met at ``t``.
    """
    th = theta_of(t, cfg)
    m = count_for_theta(th, eff, pa)
    xs = sorted_x_for_count(th, m, eff, pa)
    if m > 1 and xs[m - 1] <= X_FLOOR * pa.x_max:
        # rounding left a vanishing residual: m - 1 saturated subarrays suffice
        m -= 1
        xs[m:] = 0.0
    x = unsort(xs, eff)
    return PowerAllocation(m_star=m, x=x, p=pa.to_power(x))


def rate_lhs(x, eff: EffectiveChannel) -> float:
    """Received power delivered by ``x`` (comparable with ``theta``)."""
    x = np.asarray(x, dtype=float)
    if eff.mode is BeamformingMode.COHERENT:
        return float(np.sum(np.sqrt(x) * eff.kappa)) ** 2
    return float(np.sum(x * eff.kappa**2))


def swap_improves(x, eff: EffectiveChannel) -> np.ndarray:
    """Reorder a rate-feasible ``x`` into the descending-gain structure.

    Two moves are applied until none is possible, each preserving the
    delivered power while never increasing ``sum(sqrt(x))``:

    * a better subarray that is off takes over from the worst active one at
      the rate-equivalent level;
    * when a better subarray carries less than a worse one, the two values
      are exchanged and the better one is trimmed back to the original rate.

    Returns the new ``x`` in original indexing. Not used on the solve path;
    it backs the dominance tests.
    """
    coherent = eff.mode is BeamformingMode.COHERENT
    order = eff.order
    k = eff.kappa[order]
    # coherent moves act linearly on sqrt(x); non-coherent on x
    v = np.sqrt(np.asarray(x, dtype=float)[order]) if coherent else np.asarray(x, dtype=float)[order].copy()
    w = k if coherent else k**2
    M = len(v)
    moves = 0
    changed = True
    while changed:
        changed = False
        active = np.flatnonzero(v > 0)
        if active.size == 0:
            break
        last = active[-1]
        gaps = np.flatnonzero(v[:last] == 0)
        if gaps.size:
            i = gaps[0]
            v[i] = v[last] * w[last] / w[i]
            v[last] = 0.0
            changed = True
            moves += 1
            continue
        for i in range(M):
            for j in range(i + 1, M):
                if v[j] > v[i]:
                    vi, vj = v[i], v[j]
                    v[i] = vi + (vj - vi) * w[j] / w[i]
                    v[j] = vi
                    changed = True
                    moves += 1
    if not moves:
        return np.asarray(x, dtype=float).copy()
    out = np.empty(M)
    out[order] = v**2 if coherent else v
    return out


def pump_up(x, eff: EffectiveChannel, gain_rank: int, donor_rank: int, alpha: float) -> np.ndarray:
    """Raise the ``gain_rank``-th best subarray by ``alpha`` (in ``x``) and lower
    the ``donor_rank``-th best one by the amount that keeps the delivered power
    unchanged. Ranks are 0-based positions in descending-gain order and the
    donor must rank below the gainer.
    """
    if donor_rank <= gain_rank:
        raise ValueError("donor must have a lower effective gain than the gainer")
    x = np.asarray(x, dtype=float).copy()
    i, j = eff.order[gain_rank], eff.order[donor_rank]
    ki, kj = eff.kappa[i], eff.kappa[j]
    if eff.mode is BeamformingMode.COHERENT:
        gamma = np.sqrt(x[i]) * ki + np.sqrt(x[j]) * kj
        new_i = x[i] + alpha
        sj = (gamma - np.sqrt(new_i) * ki) / kj
        if sj < 0:
            raise ValueError("alpha too large for the donor to compensate")
        x[i], x[j] = new_i, sj**2
    else:
        beta = alpha * ki**2 / kj**2
        if beta > x[j]:
            raise ValueError("alpha too large for the donor to compensate")
        x[i], x[j] = x[i] + alpha, x[j] - beta
    return x
