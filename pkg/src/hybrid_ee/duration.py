"""Transmit-duration optimization over segments of fixed active count.

The feasible durations ``[t_min^M, T]`` split into segments on which the
number of active subarrays is constant. On each segment the slot energy is a
smooth function of ``t`` whose curvature is known in closed form when the
spectral efficiency target ``r/W`` is at least one and the rate-dependent
circuit power is linear:

* non-coherent, ``m >= 2``: concave, so the minimum sits on an endpoint;
* non-coherent, ``m = 1`` and every coherent segment: convex, so a
  golden-section search finds the minimum.

Otherwise the sign of the second derivative is scanned numerically and the
segment is cut at its sign changes into pieces of uniform curvature.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

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
    make_solution,
    noise_power,
    theta,
)
from .power import _prefix, active_count, allocation_for_count, sorted_x_for_count

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
DEFAULT_TOL = 1e-10  # relative to the slot duration


class Curvature(str, enum.Enum):
    CONVEX = "convex"
    CONCAVE = "concave"
    MIXED = "mixed"


@dataclass(frozen=True)
class Segment:
    """Durations ``[lo, hi)`` (``[lo, hi]`` when ``closed``) with ``m`` active
    subarrays. ``pieces`` lists ``(lo, hi, curvature)`` sub-intervals of
    uniform curvature once the segment has been classified."""

    m: int
    lo: float
    hi: float
    closed: bool = False
    curvature: Optional[Curvature] = None
    roots: Tuple[float, ...] = ()
    pieces: Tuple[Tuple[float, float, Curvature], ...] = ()


class SegmentObjective:
    """Slot energy ``E^m(t)`` with ``m`` subarrays active, including every
    constant (rate-dependent circuit energy and idle baseline) so values are
    comparable across segments and schemes."""

    def __init__(
        self,
        m: int,
        eff: EffectiveChannel,
        pa: PaModel,
        circuit: CircuitModel,
        cfg: SystemConfig,
    ):
        self.m = m
        self.eff = eff
        self.pa = pa
        self.circuit = circuit
        self.cfg = cfg
        self.baseline = cfg.num_subarrays * circuit.p_idle * cfg.slot

    def variable(self, t):
        """Energy minus the ``t``-independent all-idle baseline ``M P_idle T``."""
        t = np.asarray(t, dtype=float)
        xs = sorted_x_for_count(theta(t, self.cfg), self.m, self.eff, self.pa)
        pa_power = np.sum(np.sqrt(xs), axis=-1)
        c = self.circuit
        per_chain = c.p_base - c.p_idle + np.asarray(c.dynamic_power(self.cfg.bits_per_slot / t))
        return (pa_power + self.m * per_chain) * t

    def __call__(self, t):
        out = self.variable(t) + self.baseline
        return float(out) if np.ndim(out) == 0 else out


def t_min(m: int, eff: EffectiveChannel, pa: PaModel, cfg: SystemConfig) -> float:
    """Shortest duration meeting the rate with the best ``m`` subarrays at full drive."""
    if not 1 <= m <= eff.num_subarrays:
        raise ValueError(f"m must lie in [1, {eff.num_subarrays}], got {m}")
    prefix = _prefix(eff, pa)[m - 1]
    s_max = prefix**2 if eff.mode is BeamformingMode.COHERENT else prefix
    if s_max <= 0:
        return math.inf
    return cfg.bits_per_slot / (cfg.bandwidth * math.log1p(s_max / noise_power(cfg)) / LN2)


def t_min_all(eff: EffectiveChannel, pa: PaModel, cfg: SystemConfig) -> np.ndarray:
    """``[T, t_min^1, ..., t_min^M]`` (index 0 is the convention ``t_min^0 = T``)."""
    return np.array([cfg.slot] + [t_min(m, eff, pa, cfg) for m in range(1, eff.num_subarrays + 1)])


def build_segments(
    eff: EffectiveChannel, pa: PaModel, cfg: SystemConfig, check: bool = True
) -> List[Segment]:
    """Non-empty segments ordered by increasing duration.

    The last segment ends at ``T`` and belongs to the smallest feasible active
    count. Raises :class:`InfeasibleError` if ``t_min^M > T``.
    """
    T = cfg.slot
    tm = t_min_all(eff, pa, cfg)
    M = eff.num_subarrays
    if not tm[M] <= T:
        raise InfeasibleError(f"t_min^M = {tm[M]:.6g} s exceeds the slot T = {T:.6g} s")
    segments = []
    for m in range(M, 0, -1):
        lo = tm[m]
        closed = tm[m - 1] >= T
        hi = T if closed else tm[m - 1]
        if lo < hi:
            segments.append(Segment(m=m, lo=float(lo), hi=float(hi), closed=closed))
        if closed:
            break
    if not segments:
        # t_min^M == T: the only feasible duration is the full slot
        segments.append(Segment(m=M, lo=T, hi=T, closed=True))
    if check:
        for seg in segments:
            if seg.hi > seg.lo:
                mid = 0.5 * (seg.lo + seg.hi)
                got = active_count(mid, eff, pa, cfg)
                if got != seg.m:
                    raise AssertionError(
                        f"segment m={seg.m} [{seg.lo:.6g}, {seg.hi:.6g}) has active count {got} at midpoint"
                    )
    return segments


def _second_difference(obj: SegmentObjective, t: np.ndarray, h: float):
    f0 = obj.variable(t)
    fm = obj.variable(t - h)
    fp = obj.variable(t + h)
    d2 = (fp - 2.0 * f0 + fm) / h**2
    noise = 64.0 * np.finfo(float).eps * (np.abs(fp) + 2.0 * np.abs(f0) + np.abs(fm)) / h**2
    return d2, noise


def _sign(obj: SegmentObjective, t, h: float) -> np.ndarray:
    d2, noise = _second_difference(obj, np.atleast_1d(np.asarray(t, dtype=float)), h)
    return np.where(np.abs(d2) <= noise, 0, np.sign(d2)).astype(int)


def analytic_curvature(seg: Segment, eff: EffectiveChannel, circuit: CircuitModel, cfg: SystemConfig):
    """Closed-form curvature class, or ``None`` when it must be scanned."""
    if cfg.rate / cfg.bandwidth < 1.0:
        return None
    if eff.mode is BeamformingMode.COHERENT or seg.m == 1:
        # a convex rate-dependent term only adds positive curvature here
        return Curvature.CONVEX
    if circuit.is_linear:
        return Curvature.CONCAVE
    return None


def classify_curvature(
    seg: Segment,
    obj: SegmentObjective,
    circuit: CircuitModel,
    cfg: SystemConfig,
    n_scan: int = 256,
) -> Segment:
    """Attach a curvature class (and uniform-curvature pieces) to ``seg``."""
    known = analytic_curvature(seg, obj.eff, circuit, cfg)
    if known is not None or seg.hi <= seg.lo:
        curv = known or Curvature.CONVEX
        return replace(seg, curvature=curv, roots=(), pieces=((seg.lo, seg.hi, curv),))

    width = seg.hi - seg.lo
    ts = seg.lo + (np.arange(n_scan) + 0.5) / n_scan * width
    h = 0.25 * width / n_scan
    signs = _sign(obj, ts, h)

    roots = []
    last_i = None
    for i, s in enumerate(signs):
        if s == 0:
            continue
        if last_i is not None and s != signs[last_i]:
            roots.append(_bisect_root(obj, ts[last_i], ts[i], int(signs[last_i]), h, cfg.slot))
        last_i = i

    nonzero = signs[signs != 0]
    if not roots:
        curv = Curvature.CONCAVE if nonzero.size and nonzero[0] < 0 else Curvature.CONVEX
        return replace(seg, curvature=curv, roots=(), pieces=((seg.lo, seg.hi, curv),))

    edges = [seg.lo] + roots + [seg.hi]
    piece_signs = [int(s) for i, s in enumerate(nonzero) if i == 0 or s != nonzero[i - 1]]
    pieces = tuple(
        (edges[i], edges[i + 1], Curvature.CONVEX if piece_signs[i] > 0 else Curvature.CONCAVE)
        for i in range(len(edges) - 1)
    )
    return replace(seg, curvature=Curvature.MIXED, roots=tuple(roots), pieces=pieces)


def _bisect_root(obj, a, b, sign_a, h, T, max_iter=200):
    for _ in range(max_iter):
        if b - a <= 1e-13 * T:
            break
        mid = 0.5 * (a + b)
        s = int(_sign(obj, mid, h)[0])
        if s == sign_a:
            a = mid
        elif s == 0:
            return mid
        else:
            b = mid
    return 0.5 * (a + b)


def golden_section(f, a: float, b: float, tol: float, max_iter: int = 500) -> Tuple[float, float]:
    """Minimize a unimodal ``f`` on ``[a, b]`` to an interval of width ``tol``."""
    if b <= a:
        return a, f(a)
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    if fc <= fd:
        return c, fc
    return d, fd


def minimize_segment(seg: Segment, obj: SegmentObjective, tol: Optional[float] = None) -> Tuple[float, float]:
    """Best ``(t, E)`` on a classified segment.

    Concave pieces are settled by their endpoints, convex ones by golden
    section plus endpoints. A right-open segment is evaluated at ``hi - tol``;
    the neighbouring segment owns ``hi`` itself.
    """
    if seg.curvature is None:
        raise ValueError("segment must be classified before minimization")
    tol = DEFAULT_TOL * obj.cfg.slot if tol is None else tol
    candidates = []
    for lo, hi, curv in seg.pieces:
        if hi >= seg.hi and not seg.closed:
            hi = max(lo, seg.hi - tol)
        candidates.append(lo)
        if hi > lo:
            candidates.append(hi)
            if curv is Curvature.CONVEX:
                t_in, _ = golden_section(obj, lo, hi, tol)
                candidates.append(t_in)
    values = [obj(t) for t in candidates]
    best = int(np.argmin(values))
    return float(candidates[best]), float(values[best])


@dataclass(frozen=True)
class SegmentResult:
    segment: Segment
    t: float
    energy: float


def optimize_segments(
    eff: EffectiveChannel,
    pa: PaModel,
    circuit: CircuitModel,
    cfg: SystemConfig,
    n_scan: int = 256,
    tol: Optional[float] = None,
) -> List[SegmentResult]:
    results = []
    for seg in build_segments(eff, pa, cfg):
        obj = SegmentObjective(seg.m, eff, pa, circuit, cfg)
        seg = classify_curvature(seg, obj, circuit, cfg, n_scan=n_scan)
        t, e = minimize_segment(seg, obj, tol=tol)
        results.append(SegmentResult(seg, t, e))
    return results


def _solve(eff, pa, circuit, cfg, n_scan=256, tol=None) -> AllocationSolution:
    results = optimize_segments(eff, pa, circuit, cfg, n_scan=n_scan, tol=tol)
    # first minimum wins: ties resolve to the shorter duration
    best = min(range(len(results)), key=lambda i: (results[i].energy, i))
    res = results[best]
    alloc = allocation_for_count(res.t, res.segment.m, eff, pa, cfg)
    return make_solution(res.t, alloc.p, circuit, pa, cfg, scheme="proposed", mode=eff.mode)


def solve_noncoherent(
    eff: EffectiveChannel, pa: PaModel, circuit: CircuitModel, cfg: SystemConfig, **kw
) -> AllocationSolution:
    """Optimal duration, active set and powers under non-coherent beamforming."""
    if eff.mode is not BeamformingMode.NONCOHERENT:
        raise ValueError("effective channel was reduced for coherent beamforming")
    return _solve(eff, pa, circuit, cfg, **kw)


def solve_coherent(
    eff: EffectiveChannel, pa: PaModel, circuit: CircuitModel, cfg: SystemConfig, **kw
) -> AllocationSolution:
    """Optimal duration, active set and powers under coherent beamforming."""
    if eff.mode is not BeamformingMode.COHERENT:
        raise ValueError("effective channel was reduced for non-coherent beamforming")
    return _solve(eff, pa, circuit, cfg, **kw)


def solve(eff: EffectiveChannel, pa: PaModel, circuit: CircuitModel, cfg: SystemConfig, **kw) -> AllocationSolution:
    if eff.mode is BeamformingMode.COHERENT:
        return solve_coherent(eff, pa, circuit, cfg, **kw)
    return solve_noncoherent(eff, pa, circuit, cfg, **kw)
