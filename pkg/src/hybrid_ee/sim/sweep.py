"""Monte Carlo sweeps over one parameter with paired channel realizations.

The realization for trial ``i`` depends only on ``(seed, i)``: every mode,
scheme and swept value at that trial sees the same fading and shadowing
draws, so per-trial comparisons are paired.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ..baselines import SchemeId, run_scheme
from ..channel import effective_gains, sample_channels
from ..model import AllocationSolution, BeamformingMode, ChannelRealization, InfeasibleError, ThetaOverflowError
from .config import SWEEPABLE, ConfigError, ExperimentConfig

Z95 = 1.96


@dataclass(frozen=True)
class SweepSpec:
    swept_parameter: str
    values: Tuple[float, ...]
    trials: int
    seed: int
    schemes: Tuple[SchemeId, ...] = tuple(SchemeId)
    modes: Tuple[BeamformingMode, ...] = (BeamformingMode.COHERENT, BeamformingMode.NONCOHERENT)

    def __post_init__(self):
        if self.swept_parameter not in SWEEPABLE:
            raise ConfigError("sweep_parameter", f"expected one of {sorted(SWEEPABLE)}")
        values = tuple(self.values)
        if not values:
            raise ConfigError("sweep_values", "needs at least one value")
        steps = np.diff(values)
        if len(values) > 1 and not (np.all(steps > 0) or np.all(steps < 0)):
            raise ConfigError("sweep_values", "must be strictly monotone")
        if int(self.trials) != self.trials or self.trials < 1:
            raise ConfigError("trials", f"must be a positive integer, got {self.trials!r}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed", "must be an unsigned 64-bit integer")
        if not self.schemes:
            raise ConfigError("schemes", "no scheme selected")
        if not self.modes:
            raise ConfigError("mode", "no beamforming mode selected")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "schemes", tuple(SchemeId(s) for s in self.schemes))
        object.__setattr__(self, "modes", tuple(BeamformingMode(m) for m in self.modes))

    @classmethod
    def from_config(cls, exp: ExperimentConfig) -> "SweepSpec":
        return cls(
            swept_parameter=exp.sweep_parameter,
            values=exp.sweep_values,
            trials=exp.trials,
            seed=exp.seed,
            schemes=exp.schemes,
            modes=exp.modes,
        )


@dataclass(frozen=True)
class ResultRow:
    """One solved (mode, scheme, swept value, trial) cell. Infeasible cells
    keep ``None`` in the numeric fields."""

    mode: str
    scheme: str
    value: float
    trial: int
    t_star: Optional[float]
    m_star: Optional[int]
    e_total: Optional[float]
    ee: Optional[float]
    feasible: bool
    powers: Tuple[float, ...] = ()

    @classmethod
    def from_solution(cls, sol: AllocationSolution, mode, scheme, value, trial) -> "ResultRow":
        return cls(
            mode=BeamformingMode(mode).value,
            scheme=SchemeId(scheme).value,
            value=float(value),
            trial=int(trial),
            t_star=float(sol.t_star),
            m_star=int(sol.m_star),
            e_total=float(sol.e_total),
            ee=float(sol.ee),
            feasible=True,
            powers=tuple(float(p) for p in sol.powers),
        )

    @classmethod
    def infeasible(cls, mode, scheme, value, trial) -> "ResultRow":
        return cls(BeamformingMode(mode).value, SchemeId(scheme).value, float(value), int(trial),
                   None, None, None, None, False)


def solve_trial(
    exp: ExperimentConfig, realization: ChannelRealization, mode, scheme
) -> AllocationSolution:
    """Run ``scheme`` on one realization under the config's physical parameters."""
    cfg = exp.system(BeamformingMode(mode))
    pa = exp.pa()
    eff = effective_gains(realization, cfg.mode, pa)
    return run_scheme(scheme, eff, pa, exp.circuit(), cfg)


def _solve_cell(exp, real, mode, scheme, value, trial) -> ResultRow:
    try:
        sol = solve_trial(exp, real, mode, scheme)
    except (InfeasibleError, ThetaOverflowError):
        return ResultRow.infeasible(mode, scheme, value, trial)
    return ResultRow.from_solution(sol, mode, scheme, value, trial)


def realization_for(exp: ExperimentConfig, seed: int, trial: int) -> ChannelRealization:
    return sample_channels(exp.system(), exp.pathloss(), seed, trial)


def _run_unit(args) -> List[ResultRow]:
    base, spec, value, trial = args
    exp = base.with_value(spec.swept_parameter, value)
    real = realization_for(exp, spec.seed, trial)
    return [
        _solve_cell(exp, real, mode, scheme, value, trial)
        for mode, scheme in product(spec.modes, spec.schemes)
    ]


def run_sweep(spec: SweepSpec, base: ExperimentConfig, workers: int = 1) -> List[ResultRow]:
    """Solve every (mode, scheme) at every (value, trial).

    Rows come back ordered by mode, scheme, swept value and trial no matter
    how many worker processes run.
    """
    units = [(base, spec, v, i) for v in spec.values for i in range(spec.trials)]
    if workers > 1 and len(units) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_run_unit, units, chunksize=max(1, len(units) // (8 * workers))))
    else:
        chunks = [_run_unit(u) for u in units]
    rows = [row for chunk in chunks for row in chunk]
    mode_rank = {m.value: i for i, m in enumerate(spec.modes)}
    scheme_rank = {s.value: i for i, s in enumerate(spec.schemes)}
    value_rank = {float(v): i for i, v in enumerate(spec.values)}
    rows.sort(key=lambda r: (mode_rank[r.mode], scheme_rank[r.scheme], value_rank[r.value], r.trial))
    return rows


# -- summaries -------------------------------------------------------------------


@dataclass(frozen=True)
class Estimate:
    mean: float
    half_width: float


@dataclass(frozen=True)
class Summary:
    """Per (mode, scheme, value) means with normal-approximation 95% half-widths."""

    mode: str
    scheme: str
    value: float
    n: int
    excluded: int
    ee: Estimate
    t_star: Estimate
    m_star: Estimate
    single_trial: bool = False


def _estimate(values: Sequence[float]) -> Estimate:
    v = np.asarray(values, dtype=float)
    n = len(v)
    if n == 0:
        return Estimate(math.nan, math.nan)
    # shifting by the first sample keeps constant inputs exact
    d = v - v[0]
    mean = float(v[0] + math.fsum(d) / n)
    if n == 1:
        return Estimate(mean, 0.0)
    sd = float(np.std(d, ddof=1))
    return Estimate(mean, Z95 * sd / math.sqrt(n))


def summarize(rows: Iterable[ResultRow]) -> List[Summary]:
    """Group by (mode, scheme, value) in first-seen order. Infeasible rows are
    counted in ``excluded`` and left out of the statistics."""
    groups: Dict[tuple, List[ResultRow]] = {}
    for r in rows:
        groups.setdefault((r.mode, r.scheme, r.value), []).append(r)
    out = []
    for (mode, scheme, value), members in groups.items():
        ok = [r for r in members if r.feasible]
        out.append(
            Summary(
                mode=mode,
                scheme=scheme,
                value=value,
                n=len(ok),
                excluded=len(members) - len(ok),
                ee=_estimate([r.ee for r in ok]),
                t_star=_estimate([r.t_star for r in ok]),
                m_star=_estimate([r.m_star for r in ok]),
                single_trial=len(ok) == 1,
            )
        )
    return out
