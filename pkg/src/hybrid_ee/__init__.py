"""Energy-efficient bursty transmission for hybrid antenna arrays driven by
non-ideal (square-root law) power amplifiers.

The core entry point is :func:`solve`, which picks the transmit duration,
the number of active subarrays and their powers that maximize bits per joule
for one channel realization. Benchmark schemes live in
:mod:`hybrid_ee.baselines`, a brute-force reference in :mod:`hybrid_ee.oracle`
and the Monte Carlo harness in :mod:`hybrid_ee.sim`.
"""

from .baselines import (
    SchemeId,
    fixed_scheme,
    run_scheme,
    uniform_optimized_duration,
    water_filling_scheme,
)
from .channel import PathLossModel, effective_gains, sample_channels
from .duration import build_segments, solve, solve_coherent, solve_noncoherent
from .model import (
    AllocationSolution,
    BeamformingMode,
    ChannelRealization,
    CircuitModel,
    EffectiveChannel,
    EnergyBreakdown,
    InfeasibleError,
    PaModel,
    SystemConfig,
    ThetaOverflowError,
    pa_power,
    theta,
    total_energy,
)
from .power import optimal_powers

__version__ = "0.1.0"

__all__ = [
    "AllocationSolution",
    "BeamformingMode",
    "ChannelRealization",
    "CircuitModel",
    "EffectiveChannel",
    "EnergyBreakdown",
    "InfeasibleError",
    "PaModel",
    "PathLossModel",
    "SchemeId",
    "SystemConfig",
    "ThetaOverflowError",
    "build_segments",
    "effective_gains",
    "fixed_scheme",
    "optimal_powers",
    "pa_power",
    "run_scheme",
    "sample_channels",
    "solve",
    "solve_coherent",
    "solve_noncoherent",
    "theta",
    "total_energy",
    "uniform_optimized_duration",
    "water_filling_scheme",
]
