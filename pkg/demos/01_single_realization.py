"""Walk through one channel realization: effective gains, the segment
partition of the duration axis, per-segment curvature and the optimum,
then compare the four schemes on the same channel.

Run with ``python3 demos/01_single_realization.py``.
"""

# %% setup: the packaged default experiment (16 x 16 array, 60 Mbit/s)
import numpy as np

from hybrid_ee import SchemeId, effective_gains, run_scheme
from hybrid_ee.duration import SegmentObjective, build_segments, classify_curvature, solve
from hybrid_ee.model import BeamformingMode
from hybrid_ee.sim import load_config
from hybrid_ee.sim.sweep import realization_for

exp = load_config()
real = realization_for(exp, seed=7, trial=0)
pa, circuit = exp.pa(), exp.circuit()

# %% effective gains: coherent combining never does worse than non-coherent
for mode in (BeamformingMode.COHERENT, BeamformingMode.NONCOHERENT):
    eff = effective_gains(real, mode, pa)
    print(f"{mode.value:<12} strongest kappa: {np.array2string(eff.sorted_kappa[:4], precision=3)}")

# %% the duration axis splits into segments with a fixed active count
mode = BeamformingMode.NONCOHERENT
cfg = exp.system(mode)
eff = effective_gains(real, mode, pa)
for seg in build_segments(eff, pa, cfg):
    obj = SegmentObjective(seg.m, eff, pa, circuit, cfg)
    seg = classify_curvature(seg, obj, circuit, cfg)
    print(f"m={seg.m:2d}  t in [{seg.lo * 1e3:.4f}, {seg.hi * 1e3:.4f}] ms  {seg.curvature.value}")

# %% the optimum over all segments
sol = solve(eff, pa, circuit, cfg)
print(f"t* = {sol.t_star * 1e3:.4f} ms, m* = {sol.m_star}, EE = {sol.ee:.4e} bit/J")
print("breakdown (J):", {k: f"{v:.3e}" for k, v in vars(sol.energy).items()})

# %% the same channel under every scheme and both modes
for mode in (BeamformingMode.COHERENT, BeamformingMode.NONCOHERENT):
    cfg = exp.system(mode)
    eff = effective_gains(real, mode, pa)
    for scheme in SchemeId:
        s = run_scheme(scheme, eff, pa, circuit, cfg)
        print(f"{mode.value:<12} {scheme.value:<17} t*={s.t_star * 1e3:8.4f} ms  EE={s.ee:.4e} bit/J")
