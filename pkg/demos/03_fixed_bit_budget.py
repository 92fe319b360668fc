"""Fixed bit budget, varying slot length.

With 400 kbit to deliver per slot, a short slot forces a high rate and a
long slot pays idle power for longer. The proposed scheme's mean energy
efficiency rises and then falls as the slot grows, while the uniform
scheme only starts shortening its burst once the slot is long enough.
"""

# %% sweep the slot length with the rate derived from the bit budget
import numpy as np

from hybrid_ee import SchemeId
from hybrid_ee.model import BeamformingMode
from hybrid_ee.sim import SweepSpec, load_config, run_sweep, summarize

exp = load_config().replace(
    fixed_total_bits=4e5,
    sweep_parameter="T",
    sweep_values=(4.0, 6.0, 8.0, 10.0, 14.0, 20.0, 30.0),
    trials=30,
    modes=(BeamformingMode.NONCOHERENT,),
    schemes=(SchemeId.PROPOSED, SchemeId.UNIFORM_DURATION),
)
rows = run_sweep(SweepSpec.from_config(exp), exp)

# %% mean EE and duty cycle per slot length
for s in summarize(rows):
    duty = s.t_star.mean / (s.value * 1e-3)
    print(f"{s.scheme:<17} T={s.value:5.1f} ms  EE={s.ee.mean:.3e} bit/J  t*/T={duty:.3f}")

# %% where does the proposed scheme peak?
proposed = [s for s in summarize(rows) if s.scheme == "proposed"]
best = proposed[int(np.argmax([s.ee.mean for s in proposed]))]
print(f"peak mean EE at T = {best.value:g} ms")
