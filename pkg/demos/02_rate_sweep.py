"""A small Monte Carlo sweep over the target rate, written to CSV and SVG.

The same engine backs ``hybrid-ee sweep``; here it is driven from Python so
the summaries can be inspected directly. Output goes to ``demo_output/``.
"""

# %% configuration: fewer trials than the packaged default to keep it quick
from pathlib import Path

from hybrid_ee.sim import SweepSpec, emit_outputs, load_config, run_sweep, summarize
from hybrid_ee.sim.config import SWEEPABLE

exp = load_config().replace(trials=20, sweep_values=(10.0, 40.0, 70.0, 100.0, 130.0))
spec = SweepSpec.from_config(exp)

# %% run and summarize
rows = run_sweep(spec, exp)
summaries = summarize(rows)
for s in summaries:
    print(f"{s.mode:<12} {s.scheme:<17} r={s.value:5.0f}  EE={s.ee.mean:.3e} +/- {s.ee.half_width:.1e}  "
          f"t*={s.t_star.mean * 1e3:6.3f} ms  m*={s.m_star.mean:5.2f}")

# %% write results.csv, summary.csv and three charts
out = Path("demo_output")
for path in emit_outputs(rows, summaries, out, x_label=SWEEPABLE[spec.swept_parameter][1]):
    print("wrote", path)
