# %% [markdown]
# # How many surface elements does each scheme need?
#
# At 50 dB transmit SNR we sweep the number of elements per surface and read
# off where each mean-rate curve first crosses 3 bps/Hz.  The trial count is
# kept small so the script stays quick; expect a few percent of jitter in the
# crossings.

# %%
from dataclasses import replace

from doubleris.config import parse_config
from doubleris.schemes import Scheme
from doubleris.simulate import run_sweep, threshold_crossing

base = replace(parse_config(preset="fig3"), trials=20)
print("axis values:", base.axis_values)

# %%
report = run_sweep(base)
for label, pts in report.curves().items():
    rates = " ".join(f"{p.mean_rate:5.2f}" for p in pts)
    print(f"{label:>18s}: {rates}")

# %% [markdown]
# The crossing is linearly interpolated between the two bracketing grid
# points.  The concurrent two-relay scheme needs the fewest elements, the
# surface-only link the most.

# %%
for scheme in (Scheme.ENHANCED, Scheme.TWO_RELAY, Scheme.SINGLE_RELAY, Scheme.RIS_ONLY):
    m = threshold_crossing(report, scheme.value, 3.0)
    print(f"{scheme.value:>13s}: " + ("not reached" if m is None else f"M = {m:.0f}"))
