"""
Buying insurance: a kink, then curvature
========================================

Below a threshold belief the agent stays uninsured and the value function
is flat, so small news is worthless.  At the threshold VoI is linear in
the news, and above it quadratic.
"""

import numpy as np

from voinfo import insurance as ins

P = ins.DEMO
p_star = ins.threshold(P)
print(f"threshold belief p* = {p_star:.6f}")

eps = np.logspace(-2, -5, 7)
for label, p in (("below", p_star - 0.05), ("at", p_star), ("above", p_star + 0.1)):
    v = np.array([ins.voi_epsilon(P, p, e) for e in eps])
    if np.all(v == 0):
        print(f"{label:>5} p*: VoI is exactly zero")
        continue
    slope = np.polyfit(np.log(eps), np.log(v), 1)[0]
    print(f"{label:>5} p*: log-log slope {slope:.3f}")

# with the realistic headline parameters the threshold sits near log-odds -9891,
# which is below the smallest positive double
t = ins.threshold_logit(ins.FIG2)
print(f"headline parameters: threshold log-odds {t:.1f}, p* = {ins.threshold(ins.FIG2)}")
