"""
Bounds in the three regimes
===========================

The size of a small piece of news is measured by how far it moves the
belief.  Whether VoI scales with zero, one or two powers of that distance
depends on the regime of the agent at the prior.
"""

from voinfo import classify_prior, hull_reduce, quadratic_scoring_body
from voinfo import theorem1_bounds, theorem2_bounds, theorem3_bounds
from voinfo.analysis import two_atom_split
from voinfo.geometry import belief2

A = hull_reduce([[3, 0], [2, 2], [0, 2.5], [0, 0]])

# Confident at 1/2: small news is worthless, large news pays at least c
prior = belief2(0.5)
print("regime at 1/2:", classify_prior(A, prior).regime)
for d in (0.1, 0.2, 0.4):
    cert = theorem1_bounds(A, prior, two_atom_split(prior, d), epsilon=0.05)
    print(f"  split +-{d}: {cert.lower:.4f} <= {cert.voi:.4f} <= {cert.upper:.4f}")

# Undecided at the kink 1/3: VoI is linear in the step
kink = belief2(1 / 3)
print("regime at 1/3:", classify_prior(A, kink).regime)
for d in (0.1, 0.01, 0.001):
    cert = theorem2_bounds(A, kink, two_atom_split(kink, d))
    print(f"  split +-{d}: {cert.lower:.2e} <= {cert.voi:.2e} <= {cert.upper:.2e}")

# Flexible under the quadratic scoring rule: VoI is quadratic in the step
body = quadratic_scoring_body()
print("regime for the scoring rule:", classify_prior(body, prior).regime)
for d in (0.1, 0.01, 0.001):
    cert = theorem3_bounds(body, prior, two_atom_split(prior, d))
    print(f"  split +-{d}: {cert.lower:.2e} <= {cert.voi:.2e} <= {cert.upper:.2e}")
