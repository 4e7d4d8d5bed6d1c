"""
Where information is worth nothing
==================================

Four decisions, two states.  We find the belief intervals where each
decision is best, then show that news which keeps the posterior inside
the prior's confidence set has zero value.
"""

import numpy as np

from voinfo import InformationStructure, confidence_set, hull_reduce, revealed_beliefs, voi
from voinfo.geometry import belief2

# payoffs of each decision in (state 1, state 2)
A = hull_reduce([[3, 0], [2, 2], [0, 2.5], [0, 0]])
print("hull vertices:", A.vertices.tolist())

# each action is optimal on an interval of the state-2 probability;
# (0, 0) is a corner of the hull but is never a best reply
for a in A.vertices:
    interval = revealed_beliefs(A, a).interval()
    if interval is None:
        print(f"  {a} never optimal")
    else:
        print(f"  {a} optimal for p2 in [{interval[0]:.4f}, {interval[1]:.4f}]")

prior = belief2(0.5)
lo, hi = confidence_set(A, prior).interval()
print(f"confidence set at p2 = 1/2: [{lo:.4f}, {hi:.4f}]")

# a weak signal: posteriors 0.4 and 0.6 never change the decision
weak = InformationStructure([[0.6, 0.4], [0.4, 0.6]], [0.5, 0.5])
print("VoI of a weak signal:", voi(A, prior, weak))

# full revelation leaves the confidence set and pays 0.75
full = InformationStructure(np.eye(2), [0.5, 0.5])
print("VoI of full revelation:", voi(A, prior, full))
