"""
How contact patterns map to relation strength
=============================================

Two people who meet often, for a long time and at regular intervals are
likely to know each other. The direct relation score folds those three
aspects into one number in [0, 1].
"""

import numpy as np

from sorec import srs
from sorec.relations import reference_metrics
from sorec.trace import ContactTimeline, ObservationWindow

T = 100
window = ObservationWindow(0, T)


def timeline(*intervals):
    return ContactTimeline((0, 1), intervals, window)


# Same number of encounters, longer total duration
short = timeline((10, 15), (60, 65))
long = timeline((10, 26), (60, 76))
# Same total duration, split into more encounters
frequent = timeline((5, 13), (30, 38), (55, 63), (80, 88))
# Same count and total as `frequent`, but uneven lengths
uneven = timeline((5, 7), (30, 44), (55, 63), (80, 88))

for name, tl in [("short", short), ("long", long), ("frequent", frequent), ("uneven", uneven)]:
    m = reference_metrics(tl)
    print(f"{name:9s} EF={m.ef}  TCD={m.tcd:3d}  ASP={m.asp:6.2f}  SRS={srs(tl, T):.4f}")

# Frequency: the same meeting time cut into more pieces scores higher,
# approaching 2 * T_meet / (pi * T) * (pi / 2) = T_meet / T from below
t_meet = T / 2
ks = np.array([1, 2, 5, 10, 100, 1000])
print("\nK      SRS(K pieces of T/2)")
for k in ks:
    print(f"{k:<6d} {srs([t_meet / k] * k, T):.9f}")
