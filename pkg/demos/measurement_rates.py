"""Decoherence rates of the charge-sensor (QPC) measurement model.

Prints the coherence decay rate between two rail sites as a function of
their separation, in the exact and weak-sensor forms, together with the
large-separation plateau and the fully local limit.  Then evaluates the
first-order transport loss for a 3-dot and an 11-dot chain at a few
sensor distances.  Run: python3 demos/measurement_rates.py
"""

import numpy as np

from ctap_sim import (
    PulseSchedule,
    RailGeometry,
    decoherence_rate_exact,
    decoherence_rate_weak,
    local_limit_rate,
    saturation_rate,
    transfer_loss_firstorder,
)

n = 61
g = RailGeometry(
    n_sites=n, spacing=1.0, offset=1.0, sensitivity=0.04, total_rate=float(n), section=(20, 40)
)

print("separation   exact        weak         (plateau %.3e, local %.3e)" % (
    saturation_rate(g), local_limit_rate(g.total_rate, g.n_sites, g.sensitivity)))
for sep in (1, 2, 5, 10, 20):
    e = decoherence_rate_exact(20, 20 + sep, g)
    w = decoherence_rate_weak(20, 20 + sep, g)
    print(f"{sep:>10d}   {e:.6e} {w:.6e}")

print()
print("first-order transport loss, sensitivity = 0.04 a, one sensor per dot")
for dots, T in ((3, 150.0), (11, 249.0)):
    margin = 10
    sched = PulseSchedule(section=(margin, margin + dots - 1), T=T)
    grid = np.linspace(*sched.window, 600)
    row = []
    for aod in (0.05, 0.5, 5.0):
        geo = RailGeometry(
            n_sites=dots + 2 * margin,
            spacing=1.0,
            offset=aod,
            sensitivity=0.04 * aod,
            total_rate=float(dots + 2 * margin),
            section=sched.section,
        )
        row.append(f"a/d={aod:<4}: {transfer_loss_firstorder(sched, geo, grid):.3e}")
    print(f"{dots:>2d} dots   " + "   ".join(row))
