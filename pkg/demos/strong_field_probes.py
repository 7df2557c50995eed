"""Finite-amplitude look at the strong-field limit on a 1D soft-core atom.

Prints ionization versus amplitude for a CaseII sine pulse, whose net
displacement drives ionization towards 1, and a CaseIII cosine pulse, which
levels off at the free-evolution value ``p(tau)``.  Takes about half a minute.

    python3 demos/strong_field_probes.py
"""
import math

from ionlimit.pulse import PulseShape
from ionlimit.qdyn import Grid1D, PotentialGrid, bound_states, free_propagate, sweep_amplitude

grid = Grid1D(600.0, 16384)
V = PotentialGrid.soft_core(grid, cutoff=60.0)
P = bound_states(V, 16)
chi = P.state(0)
dt = grid.dx ** 2 / math.pi
print(f"ground-state energy {P.energies[0]:.6f}, {len(P)} bound states on the grid")

for name, pulse in [("sin, 1 cycle", PulseShape.sin_cycles(1, 2.0)),
                    ("cos, 3 cycles", PulseShape.cos_cycles(3, 2.0))]:
    p_tau = 1 - P.populations(free_propagate(chi, pulse.tau)).sum()
    res = sweep_amplitude(chi, V, pulse, [1.0, 3.0, 10.0, 30.0, 100.0], dt, bound_set=P, deviation=True)
    print(f"\n{name}: free-evolution ionization p(tau) = {p_tau:.4f}")
    for row in res.rows:
        print(f"  E0={row.E0:6.1f}  P_ion={row.P_ion:.4f}  ||U' - U0|| = {row.deviation:.4f}")
