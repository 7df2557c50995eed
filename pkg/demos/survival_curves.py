"""Survival probability curves for the hydrogen ground state and the point interaction.

Writes ``survival_hydrogen.csv`` (q versus tau) and ``survival_delta.csv``
(q versus alpha at three pulse lengths) into the current directory.

    python3 demos/survival_curves.py
"""
import numpy as np

from ionlimit.io import write_csv
from ionlimit.spectral import q_delta, q_hydrogen

taus = np.geomspace(0.1, 2000.0, 50)
write_csv("survival_hydrogen.csv", ["tau", "q"], [(t, q_hydrogen(t)) for t in taus])

alphas = np.linspace(0.1, 10.0, 41)
rows = [(a, t, q_delta(a, t)) for t in (200.0, 400.0, 1000.0) for a in alphas]
write_csv("survival_delta.csv", ["alpha", "tau", "q"], rows)

for t in (1.0, 10.0, 100.0, 400.0, 1000.0):
    print(f"tau={t:7.1f}  q_H={q_hydrogen(t):.6e}  q_delta(alpha=1)={q_delta(1.0, t):.6e}")
