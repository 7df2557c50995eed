"""Momentum transfer, displacement and regime of the standard pulse families.

    python3 demos/pulse_regimes.py
"""
from ionlimit.pulse import PulseShape, c0_zero_structure, classify

pulses = {
    "rectangular tau=1": PulseShape("rectangular", 1.0),
    "sin, 1 cycle, w=2": PulseShape.sin_cycles(1, 2.0),
    "cos, 3 cycles, w=2": PulseShape.cos_cycles(3, 2.0),
    "cos cycles with gap 1.5": PulseShape.gap_cycles(1.5, 2.0),
    "sin2 envelope tau=10": PulseShape("sin2", 10.0),
}
for name, p in pulses.items():
    inv = classify(p)
    _, flats, part = c0_zero_structure(p)
    print(f"{name:26s} {inv.regime!s:8s} b0={inv.b0_tau:+.3e} c0={inv.c0_tau:+.3e}")
    if flats:
        print(" " * 27 + "flat c0 on " + ", ".join(f"[{a:.4f}, {b:.4f}]" for a, b in flats))
        print(" " * 27 + "partition " + ", ".join(f"{t:.4f}" for t in part))
