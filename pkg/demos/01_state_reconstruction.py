"""Reconstructing the flight path angle from altitude measurements.

The altitude rate is not measured directly; a second-order tracker with
bounded sigmoid corrections follows the measured altitude and its slope,
and gamma comes from arcsin(rate / V).  This script drives the tracker with
a synthetic climb-and-wiggle profile and plots how the estimates settle.

Run from the repository root:  python3 demos/01_state_reconstruction.py
"""

import math
from pathlib import Path

import numpy as np

from fahvsim import SigTrackerState, reconstruct_angles, rk4_step, sig_tracker_rhs
from fahvsim.svgplot import Panel, write_svg

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

V = 7846.4
H0 = 85000.0


def h_true(t):
    return H0 + 12.0 * t + 40.0 * math.sin(0.2 * t)


def hdot_true(t):
    return 12.0 + 8.0 * math.cos(0.2 * t)


tracker = SigTrackerState(z1=H0, z2=0.0, d=20.0)
dt, t_end = 1e-3, 40.0
n = int(t_end / dt)
ts = np.empty(n)
h_hat = np.empty(n)
rate_hat = np.empty(n)
gamma_hat = np.empty(n)

state = np.array([tracker.z1, tracker.z2])
for i in range(n):
    t = i * dt

    def rhs(tt, y):
        tracker.z1, tracker.z2 = y
        return np.array(sig_tracker_rhs(tracker, h_true(tt)))

    state = rk4_step(state, rhs, t, dt)
    ts[i] = t + dt
    h_hat[i], rate_hat[i] = state
    gamma_hat[i], _ = reconstruct_angles(state[1], V, 0.0)

h_ref = np.array([h_true(t) for t in ts])
rate_ref = np.array([hdot_true(t) for t in ts])
gamma_ref = np.arcsin(rate_ref / V)

print("after a 5 s transient:")
w = ts >= 5.0
print(f"  max altitude tracking error : {np.abs(h_hat - h_ref)[w].max():.3f} ft")
print(f"  max rate tracking error     : {np.abs(rate_hat - rate_ref)[w].max():.3f} ft/s")
print(f"  max gamma reconstruction err: {np.abs(gamma_hat - gamma_ref)[w].max():.2e} rad")

panels = [
    Panel("altitude tracking", "t [s]", "h - 85000 [ft]")
    .line("measured", ts, h_ref - H0)
    .line("tracker", ts, h_hat - H0, dash="5,4"),
    Panel("altitude-rate estimate", "t [s]", "ft/s")
    .line("true rate", ts, rate_ref)
    .line("estimate", ts, rate_hat, dash="5,4"),
    Panel("flight path angle", "t [s]", "rad")
    .line("true", ts, gamma_ref)
    .line("reconstructed", ts, gamma_hat, dash="5,4"),
]
write_svg(OUT / "state_reconstruction.svg", panels)
print(f"wrote {OUT / 'state_reconstruction.svg'}")
