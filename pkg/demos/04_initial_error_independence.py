"""Why the ramped transform decouples the envelope from the initial error.

The altitude envelope starts at 40.6 ft.  A plain log-barrier controller
(ramp switched off) must start inside it and behaves badly even close to
the boundary; the ramped design multiplies the error by a small start value
so the transformed error begins deep inside the envelope regardless of the
raw offset, then releases the ramp over the first seconds.

This script runs a 40 ft initial offset through both variants and overlays
the trajectories against the envelope.

Run from the repository root:  python3 demos/04_initial_error_independence.py
"""

from dataclasses import replace
from pathlib import Path

from fahvsim import PerformanceFunction, ScenarioConfig, run_scenario
from fahvsim.svgplot import Panel, write_svg

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

cfg = ScenarioConfig(duration=31.0,
                     perf_v=PerformanceFunction(6.0, 0.2, 10.0),
                     perf_h=PerformanceFunction(40.6, 0.6, 30.0))

runs = {}
for variant in ("proposed", "baseline"):
    log, metrics = run_scenario(replace(cfg, variant=variant))
    runs[variant] = (log, metrics)
    x = metrics.exact
    print(f"{variant:>8s}: envelope violations={x.viol_count_h:6d}  "
          f"max |xi_h|={x.max_xi_h:.3f}  |e_h| at t=30: "
          f"{metrics.altitude.settle_at_ts:.3f} ft")

log_p = runs["proposed"][0]
p1 = Panel("altitude error vs shrinking envelope (40 ft initial offset)",
           "t [s]", "e_h [ft]")
for name, (log, _) in runs.items():
    p1.line(name, log.t, log.column("e_h"))
p1.line("+envelope", log_p.t, log_p.column("rho_h"), color="#444444",
        dash="5,4")
p1.line("-envelope", log_p.t, -log_p.column("rho_h"), color="#444444",
        dash="5,4")

p2 = Panel("ramped error phi*e_h of the proposed variant", "t [s]", "ft")
p2.line("phi*e_h", log_p.t, log_p.column("phi_h") * log_p.column("e_h"))
p2.line("+envelope", log_p.t, log_p.column("rho_h"), color="#444444",
        dash="5,4")
p2.line("-envelope", log_p.t, -log_p.column("rho_h"), color="#444444",
        dash="5,4")

write_svg(OUT / "initial_error_independence.svg", [p1, p2])
print(f"wrote {OUT / 'initial_error_independence.svg'}")
