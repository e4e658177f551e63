"""The full cruise/climb mission: accelerate from 7846.4 ft/s while climbing
from 85,000 ft, with 30% plant/model coefficient mismatch, bounded external
disturbances, and a partial actuator failure (20% effectiveness loss plus
bias on both inputs) at t = 50 s.

The tracking errors must stay inside the shrinking envelopes at all times,
reach the final accuracy bounds by their appointed times (10 s / 30 s), and
hold them through the fault.

Run from the repository root:  python3 demos/03_nominal_mission.py
"""

from pathlib import Path

from fahvsim import ScenarioConfig, run_scenario
from fahvsim.cli import write_plots

OUT = Path(__file__).parent / "out" / "nominal"
OUT.mkdir(parents=True, exist_ok=True)

cfg = ScenarioConfig()
log, metrics = run_scenario(cfg)

print(metrics.summary())
x = metrics.exact
print("headline checks:")
print(f"  envelope violations (any step)     : {x.viol_count_v + x.viol_count_h}")
print(f"  max |e_V| after t=10 s             : {x.max_ev_post_ts:.4f} ft/s "
      f"(bound {cfg.perf_v.xi_b})")
print(f"  max |e_h| after t=30 s             : {x.max_eh_post_ts:.4f} ft "
      f"(bound {cfg.perf_h.xi_b})")
print(f"  max |e_V| after the fault settles  : {x.max_ev_post_fault:.4f} ft/s")
print(f"  max |e_h| after the fault settles  : {x.max_eh_post_fault:.4f} ft")

log.to_csv(OUT / "trajectory.csv")
paths = write_plots(log, OUT)
print("wrote", ", ".join(str(p) for p in [OUT / "trajectory.csv"] + paths))
