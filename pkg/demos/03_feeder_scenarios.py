"""Attach feeders to the 9-bus case and classify which side limits stability."""
from tddi import reference_scenarios, run_scenario, series

for cfg in reference_scenarios():
    r = run_scenario(cfg)
    print(f"{cfg.name}: margin {r.margin_mw:.1f} MW", end="")
    if r.critical_bus is None:
        print()
        continue
    print(f", critical load {r.bus_name(r.critical_bus)}, TDDI {r.nose_tddi:+.3f} -> {r.classification.value}")
    for b in sorted(r.records):
        pts = series(r, b, "tddi")
        shown = pts[:: max(1, len(pts) // 6)] + [pts[-1]]
        print(f"  {r.bus_name(b)}: " + "  ".join(f"{mw:.0f}:{t:+.2f}" for mw, t in shown))
