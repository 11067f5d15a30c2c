"""
Running scenario files
=======================

Scenarios bundle a measure, named bodies and a list of checks. The same
runner sits behind ``cbmkit verify``; here it is called directly.
"""
from cbmkit.cli import bundled_scenarios, run_scenario

for name, sc in bundled_scenarios().items():
    report, code = run_scenario(sc)
    s = report["summary"]
    print(f"{name:30s} exit {code}  passed {s['passed']:2d}  failed {s['failed']}  "
          f"diagnostics {s['diagnostics']} ({s['diagnostic_failures']} failing)")

report, _ = run_scenario(bundled_scenarios()["sobolev_beta_diagnostic.json"])
for r in report["reports"]:
    print(f"  {r['name']:24s} {r['mode']:10s} lhs {r['lhs']:.6g} rhs {r['rhs']:.6g} pass {r['pass']}")
