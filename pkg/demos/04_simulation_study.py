"""A small Monte-Carlo study: matching against naive estimators.

Twenty replications keep this under a minute; the acceptance tests run the
same studies at 100 and 500 replications.

Run: python3 demos/04_simulation_study.py
"""

from bimatch.simulate import ScenarioSpec, reproduce, run_study, summarize

for scenario in ("b", "d"):
    spec = ScenarioSpec(scenario, "medium", seed=1)
    records = run_study(spec, 20, unadjusted=scenario == "d")
    print(f"\nscenario ({scenario}), threshold d={spec.threshold}")
    print(summarize(records).round(3).to_string())

# Heterogeneous effects: the matching estimate targets the matched periods.
records = run_study(ScenarioSpec("d", heterogeneous=True, seed=2), 20, methods=("1-1",), naive=False)
print("\nheterogeneous effects, scored against all periods and against the matched periods")
print(summarize(records, "all").round(3).to_string())
print(summarize(records, "matched").round(3).to_string())

# Scoring a reference table at reduced scale; coverage from 30 replications
# is itself noisy by several points.
res = reproduce("D6", 30, seed=3)
for c in res.checks:
    print(f"{'PASS' if c.passed else 'FAIL'} {c.setting} {c.estimator} {c.metric} = {c.value:.1f} in [{c.lo}, {c.hi}]")
