"""
Timing the executors and emitting reports
=========================================

Runs the cold/warm protocol over a small scale-factor sweep and writes the
json, csv and plotdata reports next to this script's output directory.
"""

import sys
from pathlib import Path

from textbends import STANDARD_PARAMS, GeneratorConfig, ProtocolConfig, build_workload, emit_report, sweep_scale
from textbends.bench import scaling_violations

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_reports")

# keyword queries only, both schemes, both genders
specs = build_workload(STANDARD_PARAMS, query_ids=("Q1", "Q2", "Q3", "Q4"))
protocol = ProtocolConfig(warm_runs=5)

reports = sweep_scale(GeneratorConfig(sf=0.001), [0.001, 0.002, 0.004], specs, protocol)

for report in reports:
    fastest = min(report.results, key=lambda r: r.mean_ms)
    slowest = max(report.results, key=lambda r: r.mean_ms)
    print(f"SF={report.sf}: {len(report.results)} entries, "
          f"fastest {fastest.query_id}/{fastest.engine} {fastest.mean_ms:.2f} ms, "
          f"slowest {slowest.query_id}/{slowest.engine} {slowest.mean_ms:.2f} ms")

# runtime should not shrink as the corpus grows; noisy timings are only flagged
for line in scaling_violations(reports):
    print("flagged:", line)

for fmt, name in (("json", "sweep.json"), ("csv", "sweep.csv"), ("plotdata", "sweep.plot.json")):
    print("wrote", emit_report(reports, fmt, out / name))
