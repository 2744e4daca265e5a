"""Run the statistical battery on PCG32 and on RANDU and compare."""

import time

from pcg_workbench.battery import Assessment, BatterySizes, WordStream, format_report, run_battery
from pcg_workbench.pcg import PcgConfig

sizes = BatterySizes()
print(f"{sizes.psamples} p-samples per test, {sizes.tsamples} bits per sample for the bit tests\n")

for label, stream in (
    ("PCG32 golden model", WordStream.golden(PcgConfig(seed=0x853C49E6748FEA9B))),
    ("RANDU", WordStream.randu(1)),
):
    start = time.perf_counter()
    results = run_battery(stream, sizes=sizes)
    print(f"== {label} ({time.perf_counter() - start:.1f} s)")
    print(format_report(results))
    failed = sum(r.assessment is Assessment.FAILED for r in results)
    print(f"{failed} of {len(results)} rows FAILED\n")
