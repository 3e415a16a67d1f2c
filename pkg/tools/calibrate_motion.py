"""Calibrate the default contraction amplitude against the demo device.

Sweeps the mean contraction amplitude a0, runs the full pipeline on the
shipped demo scenario for each value, and prints the annulus-band peak
compression so the default in ``stentlab.pipeline.default_motion`` can be
pinned inside the physiologic window (3.5 +/- 0.6 mm for the control).

Usage:
    python tools/calibrate_motion.py [a0 ...]

Takes about five minutes per candidate on one core.
"""
import sys
import time
from dataclasses import replace

from stentlab.pipeline import ScenarioConfig, default_lumen, default_motion, \
    resolve_design, run_pipeline


def main(argv):
    candidates = [float(a) for a in argv] or [0.14, 0.16, 0.18, 0.20]
    design = resolve_design("corevalve26-like")
    for a0 in candidates:
        lumen = default_lumen(replace(default_motion(), a0=a0))
        scenario = ScenarioConfig(design=design, lumen=lumen)
        t0 = time.perf_counter()
        result = run_pipeline(scenario)
        m = result.metrics
        print(f"a0={a0:.3f}: peak_compression {m['peak_compression_mm']:.3f} mm"
              f"  periodicity {m['periodicity']:.4f}"
              f"  maxKE/SE {m['max_ke_se_ratio_beat']:.2e}"
              f"  wall {time.perf_counter() - t0:.0f}s", flush=True)


if __name__ == "__main__":
    main(sys.argv[1:])
