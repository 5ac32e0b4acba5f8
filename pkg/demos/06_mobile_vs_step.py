#!/usr/bin/env python3
"""Fading channel: error-aware marking vs fixed sojourn steps.

A wired-style step AQM with a millisecond threshold collapses on a fading
link; the error-aware probability keeps a protective buffer and most of
the throughput.
"""

from l4span.harness.scenario import BUILTIN_SCENARIOS
from l4span.ransim.sim import run


def main():
    runs = {
        "adaptive marking (10 ms)": BUILTIN_SCENARIOS["mobile-1ue"](),
        "fixed step 1 ms": BUILTIN_SCENARIOS["baseline-dualpi2-1ms"](),
        "fixed step 10 ms": BUILTIN_SCENARIOS["baseline-dualpi2-10ms"](),
    }
    print("single UE, fading channel (mean 30 Mbit/s)\n")
    print("aqm                        tput Mbit/s   util    median one-way")
    for label, scn in runs.items():
        res = run(scn)
        f = res.summary["flows"]["prague-1"]
        util = res.summary["ues"][1]["utilization"]
        print(f"{label:<26} {f['throughput_bps']/1e6:10.2f}   {util*100:5.1f}%"
              f"   {f['delay']['p50']*1e3:8.1f} ms")
    print("\nthe fixed 1 ms target leaves almost no buffer against fades and the")
    print("sender spends its life refilling; the adaptive probability widens its")
    print("marking edge exactly when the rate estimate gets noisy.")


if __name__ == "__main__":
    main()
