#!/usr/bin/env python3
"""The scalable flow's sawtooth on a static channel.

Runs the bundled static single-UE scenario and prints the queue and cwnd
trajectory: the marking layer holds the RLC queue in a small sawtooth
around the sojourn threshold while throughput stays at line rate.
"""

from l4span.harness.scenario import BUILTIN_SCENARIOS
from l4span.ransim.sim import run


def main():
    scn = BUILTIN_SCENARIOS["static-1ue"]()
    scn.horizon_secs = 15.0
    print(f"running {scn.name}: 40 Mbit/s static channel, sojourn threshold "
          f"{scn.aqm.tau_thr*1e3:.0f} ms ...")
    res = run(scn)

    print("\n t(s)   queue(kB)  cwnd(kB)  tput(Mbit/s)  p_l4s")
    for rec in res.collector.intervals:
        if rec["flow"] != "prague-1" or rec["t"] % 0.5 > 0.05:
            continue
        p = rec["p_l4s"]
        print(f"{rec['t']:5.1f}  {rec['queue_bytes']/1e3:8.1f}  {rec['cwnd']/1e3:8.1f}"
              f"  {rec['throughput_bps']/1e6:10.2f}  {p if p is None else round(p, 3)}")

    f = res.summary["flows"]["prague-1"]
    util = res.summary["ues"][1]["utilization"]
    print(f"\nsteady state: median queuing {f['queuing']['p50']*1e3:.1f} ms, "
          f"median one-way delay {f['delay']['p50']*1e3:.1f} ms, utilization {util*100:.1f}%")

    qs = [r["queue_bytes"] for r in res.collector.intervals
          if r["flow"] == "prague-1" and r["t"] >= scn.warmup_secs]
    mean_q = sum(qs) / len(qs)
    amp = (max(qs) - min(qs)) / 2
    print(f"queue sawtooth: mean {mean_q/1e3:.1f} kB, amplitude {amp/1e3:.1f} kB "
          f"(threshold is ~{scn.aqm.tau_thr * 5e6 / 1e3:.0f} kB at line rate)")


if __name__ == "__main__":
    main()
