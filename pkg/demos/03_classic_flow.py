#!/usr/bin/env python3
"""Classic (CUBIC) flow under throughput-matched marking.

The classic controller aims for a standing buffer instead of a shallow
queue: marking probability is chosen so the sender's model throughput
matches the estimated drain rate. Compare against the unmanaged run to see
the buffer bloat it avoids.
"""

import dataclasses

from l4span.harness.scenario import BUILTIN_SCENARIOS
from l4span.ransim.sim import run


def cubic_variant(aqm_kind):
    scn = BUILTIN_SCENARIOS["static-1ue"]()
    scn.horizon_secs = 25.0
    drb = scn.ues[0].drbs[0]
    drb.flows = [dataclasses.replace(drb.flows[0], kind="cubic", feedback="classic",
                                     name="cubic-1")]
    scn.aqm.kind = aqm_kind
    return scn


def main():
    print("running CUBIC with marking and without ...")
    managed = run(cubic_variant("l4span"))
    unmanaged = run(cubic_variant("none"))

    for label, res in (("with marking", managed), ("no AQM", unmanaged)):
        f = res.summary["flows"]["cubic-1"]
        util = res.summary["ues"][1]["utilization"]
        qs = [r["queue_bytes"] for r in res.collector.intervals if r["t"] >= 5.0]
        nonzero = sum(1 for q in qs if q > 0) / len(qs)
        print(f"\n{label}:")
        print(f"  throughput      {f['throughput_bps']/1e6:6.2f} Mbit/s (utilization {util*100:.1f}%)")
        print(f"  median queuing  {f['queuing']['p50']*1e3:6.1f} ms")
        print(f"  p99 one-way     {f['delay']['p99']*1e3:6.1f} ms")
        print(f"  queue nonzero   {nonzero*100:6.1f}% of samples")
        print(f"  marks           {f['marks']}")

    print("\nthe managed queue never drains to zero (no underutilization) yet stays"
          "\norders of magnitude below the unmanaged standing bloat.")


if __name__ == "__main__":
    main()
