#!/usr/bin/env python3
"""Four marking policies on a bearer shared by a scalable and a classic flow.

`coupled` derives the scalable flow's probability from the classic one so
the two throughput models equalize; marking everything with one class's
strategy starves the other side.
"""

from l4span.harness.scenario import BUILTIN_SCENARIOS
from l4span.ransim.sim import run


def main():
    print("one Prague + one CUBIC in a single bearer, 40 Mbit/s static cell\n")
    print("policy     prague   cubic    scalable share")
    for policy in ("coupled", "l4s", "classic", "original"):
        scn = BUILTIN_SCENARIOS["shared-drb"]()
        scn.aqm.shared_policy = policy
        res = run(scn)
        tp = res.summary["flows"]["prague-1"]["throughput_bps"] / 1e6
        tc = res.summary["flows"]["cubic-1"]["throughput_bps"] / 1e6
        print(f"{policy:<9} {tp:6.2f}   {tc:6.2f}    {tp/(tp+tc):.3f}")
    print("\n'l4s' marks both classes aggressively and the classic flow starves;")
    print("'coupled' keeps the split near the middle.")


if __name__ == "__main__":
    main()
