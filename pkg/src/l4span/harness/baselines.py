"""Reference AQM behaviors for comparison runs.

The wired dual-queue baseline estimates sojourn by subtracting the ingress
timestamps of the queue head and tail packets and marks everything while
that exceeds a threshold.  As a scenario AQM (`kind: dualpi2step`) the
baseline runs the marking engine with the error width forced to zero at
the same threshold, which is the step rule the head/tail proxy converges
to on a constant-rate drain.
"""

from __future__ import annotations


def dualpi2_step_mark(head_ingress: float, tail_ingress: float, threshold_secs: float) -> bool:
    """Step-mark predicate on the realized head/tail ingress spread.

    True marks every packet while the oldest queued packet is more than
    ``threshold_secs`` older than the newest.
    """
    if tail_ingress < head_ingress:
        raise ValueError("tail packet cannot predate the head packet")
    return (tail_ingress - head_ingress) > threshold_secs
