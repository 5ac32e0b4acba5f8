"""Per-DRB RLC queue: drop-tail FIFO of SDUs with partial-transmit carryover."""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from typing import Optional

from ..core import DrbConfig, Packet


class EnqueueResult(enum.Enum):
    QUEUED = "queued"
    DROPPED_TAIL = "dropped_tail"


@dataclass
class DelayBreakdown:
    propagation_secs: float
    queuing_secs: float
    scheduling_secs: float
    retransmission_secs: float

    @property
    def one_way_secs(self) -> float:
        return (
            self.propagation_secs
            + self.queuing_secs
            + self.scheduling_secs
            + self.retransmission_secs
        )


@dataclass
class _Sdu:
    pkt: Packet
    sn: int
    enq_at: float
    head_at: Optional[float] = None
    sent_bytes: int = 0


@dataclass
class CompletedSdu:
    pkt: Packet
    sn: int
    enq_at: float
    head_at: float
    done_at: float


class RlcQueue:
    """FIFO SDU queue; transmission order equals ingress order (in-order RLC)."""

    def __init__(self, drb: DrbConfig):
        self.drb = drb
        self.sdus: deque[_Sdu] = deque()
        self.highest_tx_sn: Optional[int] = None
        self.highest_dlv_sn: Optional[int] = None
        # byte conservation: admitted = transmitted(used) + standing + (drops tracked separately)
        self.admitted_bytes = 0
        self.transmitted_bytes = 0
        self.dropped_bytes = 0
        self.dropped_sdus = 0
        self._standing = 0
        self._dlv_expected = 1
        self._dlv_ooo: set[int] = set()

    def __len__(self) -> int:
        return len(self.sdus)

    @property
    def standing_bytes(self) -> int:
        return self._standing

    def has_room(self) -> bool:
        return len(self.sdus) < self.drb.max_queue_sdus

    def enqueue(self, pkt: Packet, sn: int, now: float) -> EnqueueResult:
        if not self.has_room():
            self.dropped_bytes += pkt.size_bytes
            self.dropped_sdus += 1
            return EnqueueResult.DROPPED_TAIL
        sdu = _Sdu(pkt=pkt, sn=sn, enq_at=now)
        if not self.sdus:
            sdu.head_at = now
        self.sdus.append(sdu)
        self.admitted_bytes += pkt.size_bytes
        self._standing += pkt.size_bytes
        return EnqueueResult.QUEUED

    def transmit(self, budget_bytes: float, now: float) -> tuple[list[CompletedSdu], int]:
        """Serve up to budget_bytes; one SDU may be sent partially and
        completes in a later slot.  Returns completed SDUs and bytes used."""
        used = 0
        completed: list[CompletedSdu] = []
        budget = int(budget_bytes)
        while budget > 0 and self.sdus:
            head = self.sdus[0]
            need = head.pkt.size_bytes - head.sent_bytes
            take = min(need, budget)
            head.sent_bytes += take
            budget -= take
            used += take
            self._standing -= take
            if head.sent_bytes == head.pkt.size_bytes:
                self.sdus.popleft()
                completed.append(
                    CompletedSdu(
                        pkt=head.pkt,
                        sn=head.sn,
                        enq_at=head.enq_at,
                        head_at=head.head_at if head.head_at is not None else head.enq_at,
                        done_at=now,
                    )
                )
                self.highest_tx_sn = head.sn
                if self.sdus:
                    self.sdus[0].head_at = now
        self.transmitted_bytes += used
        return completed, used

    def mark_delivered(self, sn: int) -> None:
        """Advance the cumulative in-order delivery pointer (RLC AM ACK)."""
        self._dlv_ooo.add(sn)
        while self._dlv_expected in self._dlv_ooo:
            self._dlv_ooo.remove(self._dlv_expected)
            self.highest_dlv_sn = self._dlv_expected
            self._dlv_expected += 1


def enqueue_rlc(q: RlcQueue, pkt: Packet, sn: int, now: float) -> EnqueueResult:
    """Append the SDU or drop at the tail when the queue is at capacity."""
    return q.enqueue(pkt, sn, now)
