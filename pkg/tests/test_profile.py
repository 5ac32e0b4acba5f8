import math
import random

import pytest

from l4span.core import DrbConfig, EstimateUnavailable, ProtocolError, RlcMode
from l4span.profile import DEFAULT_WINDOW_SECS, ProfileTable

W = DEFAULT_WINDOW_SECS


def _table(mode=RlcMode.AM, window=W):
    return ProfileTable(DrbConfig(ue_id=1, drb_id=1, rlc_mode=mode), window_secs=window)


def test_window_default():
    assert W == pytest.approx(0.01245)


def test_record_ingress_first_insert():
    t = _table()
    t.record_ingress(1, 1500, 0.0)
    assert len(t.entries) == 1
    e = t.entries[0]
    assert e.t_ingress == 0.0 and e.t_transmit is None and e.t_deliver is None
    assert t.queued_bytes == 1500


def test_record_ingress_monotonicity():
    t = _table()
    t.record_ingress(1, 1500, 0.0)
    with pytest.raises(ProtocolError):
        t.record_ingress(1, 1500, 0.1)


def test_queued_bytes_additivity():
    t = _table()
    for sn, size in enumerate([1500, 700, 40], start=1):
        t.record_ingress(sn, size, 0.0)
    assert t.queued_bytes == 2240


def test_feedback_transmit_and_deliver():
    # three packets queued; status tx=2 at t=5 stamps 1 and 2;
    # a later status dlv=1 at t=9 stamps delivery of 1
    t = _table()
    for sn in (1, 2, 3):
        t.record_ingress(sn, 1500, 1.0)
    newly = t.on_f1u_feedback(2, None, 5.0)
    assert [e.pdcp_sn for e in newly] == [1, 2]
    assert t.entries[0].t_transmit == 5.0 and t.entries[1].t_transmit == 5.0
    assert t.entries[2].t_transmit is None
    assert t.highest_tx_sn == 2
    t.on_f1u_feedback(2, 1, 9.0)
    assert t.entries[0].t_deliver == 9.0
    assert t.entries[1].t_deliver is None


def test_feedback_regression_rejected():
    t = _table()
    t.record_ingress(1, 1500, 0.0)
    t.record_ingress(2, 1500, 0.0)
    t.on_f1u_feedback(2, None, 1.0)
    with pytest.raises(ProtocolError):
        t.on_f1u_feedback(1, None, 2.0)


def test_um_mode_rejects_delivery_feedback():
    t = _table(mode=RlcMode.UM)
    t.record_ingress(1, 1500, 0.0)
    with pytest.raises(ProtocolError):
        t.on_f1u_feedback(1, 1, 1.0)
    t.on_f1u_feedback(1, None, 1.0)
    assert t.entries[0].t_transmit == 1.0 and t.entries[0].t_deliver is None


def test_timestamps_monotone_per_entry():
    t = _table()
    t.record_ingress(1, 1500, 1.0)
    t.on_f1u_feedback(1, None, 2.0)
    t.on_f1u_feedback(1, 1, 3.0)
    e = t.entries[0]
    assert e.t_ingress <= e.t_transmit <= e.t_deliver


def test_egress_rate_instant_single_packet():
    t = _table()
    t.record_ingress(1, 1500, 0.0)
    t.on_f1u_feedback(1, None, 0.005)
    assert t.egress_rate_instant(1) == pytest.approx(1500 / W)
    assert t.egress_rate_instant(1) == pytest.approx(120481.92771084337)


def test_egress_rate_instant_additivity():
    t = _table()
    t.record_ingress(1, 1500, 0.0)
    t.record_ingress(2, 1500, 0.0)
    t.on_f1u_feedback(1, None, 0.004)
    t.on_f1u_feedback(2, None, 0.0045)
    assert t.egress_rate_instant(2) == pytest.approx(2 * 1500 / W)


def test_egress_rate_instant_unknown_sn():
    t = _table()
    with pytest.raises(KeyError):
        t.egress_rate_instant(99)
    t.record_ingress(1, 1500, 0.0)
    with pytest.raises(EstimateUnavailable):
        t.egress_rate_instant(1)


def test_smoothed_requires_transmissions():
    t = _table()
    with pytest.raises(EstimateUnavailable):
        t.egress_rate_smoothed()


def test_smoothed_constant_drain_zero_error():
    # identical instantaneous rates -> zero standard deviation
    t = _table()
    for sn in range(1, 40):
        t.record_ingress(sn, 1500, sn * 1e-3)
    now = 0.05
    for sn in range(1, 40):
        t.on_f1u_feedback(sn, None, now)
        now += W  # each transmit alone in its window: identical rates
    est = t.egress_rate_smoothed()
    assert est.sample_count == 1  # window holds only the newest sample
    assert est.e_hat == 0.0

    # denser: several same-rate samples inside one window
    t2 = _table()
    for sn in range(1, 60):
        t2.record_ingress(sn, 1500, sn * 1e-4)
    now = 0.05
    step = W / 4
    for sn in range(1, 60):
        t2.on_f1u_feedback(sn, None, now)
        now += step
    est2 = t2.egress_rate_smoothed()
    assert est2.sample_count >= 2
    assert est2.e_hat == pytest.approx(0.0, abs=1e-6)


def test_sojourn_prediction_direct_division():
    t = _table(window=0.01)
    # one transmitted packet establishes the rate; queued bytes predict sojourn
    t.record_ingress(1, 100000, 0.0)
    t.on_f1u_feedback(1, None, 0.01)
    t.record_ingress(2, 60000, 0.011)
    t.record_ingress(3, 40000, 0.012)
    est = t.egress_rate_smoothed()
    assert est.r_hat == pytest.approx(100000 / 0.01)  # 10 MB/s
    assert est.n_queue == 100000
    assert est.sojourn_hat == pytest.approx(0.010)  # 10 ms


def test_sojourn_empty_queue_zero():
    t = _table()
    t.record_ingress(1, 1500, 0.0)
    t.on_f1u_feedback(1, None, 0.002)
    est = t.egress_rate_smoothed()
    assert est.n_queue == 0
    assert est.sojourn_hat == 0.0


def _brute_force_smoothed(events):
    """Independent re-implementation: events = [(sn, size, t_tx)] transmitted."""
    if not events:
        return None
    t_k = max(t for _, _, t in events)
    low = t_k - W

    def instant(t_i):
        return sum(size for _, size, t in events if t_i - W < t <= t_i) / W

    rates = [instant(t) for _, _, t in events if low < t <= t_k]
    mean = sum(rates) / len(rates)
    if len(rates) >= 2:
        var = sum((r - mean) ** 2 for r in rates) / len(rates)
    else:
        var = 0.0
    return mean, math.sqrt(var)


def test_smoothed_matches_brute_force_oracle():
    rng = random.Random(7)
    t = _table()
    events = []
    now = 0.0
    sn = 0
    for _ in range(400):
        sn += 1
        size = rng.choice([40, 700, 1500])
        t.record_ingress(sn, size, now)
        now += rng.random() * 2e-3
        t.on_f1u_feedback(sn, None, now)
        events.append((sn, size, now))
    est = t.egress_rate_smoothed()
    mean, std = _brute_force_smoothed(events)
    assert est.r_hat == pytest.approx(mean, rel=1e-9)
    assert est.e_hat == pytest.approx(std, rel=1e-6, abs=1e-6)


def test_byte_conservation_invariant():
    rng = random.Random(13)
    t = _table()
    ingressed = 0
    transmitted = 0
    sn = 0
    tx_sn = 0
    now = 0.0
    for _ in range(500):
        now += rng.random() * 1e-3
        if rng.random() < 0.6:
            sn += 1
            size = rng.randrange(40, 1501)
            t.record_ingress(sn, size, now)
            ingressed += size
        elif tx_sn < sn:
            tx_sn += rng.randrange(1, sn - tx_sn + 1)
            newly = t.on_f1u_feedback(tx_sn, None, now)
            transmitted += sum(e.size_bytes for e in newly)
        assert t.queued_bytes == ingressed - transmitted


def test_synthetic_drain_within_five_percent():
    # steady drain at R bytes/s for >= 2 windows: r_hat within [0.95R, 1.05R]
    R = 5e6
    slot = 0.0005
    per_slot = R * slot
    t = _table()
    sn = 0
    now = 0.0
    carry = 0.0
    for _ in range(int(0.2 / slot)):  # 0.2 s >> 2 windows
        now += slot
        carry += per_slot
        while carry >= 1500:
            sn += 1
            t.record_ingress(sn, 1500, now - slot)
            carry -= 1500
        t.on_f1u_feedback(sn, None, now)
    est = t.egress_rate_smoothed()
    assert 0.95 * R <= est.r_hat <= 1.05 * R


def test_gaussian_premise_near_zero_mean_error():
    # stationary random drain: mean of (r_hat - true) within 5% of true
    rng = random.Random(3)
    R = 4e6
    slot = 0.0005
    t = _table()
    sn = 0
    now = 0.0
    carry = 0.0
    errs = []
    for i in range(int(1.0 / slot)):
        now += slot
        carry += R * slot * (0.5 + rng.random())  # mean R per slot
        while carry >= 1500:
            sn += 1
            t.record_ingress(sn, 1500, now - slot)
            carry -= 1500
        t.on_f1u_feedback(sn, None, now)
        if i > 100:
            errs.append(t.egress_rate_smoothed().r_hat - R)
    assert abs(sum(errs) / len(errs)) <= 0.05 * R


def test_gc_keeps_fresh_entries():
    t = _table()
    t.record_ingress(1, 1500, 0.0)
    t.on_f1u_feedback(1, 1, 0.001)
    assert t.gc_delivered(1.0, 0.5) == 0
    assert len(t.entries) == 1


def test_gc_removes_old_delivered():
    t = _table()
    t.record_ingress(1, 1500, 0.0)
    t.record_ingress(2, 1500, 0.0)
    t.on_f1u_feedback(2, 1, 0.001)
    assert t.gc_delivered(1.0, 2.0) == 1  # entry 1 delivered, old; entry 2 undelivered
    assert [e.pdcp_sn for e in t.entries] == [2]


def test_gc_preserves_estimate():
    t = _table()
    now = 0.0
    for sn in range(1, 200):
        t.record_ingress(sn, 1500, now)
        now += 4e-4
        t.on_f1u_feedback(sn, sn, now)
    before = t.egress_rate_smoothed()
    removed = t.gc_delivered(2 * W, now)
    assert removed > 0
    after = t.egress_rate_smoothed()
    assert after == before


def test_um_gc_uses_transmit_time():
    t = _table(mode=RlcMode.UM)
    t.record_ingress(1, 1500, 0.0)
    t.on_f1u_feedback(1, None, 0.001)
    assert t.gc_delivered(0.5, 2.0) == 1
