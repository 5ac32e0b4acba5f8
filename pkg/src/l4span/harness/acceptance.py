"""Acceptance criteria evaluators, shared by the test suite and the CLI.

Each criterion returns a CriterionResult; the expensive simulation runs are
memoized per scenario variant so overlapping criteria reuse them.
"""

from __future__ import annotations

import dataclasses
import math
import random
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from ..core import DrbConfig
from ..marking import MarkParams
from ..profile import DEFAULT_WINDOW_SECS, ProfileTable
from .metrics import dumps_intervals, dumps_packets
from .scenario import BUILTIN_SCENARIOS, Scenario


@dataclass
class CriterionResult:
    cid: int
    name: str
    passed: bool
    detail: str


def render_table(results: list["CriterionResult"]) -> str:
    lines = ["#  result  criterion", "-" * 78]
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        lines.append(f"{r.cid:<2} {status:<6}  {r.name}")
        lines.append(f"          {r.detail}")
    n_pass = sum(r.passed for r in results)
    lines.append("-" * 78)
    lines.append(f"{n_pass}/{len(results)} criteria passed")
    return "\n".join(lines)


# -- scenario variants ---------------------------------------------------------


def _static_l4span() -> Scenario:
    return BUILTIN_SCENARIOS["static-1ue"]()

def _static_zero_error() -> Scenario:
    scn = BUILTIN_SCENARIOS["static-1ue"]()
    scn.name = "static-1ue-e0"
    scn.aqm.force_zero_error = True
    return scn

def _static_dualpi2() -> Scenario:
    # the reduction twin: the step baseline fed by the predicted sojourn,
    # which is exactly what the adaptive marker degenerates to at zero
    # error width
    scn = BUILTIN_SCENARIOS["static-1ue"]()
    scn.name = "static-1ue-dualpi2"
    scn.aqm.kind = "dualpi2step"
    scn.aqm.step_source = "predicted"
    return scn

def _static_noaqm() -> Scenario:
    scn = BUILTIN_SCENARIOS["static-1ue"]()
    scn.name = "static-1ue-noaqm"
    scn.aqm.kind = "none"
    return scn

def _swap_cubic(scn: Scenario) -> Scenario:
    drb = scn.ues[0].drbs[0]
    drb.flows = [dataclasses.replace(f, kind="cubic", feedback="classic", name=f"cubic-{i+1}")
                 for i, f in enumerate(drb.flows)]
    return scn

def _static_cubic() -> Scenario:
    scn = _swap_cubic(BUILTIN_SCENARIOS["static-1ue"]())
    scn.name = "static-1ue-cubic"
    return scn

def _static_cubic_noaqm() -> Scenario:
    scn = _static_cubic()
    scn.name = "static-1ue-cubic-noaqm"
    scn.aqm.kind = "none"
    return scn

def _mobile_l4span() -> Scenario:
    return BUILTIN_SCENARIOS["mobile-1ue"]()

def _shared_coupled() -> Scenario:
    return BUILTIN_SCENARIOS["shared-drb"]()

def _shared_mark_all_l4s() -> Scenario:
    scn = BUILTIN_SCENARIOS["shared-drb"]()
    scn.name = "shared-drb-all-l4s"
    scn.aqm.shared_policy = "l4s"
    return scn

def _slf_llf() -> Scenario:
    return BUILTIN_SCENARIOS["slf-llf"]()

def _slf_llf_noaqm() -> Scenario:
    scn = BUILTIN_SCENARIOS["slf-llf"]()
    scn.name = "slf-llf-noaqm"
    scn.aqm.kind = "none"
    return scn

def _ablation_off() -> Scenario:
    return BUILTIN_SCENARIOS["ablation-no-shortcircuit"]()

def _ablation_on() -> Scenario:
    scn = BUILTIN_SCENARIOS["ablation-no-shortcircuit"]()
    scn.name = "ablation-shortcircuit-on"
    scn.aqm.short_circuit = True
    return scn


VARIANTS: dict[str, Callable[[], Scenario]] = {
    "static-1ue": _static_l4span,
    "static-1ue-e0": _static_zero_error,
    "static-1ue-dualpi2": _static_dualpi2,
    "static-1ue-noaqm": _static_noaqm,
    "static-1ue-cubic": _static_cubic,
    "static-1ue-cubic-noaqm": _static_cubic_noaqm,
    "mobile-1ue": _mobile_l4span,
    "baseline-dualpi2-1ms": BUILTIN_SCENARIOS["baseline-dualpi2-1ms"],
    "baseline-dualpi2-10ms": BUILTIN_SCENARIOS["baseline-dualpi2-10ms"],
    "shared-drb": _shared_coupled,
    "shared-drb-all-l4s": _shared_mark_all_l4s,
    "slf-llf": _slf_llf,
    "slf-llf-noaqm": _slf_llf_noaqm,
    "ablation-no-shortcircuit": _ablation_off,
    "ablation-shortcircuit-on": _ablation_on,
}


class AcceptanceRunner:
    def __init__(self, save_dir: Optional[str] = None, verbose: bool = False):
        self._cache: dict[str, object] = {}
        self.save_dir = save_dir
        self.verbose = verbose

    def result(self, key: str):
        if key not in self._cache:
            from ..ransim.sim import run as sim_run

            scn = VARIANTS[key]()
            if self.verbose:
                print(f"... running {key} ({scn.horizon_secs:.0f} s horizon)", flush=True)
            t0 = time.time()
            res = sim_run(scn)
            if self.verbose:
                print(f"    done in {time.time() - t0:.1f} s ({res.events} events)", flush=True)
            if self.save_dir:
                from .metrics import write_run

                write_run(res, Path(self.save_dir) / key)
            self._cache[key] = res
        return self._cache[key]

    # -- helpers -----------------------------------------------------------

    @staticmethod
    def _steady_packets(res, flow: str, warmup: float):
        return [r for r in res.collector.packets if r.flow == flow and r.t >= warmup]

    @staticmethod
    def _flow(res, name: str) -> dict:
        return res.summary["flows"][name]

    # -- criteria ----------------------------------------------------------

    def c1_formula_oracles(self) -> CriterionResult:
        """Closed-form operations match independent re-implementations to 1e-9."""
        from ..marking import (
            coupled_probabilities,
            error_cost_bounds,
            k_constant,
            p_classic,
        )

        rng = random.Random(1234)
        worst = 0.0

        def rel(a, b):
            if a == b:
                return 0.0
            return abs(a - b) / max(abs(a), abs(b), 1e-300)

        for _ in range(1000):
            beta = rng.uniform(0.05, 0.95)
            # K via an algebraically reshuffled route
            k_ref = (1 + beta) * math.sqrt(2.0) / (2.0 * math.sqrt((1 - beta) * (1 + beta)))
            worst = max(worst, rel(k_constant(beta), k_ref))

            mss = rng.uniform(100, 9000)
            rtt = rng.uniform(1e-3, 1.0)
            r = rng.uniform(1e4, 1e9)
            k = k_constant(beta)
            # p_classic in log space
            p_ref = min(1.0, math.exp(2 * (math.log(mss) + math.log(k) - math.log(rtt) - math.log(r))))
            worst = max(worst, rel(p_classic(mss, k, rtt, r), p_ref))

            # coupled probability by numerically equating the two throughput models
            p_cl = 10 ** rng.uniform(-9, -0.1)
            r_classic = mss * k / (rtt * math.sqrt(p_cl))
            p_shared_ref = min(1.0, 2 * mss / (rtt * r_classic))
            worst = max(worst, rel(coupled_probabilities(p_cl, k)[0], p_shared_ref))

            # error cost bounds, piecewise re-derivation
            r_true = rng.uniform(1e5, 1e8)
            r_hat = r_true * rng.uniform(0.5, 1.5)
            rt_p = rng.uniform(1e-3, 0.3)
            tau = rng.uniform(1e-3, 0.05)
            infl, loss = error_cost_bounds(r_true, r_hat, rt_p, tau)
            if r_hat > r_true:
                infl_ref, loss_ref = rt_p * (r_hat / r_true - 1.0), 0.0
            elif r_hat < r_true:
                infl_ref, loss_ref = 0.0, (rt_p + tau) * (r_true - r_hat) / rt_p
            else:
                infl_ref, loss_ref = 0.0, 0.0
            worst = max(worst, rel(infl, infl_ref), rel(loss, loss_ref))

            # sojourn prediction is the plain quotient
            n_q = rng.uniform(0, 1e7)
            worst = max(worst, rel(n_q / r, (n_q * (1.0 / r))) if n_q else 0.0)

        passed = worst <= 1e-9
        return CriterionResult(1, "formula oracles (1000 random inputs, 1e-9 relative)",
                               passed, f"worst relative error {worst:.3e}")

    def c2_step_reduction(self) -> CriterionResult:
        """Zero error width makes the run event-identical to the step baseline."""
        a = self.result("static-1ue-e0")
        b = self.result("static-1ue-dualpi2")
        pk_a, pk_b = dumps_packets(a.collector.packets), dumps_packets(b.collector.packets)
        iv_a, iv_b = dumps_intervals(a.collector.intervals), dumps_intervals(b.collector.intervals)
        passed = pk_a == pk_b and iv_a == iv_b
        return CriterionResult(
            2, "zero-error reduction is event-identical to the step baseline", passed,
            f"packet streams {'identical' if pk_a == pk_b else 'differ'} "
            f"({len(a.collector.packets)} records), "
            f"interval streams {'identical' if iv_a == iv_b else 'differ'}",
        )

    def c3_l4s_latency_utilization(self) -> CriterionResult:
        res = self.result("static-1ue")
        base = self.result("static-1ue-noaqm")
        scn_warmup = 5.0
        queuing = np.array([r.queuing for r in self._steady_packets(res, "prague-1", scn_warmup)])
        med_q = float(np.median(queuing))
        util = res.summary["ues"][1]["utilization"]
        med_delay = self._flow(res, "prague-1")["delay"]["p50"]
        med_delay_base = self._flow(base, "prague-1")["delay"]["p50"]
        reduction = 1.0 - med_delay / med_delay_base
        passed = 0.005 <= med_q <= 0.020 and util >= 0.90 and reduction >= 0.80
        return CriterionResult(
            3, "scalable-flow latency and utilization on the static channel", passed,
            f"median queuing {med_q * 1e3:.2f} ms (need 5..20), utilization {util:.3f} "
            f"(need >=0.90), delay reduction vs no-AQM {reduction * 100:.1f}% (need >=80%)",
        )

    def c4_mobile_robustness(self) -> CriterionResult:
        res = self.result("mobile-1ue")
        dp1 = self.result("baseline-dualpi2-1ms")
        dp10 = self.result("baseline-dualpi2-10ms")
        t = self._flow(res, "prague-1")["throughput_bps"]
        t1 = self._flow(dp1, "prague-1")["throughput_bps"]
        t10 = self._flow(dp10, "prague-1")["throughput_bps"]
        util = res.summary["ues"][1]["utilization"]
        passed = t >= 1.25 * t1 and t >= t10 and util >= 0.85
        return CriterionResult(
            4, "mobile-channel throughput vs fixed-step baselines", passed,
            f"{t / 1e6:.2f} Mbit/s vs 1ms-step {t1 / 1e6:.2f} (need x1.25) and "
            f"10ms-step {t10 / 1e6:.2f} (need >=), utilization {util:.3f} (need >=0.85)",
        )

    def c5_classic_non_starvation(self) -> CriterionResult:
        res = self.result("static-1ue-cubic")
        base = self.result("static-1ue-cubic-noaqm")
        warmup = 5.0
        qs = [r["queue_bytes"] for r in res.collector.intervals if r["t"] >= warmup]
        nonzero = sum(1 for q in qs if q > 0) / len(qs)
        util = res.summary["ues"][1]["utilization"]
        med_q = float(np.median([r.queuing for r in self._steady_packets(res, "cubic-1", warmup)]))
        med_q_base = float(np.median([r.queuing for r in self._steady_packets(base, "cubic-1", warmup)]))
        passed = nonzero >= 0.99 and util >= 0.90 and med_q <= 0.25 * med_q_base
        return CriterionResult(
            5, "classic flow keeps a standing queue without bufferbloat", passed,
            f"queue nonzero {nonzero * 100:.1f}% of samples (need >=99), utilization {util:.3f} "
            f"(need >=0.90), median queuing {med_q * 1e3:.1f} ms vs no-AQM {med_q_base * 1e3:.0f} ms "
            f"(need <=25%)",
        )

    def c6_shared_drb_fairness(self) -> CriterionResult:
        res = self.result("shared-drb")
        tp = self._flow(res, "prague-1")["throughput_bps"]
        tc = self._flow(res, "cubic-1")["throughput_bps"]
        share = tp / (tp + tc)
        alt = self.result("shared-drb-all-l4s")
        tp2 = self._flow(alt, "prague-1")["throughput_bps"]
        tc2 = self._flow(alt, "cubic-1")["throughput_bps"]
        classic_share = tc2 / (tp2 + tc2)
        passed = 0.35 <= share <= 0.65 and classic_share < 0.35
        return CriterionResult(
            6, "shared-bearer coupled marking shares the rate fairly", passed,
            f"scalable share {share:.3f} (need 0.35..0.65) under coupling; classic share "
            f"{classic_share:.3f} (need <0.35) when both classes are marked as scalable",
        )

    def c7_shortcircuit_ablation(self) -> CriterionResult:
        # measured over the whole run: ramp-up overshoot is exactly the
        # feedback-lag effect the rewrite removes
        on = self.result("ablation-shortcircuit-on")
        off = self.result("ablation-no-shortcircuit")

        def pooled_lat(res):
            vals = []
            for flow, pairs in res.collector.feedback_latency.items():
                vals.extend(v for _, v in pairs)
            return np.array(vals)

        def pooled_rtt(res):
            vals = []
            for flow, pairs in res.collector.rtt_samples.items():
                vals.extend(v for _, v in pairs)
            return np.array(vals)

        lat_on, lat_off = pooled_lat(on), pooled_lat(off)
        rtt_on, rtt_off = pooled_rtt(on), pooled_rtt(off)
        mean_red = 1.0 - float(np.mean(lat_on)) / float(np.mean(lat_off))
        p999_on = float(np.percentile(rtt_on, 99.9))
        p999_off = float(np.percentile(rtt_off, 99.9))
        tail_red = 1.0 - p999_on / p999_off
        tput_on = sum(f["throughput_bps"] for f in on.summary["flows"].values())
        tput_off = sum(f["throughput_bps"] for f in off.summary["flows"].values())
        tput_ratio = tput_on / tput_off
        passed = mean_red >= 0.10 and tail_red >= 0.20 and abs(1 - tput_ratio) <= 0.05
        return CriterionResult(
            7, "feedback short-circuiting cuts feedback latency and RTT tail", passed,
            f"mean feedback latency {np.mean(lat_on) * 1e3:.1f} vs {np.mean(lat_off) * 1e3:.1f} ms "
            f"(-{mean_red * 100:.1f}%, need >=10%), p99.9 RTT {p999_on * 1e3:.0f} vs "
            f"{p999_off * 1e3:.0f} ms (-{tail_red * 100:.1f}%, need >=20%), "
            f"throughput ratio {tput_ratio:.3f} (need within 5%)",
        )

    def c8_slf_llf(self) -> CriterionResult:
        res = self.result("slf-llf")
        base = self.result("slf-llf-noaqm")
        c = self._flow(res, "slf")["completion_secs"]
        c_base = self._flow(base, "slf")["completion_secs"]
        llf = self._flow(res, "llf")["throughput_bps"]
        llf_base = self._flow(base, "llf")["throughput_bps"]
        ok_completion = c is not None and c_base is not None and c <= 0.5 * c_base
        ok_llf = llf >= 0.85 * llf_base
        passed = ok_completion and ok_llf
        return CriterionResult(
            8, "short flow finishes fast without starving the long flow", passed,
            f"completion {c:.3f} s vs no-AQM {c_base:.3f} s (need <=50%), long-flow throughput "
            f"{llf / 1e6:.2f} vs {llf_base / 1e6:.2f} Mbit/s (need >=85%)",
        )

    def c9_estimator_accuracy(self) -> CriterionResult:
        # stationary synthetic drains: mean relative rate error within 5%
        worst_mean_err = 0.0
        for rate, seed in ((2e6, 3), (5e6, 4), (8e6, 5)):
            rng = random.Random(seed)
            table = ProfileTable(DrbConfig(ue_id=1, drb_id=1), window_secs=DEFAULT_WINDOW_SECS)
            sn, now, carry = 0, 0.0, 0.0
            errs = []
            for i in range(2000):
                now += 0.0005
                carry += rate * 0.0005 * (0.5 + rng.random())
                while carry >= 1500:
                    sn += 1
                    table.record_ingress(sn, 1500, now - 0.0005)
                    carry -= 1500
                table.on_f1u_feedback(sn, None, now)
                if i > 100:
                    errs.append(table.egress_rate_smoothed().r_hat - rate)
            worst_mean_err = max(worst_mean_err, abs(sum(errs) / len(errs)) / rate)

        # prediction vs realized sojourn on the mobile run
        res = self.result("mobile-1ue")
        rel_errs = []
        for r in res.collector.packets:
            if r.t < 5.0 or r.predicted_sojourn is None:
                continue
            actual = r.queuing + r.scheduling
            if actual > 1e-4:
                rel_errs.append(abs(r.predicted_sojourn - actual) / actual)
        med = float(np.median(rel_errs))
        passed = worst_mean_err <= 0.05 and med <= 0.30
        return CriterionResult(
            9, "egress-rate and sojourn predictions are accurate", passed,
            f"worst |mean rate error| {worst_mean_err * 100:.2f}% (need <=5%), median sojourn "
            f"prediction error {med * 100:.1f}% (need <=30%, {len(rel_errs)} packets)",
        )

    def c10_processing_cost(self) -> CriterionResult:
        from ..ransim.layer import DrbLayer
        from ..core import Direction, EcnCodepoint, FiveTuple, Packet, Proto, TcpFields, TcpFlags

        drb = DrbConfig(ue_id=1, drb_id=1)
        layer = DrbLayer(drb, MarkParams(rng_seed=1), DEFAULT_WINDOW_SECS)
        ft = FiveTuple(1, 2, 10, 20, Proto.TCP)

        def mk_pkt(i, now):
            return Packet(pkt_id=i, five_tuple=ft, size_bytes=1500, ecn=EcnCodepoint.ECT1,
                          direction=Direction.DOWNLINK, created_at=now,
                          tcp=TcpFields(seq=i * 1460, ack_no=0, flags=TcpFlags.ACK))

        # warm the table to a realistic standing state
        now = 0.0
        sn = 0
        for i in range(2000):
            now += 0.0005
            layer.on_dl_pkt(mk_pkt(i, now), True, now)
            sn += 1
            layer.on_ran_feedback(sn, sn - 1 if sn > 1 else None, now)

        # best of three repetitions: the median within a repetition absorbs
        # scheduler noise, the best-of guards against co-tenant interference
        n = 4000
        med_dl = math.inf
        med_fb = math.inf
        pkt_base = 2000
        for _ in range(3):
            dl_times = []
            fb_times = []
            for i in range(n):
                now += 0.0005
                pkt = mk_pkt(pkt_base + i, now)
                t0 = time.perf_counter_ns()
                layer.on_dl_pkt(pkt, True, now)
                dl_times.append(time.perf_counter_ns() - t0)
                sn += 1
                t0 = time.perf_counter_ns()
                layer.on_ran_feedback(sn, sn - 1, now)
                fb_times.append(time.perf_counter_ns() - t0)
            pkt_base += n
            med_dl = min(med_dl, float(np.median(dl_times)) / 1e3)
            med_fb = min(med_fb, float(np.median(fb_times)) / 1e3)
        passed = med_dl <= 10.0 and med_fb <= 10.0
        return CriterionResult(
            10, "per-event processing cost stays micro-scale", passed,
            f"median downlink-packet handler {med_dl:.2f} us, feedback handler {med_fb:.2f} us "
            f"(need <=10 us each, best of 3 x {n} samples)",
        )

    def c11_determinism(self) -> CriterionResult:
        from ..ransim.sim import run as sim_run

        def short_run():
            scn = BUILTIN_SCENARIOS["mobile-1ue"]()
            scn.horizon_secs = 6.0
            scn.warmup_secs = 2.0
            return sim_run(scn)

        a, b = short_run(), short_run()
        same = (
            dumps_packets(a.collector.packets) == dumps_packets(b.collector.packets)
            and dumps_intervals(a.collector.intervals) == dumps_intervals(b.collector.intervals)
        )
        import json

        same_summary = json.dumps(a.summary, sort_keys=True) == json.dumps(b.summary, sort_keys=True)
        passed = same and same_summary
        return CriterionResult(
            11, "identical seeds produce byte-identical metric streams", passed,
            f"packet/interval streams {'identical' if same else 'differ'}, summaries "
            f"{'identical' if same_summary else 'differ'} ({len(a.collector.packets)} records)",
        )

    def run_all(self) -> list[CriterionResult]:
        fns = [
            self.c1_formula_oracles,
            self.c2_step_reduction,
            self.c3_l4s_latency_utilization,
            self.c4_mobile_robustness,
            self.c5_classic_non_starvation,
            self.c6_shared_drb_fairness,
            self.c7_shortcircuit_ablation,
            self.c8_slf_llf,
            self.c9_estimator_accuracy,
            self.c10_processing_cost,
            self.c11_determinism,
        ]
        results = []
        for fn in fns:
            results.append(fn())
            if self.verbose:
                r = results[-1]
                print(f"[{'PASS' if r.passed else 'FAIL'}] {r.cid}: {r.name} -- {r.detail}", flush=True)
        return results
