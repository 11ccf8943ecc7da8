"""CSMA/CA MAC: dual-threshold clear channel assessment, DCF backoff
state, MPDU queues with block-ACK ARQ, and TXOP composition (DL MU PPDUs
plus AP-triggered UL MU PPDUs, bounded by the 4 ms TXOP budget).

MPDUs are tracked as (payload_bytes, count, retry) batches; every MPDU in
a batch shares payload size and retry count, so per-MPDU decode outcomes
reduce to one binomial draw per batch.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np


@dataclass
class CcaConfig:
    energy_threshold_dbm: float = -62.0
    preamble_threshold_dbm: float = -82.0
    preamble_min_sinr_db: float = -0.8

    def __post_init__(self):
        if not self.preamble_threshold_dbm < self.energy_threshold_dbm:
            raise ValueError("preamble threshold must lie below energy threshold")
        self.energy_mw = 10.0 ** (self.energy_threshold_dbm / 10.0)
        self.preamble_mw = 10.0 ** (self.preamble_threshold_dbm / 10.0)
        self.min_sinr_lin = 10.0 ** (self.preamble_min_sinr_db / 10.0)


def cca_verdict(rx_powers_mw, noise_mw: float, cfg: CcaConfig) -> str:
    """BUSY if aggregate energy crosses the LBT threshold, or if the
    strongest same-technology preamble is decodable (level above the
    preamble threshold and SINR against everything else above the floor).
    """
    if len(rx_powers_mw) == 0:
        return "IDLE"
    total = float(np.sum(rx_powers_mw))
    if total >= cfg.energy_mw:
        return "BUSY"
    strongest = float(np.max(rx_powers_mw))
    if strongest >= cfg.preamble_mw:
        if strongest / (total - strongest + noise_mw) >= cfg.min_sinr_lin:
            return "BUSY"
    return "IDLE"


@dataclass
class DcfState:
    """Per-AP contention state. The backoff counter only advances while the
    medium stays idle; see on_busy for the freeze arithmetic."""
    cwmin: int = 15
    cwmax: int = 1023
    slot_us: int = 9
    difs_us: int = 34
    cw: int = 15
    slots: int = 0
    counting: bool = False
    count_start: int = 0
    epoch: int = 0
    state: str = "IDLE"   # IDLE | BACKOFF | TX

    def draw_backoff(self, rng: np.random.Generator) -> None:
        self.slots = int(rng.integers(0, self.cw + 1))

    def start_count(self, now: int) -> int:
        """Medium went idle: countdown restarts after DIFS. Returns the
        absolute expiry time of the remaining backoff."""
        self.counting = True
        self.count_start = now
        self.epoch += 1
        self.state = "BACKOFF"
        return now + self.difs_us + self.slots * self.slot_us

    def on_busy(self, now: int) -> None:
        """Medium went busy: bank fully elapsed idle slots, freeze."""
        if not self.counting:
            return
        elapsed = now - (self.count_start + self.difs_us)
        if elapsed > 0:
            self.slots = max(0, self.slots - elapsed // self.slot_us)
        self.counting = False
        self.epoch += 1

    def on_success(self) -> None:
        self.cw = self.cwmin

    def on_failure(self) -> None:
        self.cw = min(2 * (self.cw + 1) - 1, self.cwmax)


# ---------------------------------------------------------------------------
# queues


class TxQueue:
    """Per-(AP, direction) FIFOs of MPDU batches, one deque per peer STA.

    Delivered bits are counted once, on acknowledged delivery at the MAC
    data SAP; failed MPDUs return head-of-line with retry+1 and drop after
    the retry limit.
    """

    def __init__(self):
        self.per_sta: dict[int, deque] = {}
        self.backlog: set[int] = set()
        self.generated_mpdus = 0
        self.generated_bits = 0
        self.delivered_mpdus = 0
        self.delivered_bits = 0
        self.dropped_mpdus = 0
        self.inflight_mpdus = 0

    def enqueue_file(self, sta: int, batches) -> None:
        q = self.per_sta.setdefault(sta, deque())
        for payload, count in batches:
            q.append([payload, count, 0])
            self.generated_mpdus += count
            self.generated_bits += payload * 8 * count
        if q:
            self.backlog.add(sta)

    def queued_mpdus(self) -> int:
        return sum(c for q in self.per_sta.values() for _, c, _ in q)

    def pull(self, sta: int, bits_budget: float, overhead_bytes: int,
             max_mpdus: int | None = None) -> list[list[int]]:
        """Dequeue head-of-line batches up to an on-air bit budget."""
        q = self.per_sta.get(sta)
        taken: list[list[int]] = []
        if not q:
            return taken
        bits_left = bits_budget
        mpdus_left = math.inf if max_mpdus is None else max_mpdus
        while q and bits_left > 0 and mpdus_left > 0:
            payload, count, retry = q[0]
            mpdu_bits = (payload + overhead_bytes) * 8
            n_fit = int(min(bits_left // mpdu_bits, count, mpdus_left))
            if n_fit <= 0:
                break
            if n_fit == count:
                q.popleft()
            else:
                q[0][1] = count - n_fit
            taken.append([payload, n_fit, retry])
            bits_left -= n_fit * mpdu_bits
            mpdus_left -= n_fit
        if not q:
            self.backlog.discard(sta)
        self.inflight_mpdus += sum(b[1] for b in taken)
        return taken

    def arq_on_ack(self, sta: int, taken: list[list[int]], successes: list[int],
                   retry_limit: int) -> tuple[int, int]:
        """Apply per-batch ACK outcomes; returns (acked MPDUs, acked payload bits)."""
        acked_mpdus = 0
        acked_bits = 0
        requeue: list[list[int]] = []
        for (payload, count, retry), n_ok in zip(taken, successes):
            n_fail = count - n_ok
            acked_mpdus += n_ok
            acked_bits += n_ok * payload * 8
            if n_fail > 0:
                if retry + 1 > retry_limit:
                    self.dropped_mpdus += n_fail
                else:
                    requeue.append([payload, n_fail, retry + 1])
        if requeue:
            q = self.per_sta.setdefault(sta, deque())
            for batch in reversed(requeue):
                q.appendleft(batch)
            self.backlog.add(sta)
        self.inflight_mpdus -= sum(b[1] for b in taken)
        self.delivered_mpdus += acked_mpdus
        self.delivered_bits += acked_bits
        return acked_mpdus, acked_bits


# ---------------------------------------------------------------------------
# TXOP composition


@dataclass
class PpduUser:
    sta_id: int
    mcs: int
    is_probe: bool
    zf_gain: float            # ZF effective power gain for the selected set
    ls_gain_lin: float        # linear large-scale gain (path loss + shadowing)
    bits_per_symbol: float
    batches: list = field(default_factory=list)
    mpdu_count: int = 0
    sinr_db: float = 0.0
    n_streams: int = 1


@dataclass
class Ppdu:
    direction: str
    duration_us: int
    preamble_us: float
    bandwidth_mhz: int
    users: list[PpduUser] = field(default_factory=list)


@dataclass
class Segment:
    kind: str                 # sound | trigger | data | ack
    start: int
    end: int
    ppdu: Ppdu | None = None
    cancelled: bool = False
    rec_id: int = -1


@dataclass
class TxopPlan:
    ap_id: int
    start: int
    end: int
    segments: list[Segment] = field(default_factory=list)
    heads: dict = field(default_factory=dict)      # direction -> head sta (RR advance)
    failed: bool = False
    serial: int = 0


@dataclass
class TxopTimings:
    txop_limit_us: int = 4000
    sifs_us: int = 16
    control_us: int = 32
    trigger_us_per_sta: float = 2.0
    preamble_us: float = 44.0
    ltf_us_per_stream: float = 8.0   # MU training fields grow with total streams
    symbol_us: float = 13.6
    mpdu_overhead_bytes: int = 40
    probe_mpdu_cap: int = 16


def _pack_data_ppdu(direction: str, users: list[PpduUser], queue: TxQueue,
                    cap_us: float, tm: TxopTimings, bandwidth_mhz: int) -> Ppdu | None:
    """Fill one MU PPDU inside cap_us; users are time-aligned (padded) to
    the slowest one. Returns None when nothing fits."""
    preamble = tm.preamble_us + tm.ltf_us_per_stream * sum(u.n_streams for u in users)
    # the -1 leaves room for the final ceil to integer microseconds
    n_sym_budget = int((cap_us - preamble - 1.0) // tm.symbol_us)
    if n_sym_budget < 1:
        return None
    n_sym = 0
    kept = []
    for u in users:
        bits_budget = n_sym_budget * u.bits_per_symbol
        cap = tm.probe_mpdu_cap if u.is_probe else None
        u.batches = queue.pull(u.sta_id, bits_budget, tm.mpdu_overhead_bytes, cap)
        u.mpdu_count = sum(b[1] for b in u.batches)
        if u.mpdu_count == 0:
            continue
        bits_taken = sum((b[0] + tm.mpdu_overhead_bytes) * 8 * b[1] for b in u.batches)
        n_sym = max(n_sym, math.ceil(bits_taken / u.bits_per_symbol))
        kept.append(u)
    if not kept:
        return None
    duration = math.ceil(preamble + n_sym * tm.symbol_us)
    return Ppdu(direction, duration, preamble, bandwidth_mhz, kept)


def build_txop(ap_id: int, now: int, tm: TxopTimings, sounding_us: float,
               direction_order: list[str], users_by_dir: dict[str, list[PpduUser]],
               queues: dict[str, TxQueue], bandwidth_mhz: int,
               serial: int = 0) -> TxopPlan:
    """Compose the TXOP segment timeline.

    Layout: [sounding] then alternating data exchanges, one per backlogged
    direction per round, each capped so concurrent directions split the
    remaining budget evenly; the sounding airtime counts against the DL
    share (it exists to serve DL MU). DL: PPDU + SIFS + MU-BAR/BA. UL:
    trigger + SIFS + PPDU + SIFS + BA. Occupancy never exceeds the limit.
    """
    plan = TxopPlan(ap_id, now, now, serial=serial)
    t = now
    limit = now + tm.txop_limit_us
    min_useful = tm.preamble_us + tm.symbol_us + 2 * tm.sifs_us + 2 * tm.control_us
    if sounding_us > 0:
        # never let the sounding exchange squeeze out the data entirely
        sounding_us = min(sounding_us,
                          tm.txop_limit_us - 8 * (min_useful + tm.sifs_us))
        end = t + math.ceil(sounding_us)
        plan.segments.append(Segment("sound", t, end))
        t = end + tm.sifs_us
    for rnd in range(4):
        dirs = [d for d in direction_order if users_by_dir.get(d)
                and any(queues[d].per_sta.get(u.sta_id) for u in users_by_dir[d])]
        if not dirs or limit - t < min_useful:
            break
        for i, d in enumerate(dirs):
            remaining = limit - t
            cap = remaining / (len(dirs) - i)
            if rnd == 0 and len(dirs) > 1 and sounding_us > 0 and i == 0:
                # bill the sounding airtime to the DL half of the budget
                if d == "DL":
                    cap = max(0.0, cap - sounding_us / 2)
                else:
                    cap = min(remaining, cap + sounding_us / 2)
            if cap < min_useful:
                continue
            template = users_by_dir[d]
            users = [PpduUser(u.sta_id, u.mcs, u.is_probe, u.zf_gain,
                              u.ls_gain_lin, u.bits_per_symbol) for u in template]
            # control overhead is symmetric: UL needs trigger + BA, DL MU
            # needs the MU-BAR + multi-STA BA exchange
            trig_us = math.ceil(tm.control_us + tm.trigger_us_per_sta * len(users))
            if d == "UL":
                data_cap = cap - trig_us - 3 * tm.sifs_us - tm.control_us
            else:
                ack_us = trig_us + tm.sifs_us + tm.control_us
                data_cap = cap - 2 * tm.sifs_us - ack_us
            ppdu = _pack_data_ppdu(d, users, queues[d], data_cap, tm, bandwidth_mhz)
            if ppdu is None:
                continue
            n_tx = len(ppdu.users)
            trig_us = math.ceil(tm.control_us + tm.trigger_us_per_sta * n_tx)
            if d == "UL":
                plan.segments.append(Segment("trigger", t, t + trig_us))
                t += trig_us + tm.sifs_us
                ack_us = tm.control_us
            else:
                ack_us = trig_us + tm.sifs_us + tm.control_us
            seg_end = t + ppdu.duration_us
            plan.segments.append(Segment("data", t, seg_end, ppdu=ppdu))
            t = seg_end + tm.sifs_us
            plan.segments.append(Segment("ack", t, t + ack_us))
            t += ack_us + tm.sifs_us
            if d not in plan.heads and users[0].mpdu_count > 0:
                plan.heads[d] = users[0].sta_id
    # trailing SIFS is not part of the occupancy
    if plan.segments:
        plan.end = plan.segments[-1].end
    assert plan.end - plan.start <= tm.txop_limit_us, "TXOP budget exceeded"
    return plan
