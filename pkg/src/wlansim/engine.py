"""Deterministic discrete-event core.

One drop = one random realization of deployment, channels and traffic,
simulated on an integer-microsecond clock. Campaigns run seeded drops
(optionally in parallel) and pool per-AP MAC-SAP throughput samples.

Backoff is event-compressed: instead of per-slot ticks, each contending
AP carries an absolute expiry time that is recomputed at every medium
busy/idle transition, which keeps the event count proportional to the
number of transmissions rather than to elapsed slots.
"""
from __future__ import annotations

import heapq
import math
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels, channel, mac, phy, rng as rngmod, scenario, scheduler, traffic
from .config import SimConfig, validate

# event kinds; heap entries are (time, seq, kind, a, b)
EV_ARRIVAL = 0
EV_EXPIRY = 1
EV_REEVAL = 2
EV_OUTCOME = 3
EV_TXOP_END = 4

DIRS = ("DL", "UL")


class EngineInvariantError(RuntimeError):
    pass


def percentile(samples, p: float) -> float:
    """Linear-interpolation empirical quantile."""
    arr = np.asarray(samples, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("empty sample set")
    if not 0.0 <= p <= 100.0:
        raise ValueError(f"percentile {p} outside [0, 100]")
    return float(np.percentile(arr, p))


@dataclass
class DropResult:
    label: str
    drop_index: int
    seed: int
    n_aps: int
    counted_duration_s: float
    dl_mbps: list[float] = field(default_factory=list)
    ul_mbps: list[float] = field(default_factory=list)
    audits: dict = field(default_factory=dict)
    trace: list[str] = field(default_factory=list)


@dataclass
class CampaignResult:
    label: str
    base_seed: int
    drops: list[DropResult] = field(default_factory=list)

    def pooled(self, direction: str) -> np.ndarray:
        key = "dl_mbps" if direction == "DL" else "ul_mbps"
        return np.array([v for d in self.drops for v in getattr(d, key)])

    def summary(self) -> dict:
        dl, ul = self.pooled("DL"), self.pooled("UL")
        return {
            "median_dl_mbps": percentile(dl, 50), "median_ul_mbps": percentile(ul, 50),
            "p5_dl_mbps": percentile(dl, 5), "p5_ul_mbps": percentile(ul, 5),
            "mean_dl_mbps": float(dl.mean()), "mean_ul_mbps": float(ul.mean()),
            "samples_per_direction": int(dl.size),
        }


# ---------------------------------------------------------------------------
# per-drop state containers


@dataclass
class ChannelCtx:
    index: int
    ap_ids: list[int]
    sta_ids: list[int]
    member_of: dict                 # ("AP"|"STA", id) -> member index
    lin_gain: np.ndarray            # (n, n) linear gain 10^(-loss/10)
    active: dict = field(default_factory=dict)      # rec_id -> Record
    recent: list = field(default_factory=list)      # interference lookback window
    intervals: dict = field(default_factory=dict)   # rec_id -> (start, end)
    txop_intervals: list = field(default_factory=list)  # (start, end, ap)
    record_log: list = field(default_factory=list)  # (start, end, owner, rec_id, rx_at_ap)
    cancelled_ids: set = field(default_factory=set)


@dataclass
class Record:
    rec_id: int
    start: int
    end: int
    owner_ap: int
    src_idx: list[int]              # channel member indices of the transmitters
    src_mw: list[float]
    rx_at_ap: np.ndarray            # received power per channel AP (mW)


class ApRuntime:
    def __init__(self, ap_id: int, chan: ChannelCtx, sta_ids: list[int]):
        self.id = ap_id
        self.chan = chan
        self.member = chan.member_of[("AP", ap_id)]
        self.pos_in_chan = chan.ap_ids.index(ap_id)
        self.sta_ids = sta_ids
        self.local = {s: i for i, s in enumerate(sta_ids)}
        self.queues = {"DL": mac.TxQueue(), "UL": mac.TxQueue()}
        self.sched: scheduler.SchedulerState = None
        self.minstrel: dict = {}
        self.dcf: mac.DcfState = None
        self.last_sound: dict[int, float] = {}
        self.steering = None        # (n_sta, nt) geometric array response
        self.k_lin = None           # (n_sta,) Ricean K, linear
        self.ls_gain = None         # (n_sta,) linear AP<->STA large-scale gain
        self.start_dir = "DL"
        self.in_txop = False
        self.txop_serial = 0
        self.pending_plan = None
        self.fading_rng = None
        self.decode_rng = None
        self.minstrel_rng = None
        self.backoff_rng = None

    def backlog(self, direction: str) -> set[int]:
        return self.queues[direction].backlog

    def has_traffic(self) -> bool:
        return bool(self.queues["DL"].backlog or self.queues["UL"].backlog)


class DropRunner:
    """Runs one drop; strictly single-threaded, all randomness derived from
    (base seed + drop index)."""

    def __init__(self, cfg: SimConfig, drop_index: int):
        validate(cfg)
        self.cfg = cfg
        self.drop_index = drop_index
        self.seed = rngmod.drop_seed(cfg.engine.seed, drop_index)
        self.duration = int(round(cfg.engine.duration_s * 1e6))
        self.warmup = int(round(cfg.engine.warmup_s * 1e6))
        self.trace_on = cfg.engine.trace
        self.trace: list[str] = []
        self._build()

    # -- static construction -------------------------------------------------

    def _build(self):
        cfg = self.cfg
        p = cfg.phy_mac
        self.nt = cfg.ap_antennas
        self.table = phy.load_mcs_table(p.mcs_table_path)
        self.rates = self.table.rates_mbps(p.bandwidth_mhz, 1, p.guard_interval_us)
        self.bits_per_sym = self.table.bits_per_ofdm_symbol(p.bandwidth_mhz, 1)
        self.min_sinr = self.table.min_sinr_db()
        self.symbol_us = p.symbol_base_us + p.guard_interval_us
        bw_hz = p.bandwidth_mhz * 1e6
        self.noise_sta_mw = float(channel.db_to_lin(channel.noise_power(
            bw_hz, p.sta_noise_figure_db, cfg.channel.noise_psd_dbm_hz)))
        self.noise_ap_mw = float(channel.db_to_lin(channel.noise_power(
            bw_hz, p.ap_noise_figure_db, cfg.channel.noise_psd_dbm_hz)))
        self.cca = mac.CcaConfig(p.cca_energy_dbm, p.cca_preamble_dbm, p.preamble_min_sinr_db)
        self.flow = traffic.FlowConfig(cfg.traffic.file_size_bytes,
                                       cfg.traffic.offered_load_mbps * 1e6,
                                       cfg.traffic.dl_fraction,
                                       p.mpdu_payload_bytes)
        self.file_batches = traffic.file_batches(self.flow)
        self.timings = mac.TxopTimings(
            txop_limit_us=p.txop_limit_us, sifs_us=cfg.dcf.sifs_us,
            control_us=cfg.dcf.control_frame_us,
            trigger_us_per_sta=cfg.dcf.trigger_us_per_sta,
            preamble_us=p.preamble_us, ltf_us_per_stream=p.ltf_us_per_stream,
            symbol_us=self.symbol_us,
            mpdu_overhead_bytes=p.mpdu_overhead_bytes,
            probe_mpdu_cap=cfg.minstrel.probe_mpdu_cap)
        self.sound_policy = phy.SoundingPolicy(
            p.sounding_mode, cfg.sounding.ndp_ltf_us_per_stream,
            cfg.sounding.report_us_per_stream, cfg.sounding.pilot_us_per_sta)
        self.staleness_us = cfg.sounding.staleness_ms * 1e3
        self.ap_tx_mw = float(channel.db_to_lin(p.ap_max_tx_dbm))
        self.sta_tx_mw = float(channel.db_to_lin(p.sta_max_tx_dbm))
        

        # deployment and large-scale channel state
        place_rng = rngmod.stream(self.seed, rngmod.PLACEMENT)
        dep = scenario.build_deployment(cfg, place_rng)
        ap_pos = dep.ap_positions()
        sta_pos = dep.sta_positions()
        n_ap, n_sta = len(dep.aps), len(dep.stas)

        ls = rngmod.stream(self.seed, rngmod.LARGE_SCALE, 0)
        d2 = np.linalg.norm(ap_pos[:, None, :2] - sta_pos[None, :, :2], axis=2)
        d3 = np.linalg.norm(ap_pos[:, None, :] - sta_pos[None, :, :], axis=2)
        plos = channel.los_probability_array(d2)
        los = ls.random((n_ap, n_sta)) < plos
        pl = channel.path_loss_array(d3, p.carrier_ghz, los)
        sigma = np.where(los, cfg.channel.shadowing_sigma_los_db,
                         cfg.channel.shadowing_sigma_nlos_db)
        shadow = ls.standard_normal((n_ap, n_sta)) * sigma
        kf_db = ls.normal(cfg.channel.k_factor_mean_db, cfg.channel.k_factor_std_db,
                          (n_ap, n_sta))
        self.apsta_loss = pl + shadow
        self.apsta_klin = np.where(los, channel.db_to_lin(kf_db), 0.0)

        dep.association = scenario.associate(p.ap_max_tx_dbm - self.apsta_loss)
        self.dep = dep
        self.ap_of_sta = dep.association

        ls2 = rngmod.stream(self.seed, rngmod.LARGE_SCALE, 1)
        self.apap_loss = self._symmetric_loss(ap_pos, ls2, p.carrier_ghz)

        self.channels: list[ChannelCtx] = []
        n_chan = max(dep.channel_of_ap.values()) + 1
        for c in range(n_chan):
            aps_c = sorted(a for a, ch in dep.channel_of_ap.items() if ch == c)
            stas_c = sorted(s for s in range(n_sta) if dep.association[s] in aps_c)
            member_of = {}
            for i, a in enumerate(aps_c):
                member_of[("AP", a)] = i
            for i, s in enumerate(stas_c):
                member_of[("STA", s)] = len(aps_c) + i
            na = len(aps_c)
            n = na + len(stas_c)
            loss = np.zeros((n, n))
            loss[:na, :na] = self.apap_loss[np.ix_(aps_c, aps_c)]
            loss[:na, na:] = self.apsta_loss[np.ix_(aps_c, stas_c)]
            loss[na:, :na] = loss[:na, na:].T
            ls3 = rngmod.stream(self.seed, rngmod.LARGE_SCALE, 2 + c)
            if stas_c:
                loss[na:, na:] = self._symmetric_loss(sta_pos[stas_c], ls3, p.carrier_ghz)
            self.channels.append(ChannelCtx(c, aps_c, stas_c, member_of,
                                            channel.db_to_lin(-loss)))

        self.aps: list[ApRuntime] = []
        for a in range(n_ap):
            chan = self.channels[dep.channel_of_ap[a]]
            stas = dep.stas_of_ap(a)
            rt = ApRuntime(a, chan, stas)
            rt.sched = scheduler.SchedulerState(stas, cfg.scheduler.sus_epsilon,
                                                p.max_scheduled_stas)
            rt.dcf = mac.DcfState(cfg.dcf.cwmin, cfg.dcf.cwmax, cfg.dcf.slot_us,
                                  cfg.dcf.difs_us, cw=cfg.dcf.cwmin)
            if stas:
                rt.steering = channel.steering_matrix(
                    ap_pos[a], p.ap_array_rows, p.ap_array_cols,
                    p.element_spacing_wl, sta_pos[stas])
                rt.k_lin = self.apsta_klin[a, stas].copy()
                rt.ls_gain = channel.db_to_lin(-self.apsta_loss[a, stas])
            rt.last_sound = {s: -math.inf for s in stas}
            rt.fading_rng = rngmod.stream(self.seed, rngmod.FADING, a)
            rt.decode_rng = rngmod.stream(self.seed, rngmod.DECODE, a)
            rt.minstrel_rng = rngmod.stream(self.seed, rngmod.MINSTREL, a)
            rt.backoff_rng = rngmod.stream(self.seed, rngmod.BACKOFF, a)
            self.aps.append(rt)

    def _symmetric_loss(self, pos, rng, fc) -> np.ndarray:
        """Pairwise loss (PL + shadowing) among one node set; one LOS and one
        shadowing draw per link, mirrored across the diagonal."""
        cfg = self.cfg.channel
        n = len(pos)
        d2 = np.linalg.norm(pos[:, None, :2] - pos[None, :, :2], axis=2)
        d3 = np.linalg.norm(pos[:, None, :] - pos[None, :, :], axis=2)
        plos = channel.los_probability_array(d2)
        los = rng.random((n, n)) < plos
        shadow = rng.standard_normal((n, n))
        iu = np.triu_indices(n, 1)
        los.T[iu] = los[iu]
        shadow.T[iu] = shadow[iu]
        pl = channel.path_loss_array(d3, fc, los)
        sigma = np.where(los, cfg.shadowing_sigma_los_db, cfg.shadowing_sigma_nlos_db)
        out = pl + shadow * sigma
        np.fill_diagonal(out, np.inf)
        return out

    # -- event plumbing -------------------------------------------------------

    def _push(self, t: int, kind: int, a: int = 0, b: int = 0):
        heapq.heappush(self.heap, (t, next(self.seq), kind, a, b))

    def _log(self, t, device, event, chan=-1, dur=0, outcome=""):
        if self.trace_on:
            self.trace.append(f"{t}\t{device}\t{event}\t{chan}\t{dur}\t{outcome}")

    # -- CCA / contention -----------------------------------------------------

    def _cca_powers(self, rt: ApRuntime, t: int, include_same_tick: bool):
        """Received powers (mW) of foreign transmissions active at t.

        include_same_tick=False implements the slot-collision rule: a
        transmission starting exactly now cannot be carrier-sensed yet.
        """
        out = []
        for rec in rt.chan.active.values():
            if rec.owner_ap == rt.id or rec.end <= t:
                continue
            if rec.start > t or (rec.start == t and not include_same_tick):
                continue
            out.append(rec.rx_at_ap[rt.pos_in_chan])
        return out

    def _reeval_channel(self, chan: ChannelCtx, t: int):
        for a in chan.ap_ids:
            rt = self.aps[a]
            if rt.in_txop or rt.dcf.state != "BACKOFF":
                continue
            verdict = mac.cca_verdict(self._cca_powers(rt, t, True),
                                      self.noise_ap_mw, self.cca)
            if verdict == "BUSY":
                rt.dcf.on_busy(t)
            elif not rt.dcf.counting:
                expiry = rt.dcf.start_count(t)
                self._push(expiry, EV_EXPIRY, a, rt.dcf.epoch)

    def _wake_ap(self, rt: ApRuntime, t: int):
        if rt.in_txop or rt.dcf.state == "BACKOFF" or not rt.has_traffic():
            return
        if t >= self.duration:
            return
        rt.dcf.draw_backoff(rt.backoff_rng)
        rt.dcf.state = "BACKOFF"
        rt.dcf.counting = False
        verdict = mac.cca_verdict(self._cca_powers(rt, t, True),
                                  self.noise_ap_mw, self.cca)
        if verdict == "IDLE":
            expiry = rt.dcf.start_count(t)
            self._push(expiry, EV_EXPIRY, rt.id, rt.dcf.epoch)

    # -- TXOP -----------------------------------------------------------------

    def _minstrel(self, rt: ApRuntime, sta: int, direction: str) -> phy.MinstrelState:
        key = (sta, direction)
        st = rt.minstrel.get(key)
        if st is None:
            st = phy.MinstrelState(self.rates, self.cfg.minstrel.ewma_weight,
                                   self.cfg.minstrel.probe_probability)
            rt.minstrel[key] = st
        return st

    def _plan_users(self, rt: ApRuntime, direction: str, rows_by_sta: dict):
        cands = rt.sched.candidates(direction, rt.backlog(direction))
        if not cands:
            return []
        rows = np.stack([rows_by_sta[s] for s in cands])
        sel = scheduler.sus_select(rows, self.cfg.scheduler.sus_epsilon,
                                   min(self.cfg.phy_mac.max_scheduled_stas, self.nt))
        gains = None
        while sel:
            try:
                gains = phy.zf_effective_gains(rows[sel])
                break
            except phy.DegenerateSelectionError:
                sel = sel[:-1]
        if not sel:
            return []
        users = []
        for j, ci in enumerate(sel):
            sta = cands[ci]
            st = self._minstrel(rt, sta, direction)
            mcs, probe = phy.minstrel_select(st, rt.minstrel_rng)
            users.append(mac.PpduUser(
                sta_id=sta, mcs=mcs, is_probe=probe, zf_gain=float(gains[j]),
                ls_gain_lin=float(rt.ls_gain[rt.local[sta]]),
                bits_per_symbol=float(self.bits_per_sym[mcs])))
        return users

    def _start_txop(self, rt: ApRuntime, t: int):
        if not rt.has_traffic():
            rt.dcf.state = "IDLE"
            return
        locs = sorted(rt.local[s] for s in (rt.backlog("DL") | rt.backlog("UL")))
        stas = [rt.sta_ids[i] for i in locs]
        gauss = (rt.fading_rng.standard_normal((len(locs), self.nt))
                 + 1j * rt.fading_rng.standard_normal((len(locs), self.nt))) / math.sqrt(2)
        rows = _kernels.ricean_rows(rt.steering[locs], gauss, rt.k_lin[locs])
        rows_by_sta = {s: rows[i] for i, s in enumerate(stas)}

        order = [rt.start_dir, "UL" if rt.start_dir == "DL" else "DL"]
        rt.start_dir = order[1]
        users_by_dir = {}
        for d in order:
            if rt.backlog(d):
                users_by_dir[d] = self._plan_users(rt, d, rows_by_sta)

        sounding_us = 0.0
        if users_by_dir.get("DL"):
            stale = [u.sta_id for u in users_by_dir["DL"]
                     if t - rt.last_sound[u.sta_id] > self.staleness_us]
            if stale:
                # compressed feedback is a data frame from the STA: slow
                # links report at a low MCS, stretching the exchange
                snd = self.cfg.sounding
                ref = self.rates[min(snd.feedback_ref_mcs, len(self.rates) - 1)]
                scales = []
                for s in stale:
                    best = self._minstrel(rt, s, "DL").best
                    scales.append(min(snd.feedback_scale_cap,
                                      max(1.0, ref / self.rates[best])))
                sounding_us = phy.sounding_overhead_us(
                    self.sound_policy, len(stale), self.nt,
                    self.cfg.phy_mac.bandwidth_mhz, feedback_scales=scales)
                for s in stale:
                    rt.last_sound[s] = t

        rt.txop_serial += 1
        plan = mac.build_txop(rt.id, t, self.timings, sounding_us, order,
                              users_by_dir, rt.queues, self.cfg.phy_mac.bandwidth_mhz,
                              serial=rt.txop_serial)
        if not plan.segments:
            rt.dcf.state = "IDLE"
            self._wake_ap(rt, t)
            return

        rt.in_txop = True
        rt.dcf.state = "TX"
        rt.pending_plan = plan
        for d, head in plan.heads.items():
            scheduler.advance_round_robin(rt.sched, d, head)
        rt.chan.txop_intervals.append((plan.start, plan.end, rt.id))
        for si, seg in enumerate(plan.segments):
            self._commit_segment(rt, plan, si, seg)
        self._push(plan.end, EV_TXOP_END, rt.id, plan.serial)
        self._log(t, f"AP{rt.id}", "txop_start", rt.chan.index, plan.end - plan.start)

    def _commit_segment(self, rt: ApRuntime, plan: mac.TxopPlan, si: int, seg: mac.Segment):
        chan = rt.chan
        rec_id = next(self.rec_seq)
        seg.rec_id = rec_id
        if seg.kind == "data" and seg.ppdu.direction == "UL":
            src_idx = [chan.member_of[("STA", u.sta_id)] for u in seg.ppdu.users]
            src_mw = [self.sta_tx_mw] * len(src_idx)
        else:
            src_idx = [rt.member]
            src_mw = [self.ap_tx_mw]
        rx_at_ap = np.zeros(len(chan.ap_ids))
        for i, a in enumerate(chan.ap_ids):
            m = chan.member_of[("AP", a)]
            rx_at_ap[i] = float(np.dot(src_mw, chan.lin_gain[src_idx, m]))
        rec = Record(rec_id, seg.start, seg.end, rt.id, src_idx, src_mw, rx_at_ap)
        chan.active[rec_id] = rec
        chan.recent.append(rec)
        chan.intervals[rec_id] = (seg.start, seg.end)
        chan.record_log.append((seg.start, seg.end, rt.id, rec_id, rx_at_ap))
        self._push(seg.start, EV_REEVAL, chan.index)
        self._push(seg.end, EV_REEVAL, chan.index)
        if seg.kind == "data":
            self._push(seg.end, EV_OUTCOME, rt.id, plan.serial * 1000 + si)

    def _rx_at_member(self, rec: Record, chan: ChannelCtx, member: int) -> float:
        return float(np.dot(rec.src_mw, chan.lin_gain[rec.src_idx, member]))

    def _interference_mw(self, chan: ChannelCtx, seg: mac.Segment, owner: int,
                         members: list[int]) -> np.ndarray:
        """Time-averaged foreign interference over the segment, per member;
        interfering links use their average (large-scale) received power."""
        out = np.zeros(len(members))
        dur = seg.end - seg.start
        for rec in chan.recent:
            if rec.owner_ap == owner or rec.end <= seg.start or rec.start >= seg.end:
                continue
            frac = (min(rec.end, seg.end) - max(rec.start, seg.start)) / dur
            for k, m in enumerate(members):
                out[k] += frac * self._rx_at_member(rec, chan, m)
        return out

    def _process_outcome(self, rt: ApRuntime, plan: mac.TxopPlan, si: int, t: int):
        seg = plan.segments[si]
        if seg.cancelled:
            return
        ppdu = seg.ppdu
        chan = rt.chan
        d = ppdu.direction
        queue = rt.queues[d]
        if d == "DL":
            members = [chan.member_of[("STA", u.sta_id)] for u in ppdu.users]
            noise = self.noise_sta_mw
        else:
            members = [rt.member] * len(ppdu.users)
            noise = self.noise_ap_mw
        interf = self._interference_mw(chan, seg, rt.id, members)
        k_users = len(ppdu.users)
        any_ok = False
        for j, u in enumerate(ppdu.users):
            if d == "DL":
                sig_mw = (self.ap_tx_mw / k_users) * u.ls_gain_lin * u.zf_gain
            else:
                sig_mw = self.sta_tx_mw * u.ls_gain_lin * u.zf_gain
            u.sinr_db = 10.0 * math.log10(sig_mw / (noise + interf[j]))
            successes = [phy.decode_batch(cnt, u.sinr_db, float(self.min_sinr[u.mcs]),
                                          rt.decode_rng)
                         for _, cnt, _ in u.batches]
            n_ok = sum(successes)
            acked, bits = queue.arq_on_ack(u.sta_id, u.batches, successes,
                                           self.cfg.dcf.retry_limit)
            if acked:
                any_ok = True
            if self.warmup < seg.end <= self.duration:
                self.counted_bits[(rt.id, d)] += bits
            phy.minstrel_update(self._minstrel(rt, u.sta_id, d), u.mcs,
                                n_ok / max(1, u.mpdu_count))
            self._log(t, f"AP{rt.id}", f"ppdu_{d.lower()}", chan.index,
                      ppdu.duration_us,
                      f"sta{u.sta_id} mcs{u.mcs} {n_ok}/{u.mpdu_count}")
        if not any_ok:
            plan.failed = True
            self._cancel_rest(rt, plan, si, t)

    def _cancel_rest(self, rt: ApRuntime, plan: mac.TxopPlan, si: int, t: int):
        """Total PPDU loss (collision): release the rest of the TXOP."""
        chan = rt.chan
        new_end = plan.segments[si].end
        for seg in plan.segments[si + 1:]:
            if seg.cancelled:
                continue
            seg.cancelled = True
            rec = chan.active.pop(seg.rec_id, None)
            if rec is not None:
                chan.recent.remove(rec)
            chan.intervals.pop(seg.rec_id, None)
            chan.cancelled_ids.add(seg.rec_id)
            if seg.kind == "data":
                q = rt.queues[seg.ppdu.direction]
                for u in seg.ppdu.users:
                    dq = q.per_sta.setdefault(u.sta_id, deque())
                    for batch in reversed(u.batches):
                        dq.appendleft(batch)
                    q.inflight_mpdus -= u.mpdu_count
                    if u.mpdu_count:
                        q.backlog.add(u.sta_id)
        for k in range(len(chan.txop_intervals) - 1, -1, -1):
            s0, e0, a0 = chan.txop_intervals[k]
            if a0 == rt.id and s0 == plan.start:
                chan.txop_intervals[k] = (s0, new_end, a0)
                break
        plan.end = new_end
        self._push(t, EV_TXOP_END, rt.id, plan.serial)
        self._log(t, f"AP{rt.id}", "txop_abort", chan.index)

    def _end_txop(self, rt: ApRuntime, serial: int, t: int):
        plan = rt.pending_plan
        if plan is None or plan.serial != serial or not rt.in_txop:
            return
        rt.in_txop = False
        rt.pending_plan = None
        if plan.failed:
            rt.dcf.on_failure()
        else:
            rt.dcf.on_success()
        rt.dcf.state = "IDLE"
        self._wake_ap(rt, t)
        self._reeval_channel(rt.chan, t)

    # -- traffic ----------------------------------------------------------------

    def _schedule_arrival(self, sta: int, dir_idx: int, t_from: int):
        dt = traffic.next_arrival_s(self.flow, DIRS[dir_idx],
                                    self.traffic_rng[(sta, dir_idx)])
        if not math.isfinite(dt):
            return
        t = t_from + max(1, int(round(dt * 1e6)))
        if t < self.duration:
            self._push(t, EV_ARRIVAL, sta, dir_idx)

    def _handle_arrival(self, sta: int, dir_idx: int, t: int):
        rt = self.aps[self.ap_of_sta[sta]]
        rt.queues[DIRS[dir_idx]].enqueue_file(sta, self.file_batches)
        self._schedule_arrival(sta, dir_idx, t)
        self._wake_ap(rt, t)

    # -- main loop ----------------------------------------------------------------

    def run(self) -> DropResult:
        self.heap: list = []
        self.seq = iter(range(1 << 62))
        self.rec_seq = iter(range(1 << 62))
        self.counted_bits = {(a.id, d): 0 for a in self.aps for d in DIRS}
        self.traffic_rng = {}
        for sta in range(len(self.dep.stas)):
            for k in range(2):
                self.traffic_rng[(sta, k)] = rngmod.stream(
                    self.seed, rngmod.TRAFFIC, sta, k)
                self._schedule_arrival(sta, k, 0)

        last_t = 0
        while self.heap:
            t, _, kind, a, b = heapq.heappop(self.heap)
            if t < last_t:
                raise EngineInvariantError(f"time went backwards: {t} < {last_t}")
            last_t = t
            if kind == EV_ARRIVAL:
                self._handle_arrival(a, b, t)
            elif kind == EV_EXPIRY:
                rt = self.aps[a]
                if rt.dcf.epoch != b or rt.in_txop or rt.dcf.state != "BACKOFF":
                    continue
                if t >= self.duration:
                    rt.dcf.state = "IDLE"
                    continue
                # the medium stayed idle through the whole countdown; anything
                # starting at exactly t collides (slot-synchronized start)
                rt.dcf.slots = 0
                rt.dcf.counting = False
                self._start_txop(rt, t)
            elif kind == EV_REEVAL:
                chan = self.channels[a]
                self._prune(chan, t)
                self._reeval_channel(chan, t)
            elif kind == EV_OUTCOME:
                rt = self.aps[a]
                plan = rt.pending_plan
                serial, si = divmod(b, 1000)
                if plan is not None and plan.serial == serial:
                    self._process_outcome(rt, plan, si, t)
            elif kind == EV_TXOP_END:
                self._end_txop(self.aps[a], b, t)
        return self._finish()

    def _prune(self, chan: ChannelCtx, t: int):
        if len(chan.recent) > 64:
            horizon = t - 2 * self.cfg.phy_mac.txop_limit_us
            chan.recent = [r for r in chan.recent if r.end >= horizon]
        if len(chan.active) > 64:
            chan.active = {k: r for k, r in chan.active.items() if r.end > t}

    # -- results and audits ------------------------------------------------------

    def _finish(self) -> DropResult:
        cfg = self.cfg
        counted_s = (self.duration - self.warmup) / 1e6
        res = DropResult(cfg.label, self.drop_index, self.seed, len(self.aps),
                         counted_s, trace=self.trace)
        top_rate = float(self.rates[-1]) * cfg.phy_mac.max_scheduled_stas
        audits = {"mpdu_conservation": True, "airtime": True,
                  "throughput_bound": True, "mutual_exclusion": True,
                  "delivered_le_generated": True}
        for rt in self.aps:
            dl = self.counted_bits[(rt.id, "DL")] / counted_s / 1e6
            ul = self.counted_bits[(rt.id, "UL")] / counted_s / 1e6
            res.dl_mbps.append(dl)
            res.ul_mbps.append(ul)
            if dl > top_rate or ul > top_rate:
                audits["throughput_bound"] = False
            for d in DIRS:
                q = rt.queues[d]
                if q.inflight_mpdus != 0:
                    audits["mpdu_conservation"] = False
                if q.generated_mpdus != q.delivered_mpdus + q.dropped_mpdus + q.queued_mpdus():
                    audits["mpdu_conservation"] = False
                if q.delivered_bits > q.generated_bits:
                    audits["delivered_le_generated"] = False
        for chan in self.channels:
            if _union_length(chan.intervals.values(), self.duration) > self.duration:
                audits["airtime"] = False
            if not self._check_mutual_exclusion(chan):
                audits["mutual_exclusion"] = False
        res.audits = audits
        bad = [k for k, v in audits.items() if not v]
        if bad:
            raise EngineInvariantError(
                f"drop {self.drop_index} ({cfg.label}) failed audits: {bad}")
        return res

    def _check_mutual_exclusion(self, chan: ChannelCtx) -> bool:
        """A TXOP may only start while a foreign transmission is on the air
        if the owner could not energy-detect what was actually transmitting
        at that instant (hidden node), or at the exact same tick (slot
        collision). Re-checked here offline against the full record log."""
        recs = [r for r in chan.record_log if r[3] not in chan.cancelled_ids]
        for s1, _, a1 in chan.txop_intervals:
            pos = chan.ap_ids.index(a1)
            heard = 0.0
            for s0, e0, a0, _, rx_at_ap in recs:
                if a0 != a1 and s0 < s1 < e0:
                    heard += rx_at_ap[pos]
            if heard >= self.cca.energy_mw:
                return False
        return True


def _union_length(intervals, clamp: int) -> int:
    total = 0
    end_max = 0
    for s, e in sorted(intervals):
        s, e = min(s, clamp), min(e, clamp)
        if e > end_max:
            total += e - max(s, end_max)
            end_max = e
    return total


# ---------------------------------------------------------------------------
# campaigns


def run_drop(cfg: SimConfig, drop_index: int) -> DropResult:
    return DropRunner(cfg, drop_index).run()


def _drop_worker(args):
    cfg, idx = args
    return run_drop(cfg, idx)


def run_campaign(cfg: SimConfig, jobs: int | None = None) -> CampaignResult:
    """Run cfg.engine.drops seeded drops; aggregation is order-independent,
    so parallel execution reproduces the sequential result exactly."""
    validate(cfg)
    n = cfg.engine.drops
    jobs = jobs if jobs is not None else cfg.engine.jobs
    result = CampaignResult(cfg.label, cfg.engine.seed)
    if jobs <= 1 or n == 1:
        results = [run_drop(cfg, i) for i in range(n)]
    else:
        import multiprocessing as mp
        ctx = mp.get_context("spawn")
        with ProcessPoolExecutor(max_workers=min(jobs, n), mp_context=ctx) as pool:
            results = list(pool.map(_drop_worker, [(cfg, i) for i in range(n)]))
    result.drops = sorted(results, key=lambda r: r.drop_index)
    return result


# ---------------------------------------------------------------------------
# result export


def samples_csv_rows(camp: CampaignResult) -> list[str]:
    rows = ["config,drop,ap,direction,throughput_mbps"]
    for d in camp.drops:
        for ap in range(d.n_aps):
            rows.append(f"{camp.label},{d.drop_index},{ap},DL,{d.dl_mbps[ap]:.6f}")
            rows.append(f"{camp.label},{d.drop_index},{ap},UL,{d.ul_mbps[ap]:.6f}")
    return rows


def write_samples_csv(camp: CampaignResult, path: str) -> None:
    with open(path, "w") as fh:
        fh.write("\n".join(samples_csv_rows(camp)) + "\n")


def build_summary(campaigns: dict[str, CampaignResult], configs: dict[str, SimConfig],
                  version: str) -> dict:
    out = {"generated_by": "wlansim", "version": version, "campaigns": {}, "ratios": {}}
    for label, camp in campaigns.items():
        s = camp.summary()
        s["drops"] = len(camp.drops)
        s["base_seed"] = camp.base_seed
        s["config"] = configs[label].to_dict()
        out["campaigns"][label] = s
    if "11ax" in campaigns and "11be" in campaigns:
        ax, be = out["campaigns"]["11ax"], out["campaigns"]["11be"]
        for key, name in (("median_dl_mbps", "median_dl"), ("median_ul_mbps", "median_ul"),
                          ("p5_dl_mbps", "p5_dl"), ("p5_ul_mbps", "p5_ul")):
            if ax[key] > 0:
                out["ratios"][name] = be[key] / ax[key]
    return out
