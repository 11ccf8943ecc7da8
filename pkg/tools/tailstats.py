import numpy as np, collections, sys
from wlansim.config import preset
from wlansim import engine

stats = collections.defaultdict(lambda: dict(air=0, mcs=[], K=[], coll=0, ppdus=0, sound=0.0, sinr=[]))
orig = engine.DropRunner._process_outcome
def patched(self, rt, plan, si, t):
    r = orig(self, rt, plan, si, t)
    seg = plan.segments[si]
    if not seg.cancelled:
        st = stats[rt.id]
        st['air'] += seg.ppdu.duration_us
        st['ppdus'] += 1
        st['K'].append(len(seg.ppdu.users))
        for u in seg.ppdu.users:
            if not u.is_probe:
                st['mcs'].append(u.mcs)
            st['sinr'].append(u.sinr_db)
    if plan.failed:
        stats[rt.id]['coll'] += 1
    return r
engine.DropRunner._process_outcome = patched
orig_txop = engine.DropRunner._start_txop

cfg = preset(sys.argv[1] if len(sys.argv) > 1 else '11ax')
cfg.engine.duration_s = 10.0; cfg.engine.warmup_s = 0.5
res = engine.run_drop(cfg, int(sys.argv[2]) if len(sys.argv) > 2 else 0)
tot = [(res.dl_mbps[a] + res.ul_mbps[a], a) for a in range(16)]
print('AP  tot(DL/UL)Mbps  air_s  K     mcs_med  sinr_p10/med  colls')
for tp, a in sorted(tot):
    st = stats[a]
    print('%2d  %4.0f(%4.0f/%4.0f)  %5.2f  %4.1f  %4.1f   %5.1f/%5.1f  %4d' % (
        a, tp, res.dl_mbps[a], res.ul_mbps[a], st['air']/1e6, np.mean(st['K']),
        np.median(st['mcs']), np.percentile(st['sinr'],10), np.median(st['sinr']), st['coll']))
