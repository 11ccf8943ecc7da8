import numpy as np, time, sys
from wlansim.config import preset
from wlansim import engine

def sweep(ltf, trig, rep, drops=8, dur=2.0):
    res = {}
    for name in ('11ax', '11be'):
        cfg = preset(name)
        cfg.phy_mac.ltf_us_per_stream = ltf
        cfg.dcf.trigger_us_per_sta = trig
        cfg.sounding.report_us_per_stream = rep
        cfg.engine.duration_s = dur; cfg.engine.warmup_s = 0.5
        cfg.engine.drops = drops; cfg.engine.jobs = 8
        camp = engine.run_campaign(cfg)
        s = camp.summary()
        s['uldl'] = sum(1 for d in camp.drops if np.median(d.ul_mbps) > np.median(d.dl_mbps))
        res[name] = s
    ax, be = res['11ax'], res['11be']
    print('ltf=%g trig=%g rep=%g | ax med %.0f/%.0f p5 %.0f/%.0f | axUL>DL %d/%d beUL>DL %d/%d | mDL %.2f mUL %.2f p5DL %.2f p5UL %.2f' % (
        ltf, trig, rep, ax['median_dl_mbps'], ax['median_ul_mbps'], ax['p5_dl_mbps'], ax['p5_ul_mbps'],
        ax['uldl'], drops, be['uldl'], drops,
        be['median_dl_mbps']/ax['median_dl_mbps'], be['median_ul_mbps']/ax['median_ul_mbps'],
        be['p5_dl_mbps']/ax['p5_dl_mbps'], be['p5_ul_mbps']/ax['p5_ul_mbps']), flush=True)

if __name__ == '__main__':
    t0 = time.time()
    for args in [tuple(float(x) for x in a.split(',')) for a in sys.argv[1:]]:
        sweep(*args)
    print('total %.0fs' % (time.time() - t0))
