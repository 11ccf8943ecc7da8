import numpy as np, time, json, sys
from wlansim.config import preset
from wlansim import engine

def main(drops=100, dur=10.0, out="/tmp/fullrun.json", **kn):
    t0 = time.time()
    res = {}
    camps = {}
    for name in ('11ax', '11be'):
        cfg = preset(name)
        for k, v in kn.items():
            grp, key = k.split('.')
            setattr(getattr(cfg, grp), key, type(getattr(getattr(cfg, grp), key))(v))
        cfg.engine.duration_s = dur; cfg.engine.warmup_s = 0.5
        cfg.engine.drops = drops; cfg.engine.jobs = 8
        camp = engine.run_campaign(cfg)
        camps[name] = camp
        s = camp.summary()
        s['uldl_wins'] = int(sum(1 for d in camp.drops if np.median(d.ul_mbps) > np.median(d.dl_mbps)))
        res[name] = s
        print(name, 'done %.0fs' % (time.time()-t0), flush=True)
    ax, be = res['11ax'], res['11be']
    out_d = dict(
        mDL=be['median_dl_mbps']/ax['median_dl_mbps'], mUL=be['median_ul_mbps']/ax['median_ul_mbps'],
        p5DL=be['p5_dl_mbps']/ax['p5_dl_mbps'], p5UL=be['p5_ul_mbps']/ax['p5_ul_mbps'],
        ax=res['11ax'], be=res['11be'],
        gap_ax=ax['median_ul_mbps']-ax['median_dl_mbps'], gap_be=be['median_ul_mbps']-be['median_dl_mbps'],
        combined=(be['median_dl_mbps']+be['median_ul_mbps'])/(ax['median_dl_mbps']+ax['median_ul_mbps']))
    json.dump(out_d, open(out, 'w'), indent=1, default=float)
    print('mDL %.3f [2.5,4.0]  mUL %.3f [2.1,3.4]  p5DL %.3f [3.3,6.0]  p5UL %.3f [1.6,2.9]' % (
        out_d['mDL'], out_d['mUL'], out_d['p5DL'], out_d['p5UL']))
    print('uldl ax %d/%d be %d/%d  gap ax %.1f be %.1f  combined %.3f' % (
        ax['uldl_wins'], drops, be['uldl_wins'], drops, out_d['gap_ax'], out_d['gap_be'], out_d['combined']))
    print('ax med %.0f/%.0f p5 %.0f/%.0f | be med %.0f/%.0f p5 %.0f/%.0f' % (
        ax['median_dl_mbps'], ax['median_ul_mbps'], ax['p5_dl_mbps'], ax['p5_ul_mbps'],
        be['median_dl_mbps'], be['median_ul_mbps'], be['p5_dl_mbps'], be['p5_ul_mbps']))

if __name__ == '__main__':
    kn = dict(a.split('=') for a in sys.argv[1:] if '=' in a)
    drops = int(kn.pop('drops', 100)); dur = float(kn.pop('dur', 10.0)); out = kn.pop('out', '/tmp/fullrun.json')
    main(drops, dur, out, **kn)
