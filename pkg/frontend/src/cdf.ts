export interface CdfCurve {
    label: string;          // e.g. "11ax DL"
    points: Array<[number, number]>;   // (mbps, F) non-decreasing, ends at 1
}

/** Empirical CDF steps of one sample pool. */
export function cdfPoints(samples: readonly number[]): Array<[number, number]> {
    if (samples.length === 0) throw new Error("empty sample set");
    const sorted = [...samples].sort((a, b) => a - b);
    const n = sorted.length;
    return sorted.map((x, i) => [x, (i + 1) / n] as [number, number]);
}

export function buildCurves(groups: Map<string, Map<string, number[]>>): CdfCurve[] {
    const curves: CdfCurve[] = [];
    const configs = [...groups.keys()].sort();
    for (const cfg of configs) {
        for (const dir of ["DL", "UL"]) {
            const samples = groups.get(cfg)!.get(dir);
            if (samples && samples.length > 0) {
                curves.push({ label: `${cfg} ${dir}`, points: cdfPoints(samples) });
            }
        }
    }
    return curves;
}
