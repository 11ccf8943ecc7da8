/** Linear-interpolation empirical quantile, matching the engine's method. */
export function quantile(samples: readonly number[], p: number): number {
    if (samples.length === 0) throw new Error("empty sample set");
    if (p < 0 || p > 100) throw new Error(`percentile ${p} outside [0, 100]`);
    const sorted = [...samples].sort((a, b) => a - b);
    const idx = (p / 100) * (sorted.length - 1);
    const lo = Math.floor(idx);
    const hi = Math.ceil(idx);
    if (lo === hi) return sorted[lo];
    const frac = idx - lo;
    return sorted[lo] * (1 - frac) + sorted[hi] * frac;
}

/** Format to 4 significant digits (the table / consistency precision). */
export function sig4(x: number): string {
    return Number(x.toPrecision(4)).toString();
}
