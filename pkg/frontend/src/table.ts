import { quantile, sig4 } from "./quantile.js";

export interface EngineSummary {
    campaigns: Record<string, Record<string, number | unknown>>;
    ratios: Record<string, number>;
}

interface Stats {
    median_dl: number;
    median_ul: number;
    p5_dl: number;
    p5_ul: number;
}

export function computeStats(groups: Map<string, Map<string, number[]>>): Map<string, Stats> {
    const out = new Map<string, Stats>();
    for (const [cfg, byDir] of groups) {
        const dl = byDir.get("DL") ?? [];
        const ul = byDir.get("UL") ?? [];
        if (dl.length === 0 || ul.length === 0) continue;
        out.set(cfg, {
            median_dl: quantile(dl, 50),
            median_ul: quantile(ul, 50),
            p5_dl: quantile(dl, 5),
            p5_ul: quantile(ul, 5),
        });
    }
    return out;
}

/**
 * Ratio table from the engine summary; values recomputed from the CSV must
 * agree to 4 significant digits, so plotting never drifts from the engine.
 */
export function formatTable(summary: EngineSummary,
                            recomputed: Map<string, Stats>): string {
    const lines: string[] = [];
    lines.push("config      median DL   median UL   5%-tile DL  5%-tile UL  [Mbps]");
    const keys: Array<[keyof Stats, string]> = [
        ["median_dl", "median_dl_mbps"], ["median_ul", "median_ul_mbps"],
        ["p5_dl", "p5_dl_mbps"], ["p5_ul", "p5_ul_mbps"]];
    for (const cfg of Object.keys(summary.campaigns).sort()) {
        const s = summary.campaigns[cfg];
        const r = recomputed.get(cfg);
        if (!r) throw new Error(`CSV carries no samples for config '${cfg}'`);
        const cells: string[] = [];
        for (const [statKey, summaryKey] of keys) {
            const fromSummary = s[summaryKey] as number;
            const fromCsv = r[statKey];
            if (sig4(fromSummary) !== sig4(fromCsv)) {
                throw new Error(
                    `${cfg} ${summaryKey}: CSV gives ${sig4(fromCsv)}, ` +
                    `summary gives ${sig4(fromSummary)}`);
            }
            cells.push(sig4(fromSummary).padStart(11));
        }
        lines.push(cfg.padEnd(10) + " " + cells.join(" "));
    }
    const ratioNames: Record<string, string> = {
        median_dl: "median DL gain", median_ul: "median UL gain",
        p5_dl: "5%-tile DL gain", p5_ul: "5%-tile UL gain",
    };
    if (Object.keys(summary.ratios).length > 0) {
        lines.push("");
        lines.push("gains 11be / 11ax:");
        for (const key of Object.keys(ratioNames)) {
            if (key in summary.ratios) {
                lines.push(`  ${ratioNames[key].padEnd(16)} ${sig4(summary.ratios[key])}x`);
            }
        }
    }
    return lines.join("\n") + "\n";
}
