export interface SampleRow {
    config: string;
    drop: number;
    ap: number;
    direction: "DL" | "UL";
    mbps: number;
}

const REQUIRED = ["config", "drop", "ap", "direction", "throughput_mbps"];

/** Parse a samples CSV produced by the simulator. */
export function parseSamplesCsv(text: string): SampleRow[] {
    const lines = text.trim().split(/\r?\n/).filter((l) => l.length > 0);
    if (lines.length === 0) throw new Error("empty CSV");
    const header = lines[0].split(",").map((h) => h.trim());
    for (const col of REQUIRED) {
        if (!header.includes(col)) throw new Error(`missing column '${col}'`);
    }
    const idx = Object.fromEntries(REQUIRED.map((c) => [c, header.indexOf(c)]));
    if (lines.length === 1) throw new Error("CSV has a header but no samples");
    return lines.slice(1).map((line, i) => {
        const parts = line.split(",");
        const direction = parts[idx.direction].trim();
        if (direction !== "DL" && direction !== "UL") {
            throw new Error(`row ${i + 2}: bad direction '${direction}'`);
        }
        const mbps = Number(parts[idx.throughput_mbps]);
        if (!Number.isFinite(mbps)) {
            throw new Error(`row ${i + 2}: bad throughput`);
        }
        return {
            config: parts[idx.config].trim(),
            drop: Number(parts[idx.drop]),
            ap: Number(parts[idx.ap]),
            direction,
            mbps,
        };
    });
}

/** Pool throughput samples per (config, direction). */
export function groupSamples(rows: SampleRow[]): Map<string, Map<string, number[]>> {
    const out = new Map<string, Map<string, number[]>>();
    for (const r of rows) {
        if (!out.has(r.config)) out.set(r.config, new Map());
        const byDir = out.get(r.config)!;
        if (!byDir.has(r.direction)) byDir.set(r.direction, []);
        byDir.get(r.direction)!.push(r.mbps);
    }
    return out;
}
