import fs from "node:fs";
import path from "node:path";

import { parseSamplesCsv, groupSamples, SampleRow } from "./csv.js";
import { buildCurves } from "./cdf.js";
import { renderCdfSvg } from "./svg.js";
import { computeStats, formatTable, EngineSummary } from "./table.js";

function usage(): never {
    console.error(
        "usage: node dist/cli.js --csv samples.csv [--csv more.csv] " +
        "--summary summary.json --out-svg cdf.svg --out-table gains.txt");
    process.exit(2);
}

export function main(argv: string[]): number {
    const csvPaths: string[] = [];
    let summaryPath = "";
    let outSvg = "cdf.svg";
    let outTable = "gains.txt";
    for (let i = 0; i < argv.length; i++) {
        switch (argv[i]) {
            case "--csv": csvPaths.push(argv[++i]); break;
            case "--summary": summaryPath = argv[++i]; break;
            case "--out-svg": outSvg = argv[++i]; break;
            case "--out-table": outTable = argv[++i]; break;
            default: usage();
        }
    }
    if (csvPaths.length === 0 || !summaryPath) usage();

    const rows: SampleRow[] = [];
    for (const p of csvPaths) {
        rows.push(...parseSamplesCsv(fs.readFileSync(p, "utf8")));
    }
    const groups = groupSamples(rows);
    const curves = buildCurves(groups);
    const svg = renderCdfSvg(curves, "CDF of per-AP throughput");
    fs.mkdirSync(path.dirname(path.resolve(outSvg)), { recursive: true });
    fs.writeFileSync(outSvg, svg);

    const summary = JSON.parse(fs.readFileSync(summaryPath, "utf8")) as EngineSummary;
    const table = formatTable(summary, computeStats(groups));
    fs.writeFileSync(outTable, table);
    process.stdout.write(table);
    console.log(`wrote ${outSvg} (${curves.length} curves) and ${outTable}`);
    return 0;
}

main(process.argv.slice(2));
