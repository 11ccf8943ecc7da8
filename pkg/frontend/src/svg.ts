import { CdfCurve } from "./cdf.js";

const COLORS = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"];
const W = 760;
const H = 520;
const M = { left: 70, right: 180, top: 30, bottom: 55 };

function niceMax(x: number): number {
    const mag = Math.pow(10, Math.floor(Math.log10(x)));
    return Math.ceil(x / mag) * mag;
}

/** Render CDF curves as a standalone SVG document. */
export function renderCdfSvg(curves: CdfCurve[], title: string): string {
    if (curves.length === 0) throw new Error("nothing to plot");
    const xMax = niceMax(Math.max(...curves.map((c) => c.points[c.points.length - 1][0])));
    const plotW = W - M.left - M.right;
    const plotH = H - M.top - M.bottom;
    const sx = (x: number) => M.left + (x / xMax) * plotW;
    const sy = (f: number) => M.top + (1 - f) * plotH;

    const parts: string[] = [];
    parts.push(`<svg xmlns="http://www.w3.org/2000/svg" width="${W}" height="${H}" viewBox="0 0 ${W} ${H}">`);
    parts.push(`<rect width="${W}" height="${H}" fill="white"/>`);
    parts.push(`<text x="${M.left + plotW / 2}" y="18" text-anchor="middle" font-size="15" font-family="sans-serif">${title}</text>`);
    // axes and grid
    for (let i = 0; i <= 5; i++) {
        const f = i / 5;
        const y = sy(f);
        parts.push(`<line x1="${M.left}" y1="${y}" x2="${M.left + plotW}" y2="${y}" stroke="#ddd"/>`);
        parts.push(`<text x="${M.left - 8}" y="${y + 4}" text-anchor="end" font-size="11" font-family="sans-serif">${f.toFixed(1)}</text>`);
        const x = M.left + f * plotW;
        parts.push(`<line x1="${x}" y1="${M.top}" x2="${x}" y2="${M.top + plotH}" stroke="#eee"/>`);
        parts.push(`<text x="${x}" y="${M.top + plotH + 18}" text-anchor="middle" font-size="11" font-family="sans-serif">${Math.round(f * xMax)}</text>`);
    }
    parts.push(`<rect x="${M.left}" y="${M.top}" width="${plotW}" height="${plotH}" fill="none" stroke="#444"/>`);
    parts.push(`<text x="${M.left + plotW / 2}" y="${H - 14}" text-anchor="middle" font-size="13" font-family="sans-serif">Per-AP throughput [Mbps]</text>`);
    parts.push(`<text x="20" y="${M.top + plotH / 2}" text-anchor="middle" font-size="13" font-family="sans-serif" transform="rotate(-90 20 ${M.top + plotH / 2})">CDF</text>`);

    curves.forEach((curve, k) => {
        const color = COLORS[k % COLORS.length];
        const dash = curve.label.endsWith("UL") ? "" : ` stroke-dasharray="6 3"`;
        let d = `M ${sx(0)} ${sy(0)}`;
        let prevF = 0;
        for (const [x, f] of curve.points) {
            d += ` L ${sx(x).toFixed(2)} ${sy(prevF).toFixed(2)} L ${sx(x).toFixed(2)} ${sy(f).toFixed(2)}`;
            prevF = f;
        }
        d += ` L ${sx(xMax).toFixed(2)} ${sy(1).toFixed(2)}`;
        parts.push(`<path d="${d}" fill="none" stroke="${color}" stroke-width="1.8"${dash}/>`);
        const ly = M.top + 16 + k * 20;
        parts.push(`<line x1="${M.left + plotW + 12}" y1="${ly - 4}" x2="${M.left + plotW + 40}" y2="${ly - 4}" stroke="${color}" stroke-width="2"${dash}/>`);
        parts.push(`<text x="${M.left + plotW + 46}" y="${ly}" font-size="12" font-family="sans-serif">${curve.label}</text>`);
    });
    parts.push("</svg>");
    return parts.join("\n");
}
