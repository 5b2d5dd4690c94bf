// Minimal hand-rolled SVG chart builder: axes, polylines, points, error
// bars and shaded bands. No DOM, just strings.

export interface ChartOptions {
  width?: number;
  height?: number;
  title?: string;
  xLabel?: string;
  yLabel?: string;
  xLog?: boolean;
  yLog?: boolean;
}

export interface SeriesStyle {
  color?: string;
  width?: number;
  dash?: string;
  opacity?: number;
  label?: string;
}

const MARGIN = { top: 42, right: 24, bottom: 46, left: 64 };
const PALETTE = ["#2563eb", "#dc2626", "#059669", "#d97706", "#7c3aed", "#0891b2"];

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function niceTicks(lo: number, hi: number, n = 5): number[] {
  if (!(hi > lo)) return [lo];
  const span = hi - lo;
  const step = Math.pow(10, Math.floor(Math.log10(span / n)));
  const scaled = span / n / step;
  const mult = scaled >= 5 ? 10 : scaled >= 2 ? 5 : scaled >= 1 ? 2 : 1;
  const tick = mult * step;
  const start = Math.ceil(lo / tick) * tick;
  const ticks: number[] = [];
  for (let v = start; v <= hi + 1e-12 * span; v += tick) ticks.push(v);
  return ticks;
}

function fmt(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(1);
  return Number(v.toPrecision(4)).toString();
}

export class Chart {
  private opts: Required<Pick<ChartOptions, "width" | "height">> & ChartOptions;
  private xs: number[] = [];
  private ys: number[] = [];
  private body: string[] = [];
  private legends: { label: string; color: string }[] = [];
  private colorIndex = 0;

  constructor(opts: ChartOptions = {}) {
    this.opts = { width: 720, height: 440, ...opts };
  }

  nextColor(): string {
    return PALETTE[this.colorIndex++ % PALETTE.length];
  }

  private track(xs: number[], ys: number[]): void {
    for (const x of xs) if (Number.isFinite(this.tx(x))) this.xs.push(this.tx(x));
    for (const y of ys) if (Number.isFinite(this.ty(y))) this.ys.push(this.ty(y));
  }

  private tx(x: number): number {
    return this.opts.xLog ? Math.log10(x) : x;
  }

  private ty(y: number): number {
    return this.opts.yLog ? Math.log10(y) : y;
  }

  line(xs: number[], ys: number[], style: SeriesStyle = {}): this {
    this.track(xs, ys);
    const color = style.color ?? this.nextColor();
    if (style.label) this.legends.push({ label: style.label, color });
    this.body.push(
      JSON.stringify({ kind: "line", xs, ys, color, width: style.width ?? 2, dash: style.dash, opacity: style.opacity })
    );
    return this;
  }

  points(xs: number[], ys: number[], style: SeriesStyle = {}): this {
    this.track(xs, ys);
    const color = style.color ?? this.nextColor();
    if (style.label) this.legends.push({ label: style.label, color });
    this.body.push(JSON.stringify({ kind: "points", xs, ys, color, width: style.width ?? 4 }));
    return this;
  }

  errorBars(xs: number[], ys: number[], es: number[], style: SeriesStyle = {}): this {
    const color = style.color ?? "#111827";
    this.track(xs, ys.map((y, i) => y + es[i]));
    this.track(xs, ys.map((y, i) => y - es[i]));
    this.body.push(JSON.stringify({ kind: "bars", xs, ys, es, color }));
    return this;
  }

  band(xs: number[], lower: number[], upper: number[], style: SeriesStyle = {}): this {
    this.track(xs, lower);
    this.track(xs, upper);
    this.body.push(
      JSON.stringify({ kind: "band", xs, lower, upper, color: style.color ?? "#93c5fd", opacity: style.opacity ?? 0.35 })
    );
    return this;
  }

  render(): string {
    const { width, height } = this.opts;
    const innerW = width - MARGIN.left - MARGIN.right;
    const innerH = height - MARGIN.top - MARGIN.bottom;
    let xLo = Math.min(...this.xs);
    let xHi = Math.max(...this.xs);
    let yLo = Math.min(...this.ys);
    let yHi = Math.max(...this.ys);
    if (!Number.isFinite(xLo)) [xLo, xHi] = [0, 1];
    if (!Number.isFinite(yLo)) [yLo, yHi] = [0, 1];
    if (xHi === xLo) [xLo, xHi] = [xLo - 1, xHi + 1];
    if (yHi === yLo) [yLo, yHi] = [yLo - Math.abs(yLo) * 0.5 - 1, yHi + Math.abs(yHi) * 0.5 + 1];
    const padY = 0.06 * (yHi - yLo);
    yLo -= padY;
    yHi += padY;
    const padX = 0.04 * (xHi - xLo);
    xLo -= padX;
    xHi += padX;

    const px = (x: number) => MARGIN.left + ((this.tx(x) - xLo) / (xHi - xLo)) * innerW;
    const py = (y: number) => MARGIN.top + innerH - ((this.ty(y) - yLo) / (yHi - yLo)) * innerH;

    const parts: string[] = [];
    parts.push(
      `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif">`
    );
    parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);

    // axes + grid
    const xTicks = niceTicks(xLo, xHi);
    const yTicks = niceTicks(yLo, yHi);
    for (const t of xTicks) {
      const sx = MARGIN.left + ((t - xLo) / (xHi - xLo)) * innerW;
      parts.push(`<line x1="${sx}" y1="${MARGIN.top}" x2="${sx}" y2="${MARGIN.top + innerH}" stroke="#e5e7eb"/>`);
      const label = this.opts.xLog ? `1e${fmt(t)}` : fmt(t);
      parts.push(
        `<text x="${sx}" y="${MARGIN.top + innerH + 18}" text-anchor="middle" font-size="11" fill="#374151">${label}</text>`
      );
    }
    for (const t of yTicks) {
      const sy = MARGIN.top + innerH - ((t - yLo) / (yHi - yLo)) * innerH;
      parts.push(`<line x1="${MARGIN.left}" y1="${sy}" x2="${MARGIN.left + innerW}" y2="${sy}" stroke="#e5e7eb"/>`);
      const label = this.opts.yLog ? `1e${fmt(t)}` : fmt(t);
      parts.push(
        `<text x="${MARGIN.left - 8}" y="${sy + 4}" text-anchor="end" font-size="11" fill="#374151">${label}</text>`
      );
    }
    parts.push(
      `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${innerW}" height="${innerH}" fill="none" stroke="#6b7280"/>`
    );

    // plotted elements
    for (const raw of this.body) {
      const el = JSON.parse(raw);
      if (el.kind === "band") {
        const up = el.xs.map((x: number, i: number) => `${px(x)},${py(el.upper[i])}`);
        const dn = el.xs
          .map((x: number, i: number) => `${px(x)},${py(el.lower[i])}`)
          .reverse();
        parts.push(
          `<polygon points="${[...up, ...dn].join(" ")}" fill="${el.color}" opacity="${el.opacity}"/>`
        );
      } else if (el.kind === "line") {
        const pts = el.xs.map((x: number, i: number) => `${px(x)},${py(el.ys[i])}`).join(" ");
        const dash = el.dash ? ` stroke-dasharray="${el.dash}"` : "";
        const opacity = el.opacity !== undefined ? ` opacity="${el.opacity}"` : "";
        parts.push(
          `<polyline points="${pts}" fill="none" stroke="${el.color}" stroke-width="${el.width}"${dash}${opacity}/>`
        );
      } else if (el.kind === "points") {
        for (let i = 0; i < el.xs.length; i++) {
          parts.push(
            `<circle cx="${px(el.xs[i])}" cy="${py(el.ys[i])}" r="${el.width}" fill="${el.color}"/>`
          );
        }
      } else if (el.kind === "bars") {
        for (let i = 0; i < el.xs.length; i++) {
          const sx = px(el.xs[i]);
          const y1 = py(el.ys[i] - el.es[i]);
          const y2 = py(el.ys[i] + el.es[i]);
          parts.push(`<line x1="${sx}" y1="${y1}" x2="${sx}" y2="${y2}" stroke="${el.color}" stroke-width="1.5"/>`);
          parts.push(`<line x1="${sx - 4}" y1="${y1}" x2="${sx + 4}" y2="${y1}" stroke="${el.color}" stroke-width="1.5"/>`);
          parts.push(`<line x1="${sx - 4}" y1="${y2}" x2="${sx + 4}" y2="${y2}" stroke="${el.color}" stroke-width="1.5"/>`);
        }
      }
    }

    // labels + legend
    if (this.opts.title) {
      parts.push(
        `<text x="${width / 2}" y="24" text-anchor="middle" font-size="15" font-weight="bold" fill="#111827">${esc(this.opts.title)}</text>`
      );
    }
    if (this.opts.xLabel) {
      parts.push(
        `<text x="${MARGIN.left + innerW / 2}" y="${height - 10}" text-anchor="middle" font-size="12" fill="#111827">${esc(this.opts.xLabel)}</text>`
      );
    }
    if (this.opts.yLabel) {
      parts.push(
        `<text x="16" y="${MARGIN.top + innerH / 2}" text-anchor="middle" font-size="12" fill="#111827" transform="rotate(-90 16 ${MARGIN.top + innerH / 2})">${esc(this.opts.yLabel)}</text>`
      );
    }
    this.legends.forEach((entry, i) => {
      const ly = MARGIN.top + 14 + i * 18;
      const lx = MARGIN.left + innerW - 160;
      parts.push(`<line x1="${lx}" y1="${ly - 4}" x2="${lx + 22}" y2="${ly - 4}" stroke="${entry.color}" stroke-width="3"/>`);
      parts.push(`<text x="${lx + 28}" y="${ly}" font-size="11" fill="#111827">${esc(entry.label)}</text>`);
    });

    parts.push("</svg>");
    return parts.join("\n");
  }
}
