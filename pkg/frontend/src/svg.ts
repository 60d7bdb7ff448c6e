/**
 * Deterministic SVG panel builder.
 *
 * A thin layer over d3 scales: figures declare axes and series, and the
 * builder emits a self-contained SVG string. Output depends only on the
 * input data and the checked-in style sheet.
 */

import { scaleLinear, scaleLog, type ScaleContinuousNumeric } from "d3-scale";
import { line as d3line } from "d3-shape";
import * as style from "./style.js";

export type Scale = ScaleContinuousNumeric<number, number>;
export type Pair = [number, number];

export interface AxisSpec {
  label: string;
  domain: [number, number];
  log?: boolean;
}

const fmt = (v: number): string => {
  const s = v.toFixed(2);
  return s === "-0.00" ? "0.00" : s;
};

const escapeXml = (s: string): string =>
  s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");

export function makeScale(spec: AxisSpec, range: [number, number]): Scale {
  const base = spec.log ? scaleLog() : scaleLinear();
  return base.domain(spec.domain).range(range) as Scale;
}

export class Panel {
  private readonly parts: string[] = [];
  readonly x: Scale;
  readonly y: Scale;
  readonly y2?: Scale;
  private readonly innerLeft = style.MARGIN.left;
  private readonly innerRight = style.WIDTH - style.MARGIN.right;
  private readonly innerTop = style.MARGIN.top;
  private readonly innerBottom = style.HEIGHT - style.MARGIN.bottom;

  constructor(
    readonly title: string,
    xAxis: AxisSpec,
    yAxis: AxisSpec,
    y2Axis?: AxisSpec,
  ) {
    this.x = makeScale(xAxis, [this.innerLeft, this.innerRight]);
    this.y = makeScale(yAxis, [this.innerBottom, this.innerTop]);
    if (y2Axis) {
      this.y2 = makeScale(y2Axis, [this.innerBottom, this.innerTop]);
    }
    this.frame(xAxis, yAxis, y2Axis);
  }

  private frame(xAxis: AxisSpec, yAxis: AxisSpec, y2Axis?: AxisSpec): void {
    const p = this.parts;
    p.push(
      `<rect x="${this.innerLeft}" y="${this.innerTop}" ` +
        `width="${this.innerRight - this.innerLeft}" ` +
        `height="${this.innerBottom - this.innerTop}" ` +
        `fill="none" stroke="${style.AXIS_COLOR}" stroke-width="1"/>`,
    );
    for (const t of this.ticks(this.x, xAxis)) {
      const px = fmt(this.x(t));
      p.push(
        `<line x1="${px}" y1="${this.innerBottom}" x2="${px}" ` +
          `y2="${this.innerBottom + 5}" stroke="${style.AXIS_COLOR}"/>`,
        this.text(this.x(t), this.innerBottom + 20, this.tickLabel(t, xAxis), {
          anchor: "middle",
        }),
      );
    }
    for (const t of this.ticks(this.y, yAxis)) {
      const py = fmt(this.y(t));
      p.push(
        `<line x1="${this.innerLeft - 5}" y1="${py}" ` +
          `x2="${this.innerLeft}" y2="${py}" stroke="${style.AXIS_COLOR}"/>`,
        this.text(this.innerLeft - 9, this.y(t) + 4, this.tickLabel(t, yAxis), {
          anchor: "end",
        }),
      );
    }
    if (this.y2 && y2Axis) {
      for (const t of this.ticks(this.y2, y2Axis)) {
        const py = fmt(this.y2(t));
        p.push(
          `<line x1="${this.innerRight}" y1="${py}" ` +
            `x2="${this.innerRight + 5}" y2="${py}" ` +
            `stroke="${style.DENSITY_COLOR}"/>`,
          this.text(this.innerRight + 9, this.y2(t) + 4, this.tickLabel(t, y2Axis), {
            anchor: "start",
            color: style.DENSITY_COLOR,
          }),
        );
      }
      p.push(
        this.text(
          style.WIDTH - 14,
          (this.innerTop + this.innerBottom) / 2,
          y2Axis.label,
          {
            anchor: "middle",
            rotate: 90,
            color: style.DENSITY_COLOR,
          },
        ),
      );
    }
    p.push(
      this.text(
        (this.innerLeft + this.innerRight) / 2,
        style.HEIGHT - 12,
        xAxis.label,
        { anchor: "middle" },
      ),
      this.text(18, (this.innerTop + this.innerBottom) / 2, yAxis.label, {
        anchor: "middle",
        rotate: -90,
      }),
      this.text((this.innerLeft + this.innerRight) / 2, 18, this.title, {
        anchor: "middle",
        size: style.TITLE_SIZE,
      }),
    );
  }

  private ticks(scale: Scale, spec: AxisSpec): number[] {
    const t = spec.log ? scale.ticks(5) : scale.ticks(6);
    // Log scales can produce dense minor ticks; keep decades only.
    if (spec.log) {
      const decades = t.filter((v) => {
        const m = v / Math.pow(10, Math.floor(Math.log10(v)));
        return Math.abs(m - 1) < 1e-9;
      });
      return decades.length >= 2 ? decades : t;
    }
    return t;
  }

  private tickLabel(v: number, spec: AxisSpec): string {
    if (spec.log) {
      const e = Math.log10(v);
      return Number.isInteger(e) ? `1e${e}` : v.toPrecision(2);
    }
    return scaleLinear().domain(spec.domain).tickFormat(6)(v);
  }

  private text(
    x: number,
    y: number,
    content: string,
    opts: { anchor?: string; rotate?: number; color?: string; size?: number } = {},
  ): string {
    const transform = opts.rotate
      ? ` transform="rotate(${opts.rotate} ${fmt(x)} ${fmt(y)})"`
      : "";
    return (
      `<text x="${fmt(x)}" y="${fmt(y)}" ` +
      `font-family="${style.FONT_FAMILY}" ` +
      `font-size="${opts.size ?? style.FONT_SIZE}" ` +
      `fill="${opts.color ?? style.AXIS_COLOR}" ` +
      `text-anchor="${opts.anchor ?? "start"}"${transform}>` +
      `${escapeXml(content)}</text>`
    );
  }

  private path(points: Pair[], yScale: Scale): string {
    const gen = d3line<Pair>()
      .x((d) => Number(fmt(this.x(d[0]))))
      .y((d) => Number(fmt(yScale(d[1]))))
      .defined(
        (d) =>
          Number.isFinite(this.x(d[0])) && Number.isFinite(yScale(d[1])),
      );
    return gen(points) ?? "";
  }

  line(
    points: Pair[],
    color: string,
    opts: { dashed?: boolean; axis?: "left" | "right"; width?: number } = {},
  ): void {
    const yScale = opts.axis === "right" && this.y2 ? this.y2 : this.y;
    const dash = opts.dashed ? ` stroke-dasharray="${style.DASH_PATTERN}"` : "";
    this.parts.push(
      `<path d="${this.path(points, yScale)}" fill="none" ` +
        `stroke="${color}" stroke-width="${opts.width ?? style.SOLID_WIDTH}"${dash}/>`,
    );
  }

  dots(points: Pair[], color: string, errors?: number[]): void {
    points.forEach((d, i) => {
      const cx = fmt(this.x(d[0]));
      const cy = this.y(d[1]);
      if (errors) {
        const lo = fmt(this.y(d[1] - errors[i]));
        const hi = fmt(this.y(d[1] + errors[i]));
        this.parts.push(
          `<line x1="${cx}" y1="${lo}" x2="${cx}" y2="${hi}" ` +
            `stroke="${color}" stroke-width="1.2"/>`,
        );
      }
      this.parts.push(
        `<circle cx="${cx}" cy="${fmt(cy)}" r="${style.DOT_RADIUS}" ` +
          `fill="${color}"/>`,
      );
    });
  }

  legend(entries: Array<{ label: string; color: string; dashed?: boolean }>): void {
    const x0 = this.innerRight - 150;
    entries.forEach((e, i) => {
      const y = this.innerTop + 16 + 18 * i;
      const dash = e.dashed ? ` stroke-dasharray="${style.DASH_PATTERN}"` : "";
      this.parts.push(
        `<line x1="${x0}" y1="${y}" x2="${x0 + 26}" y2="${y}" ` +
          `stroke="${e.color}" stroke-width="${style.SOLID_WIDTH}"${dash}/>`,
        this.text(x0 + 32, y + 4, e.label),
      );
    });
  }

  render(): string {
    return (
      `<svg xmlns="http://www.w3.org/2000/svg" ` +
      `width="${style.WIDTH}" height="${style.HEIGHT}" ` +
      `viewBox="0 0 ${style.WIDTH} ${style.HEIGHT}">\n` +
      `<rect width="${style.WIDTH}" height="${style.HEIGHT}" fill="#ffffff"/>\n` +
      this.parts.join("\n") +
      `\n</svg>\n`
    );
  }
}
