/**
 * The eight figure layouts.
 *
 * Each layout reads the CSV files written by the calculator CLI for the
 * figure of the same name and returns a complete SVG string. Layouts only
 * restyle data; they never recompute any physics.
 */

import { column, loadTable, series } from "./csv.js";
import { Panel, type Pair } from "./svg.js";
import * as style from "./style.js";

export type FigureBuilder = (dataDir: string) => string;

function extent(values: number[], pad = 0.04): [number, number] {
  const lo = Math.min(...values);
  const hi = Math.max(...values);
  const span = hi - lo || Math.abs(hi) || 1;
  return [lo - pad * span, hi + pad * span];
}

function fig2a(dir: string): string {
  const labels = ["1GHz", "2GHz", "5GHz", "10GHz", "20GHz"];
  const toPs = (pts: Pair[]): Pair[] => pts.map(([x, y]) => [x * 1e12, y]);
  const curves = labels.map((label) => ({
    label,
    corrected: toPs(series(loadTable(dir, `corrected_${label}.csv`), "sigma_s", "fidelity")),
    uncorrected: toPs(series(loadTable(dir, `uncorrected_${label}.csv`), "sigma_s", "fidelity")),
  }));
  const ys = curves.flatMap((c) => c.corrected.concat(c.uncorrected).map((d) => d[1]));
  const panel = new Panel(
    "Time-averaged fidelity vs detector resolution",
    { label: "detector resolution sigma (ps)", domain: [0, 100] },
    { label: "average W-state fidelity", domain: extent(ys) },
  );
  curves.forEach((c, i) => {
    const color = style.PALETTE[i % style.PALETTE.length];
    panel.line(c.corrected, color);
    panel.line(c.uncorrected, color, { dashed: true });
  });
  panel.legend(curves.map((c, i) => ({
    label: `splitting ${c.label}`,
    color: style.PALETTE[i % style.PALETTE.length],
  })));
  return panel.render();
}

function fig2b(dir: string): string {
  const ratios = ["0.6", "0.8", "1", "1.2", "1.4"];
  const pdfs = ratios.map((r) => series(loadTable(dir, `pdf_${r}.csv`), "t", "pdf"));
  const fid = series(loadTable(dir, "fidelity.csv"), "t", "fidelity");
  const panel = new Panel(
    "Detection-time profile with mismatched linewidths",
    { label: "detection time (1/Gamma_0)", domain: extent(fid.map((d) => d[0]), 0) },
    { label: "heralded fidelity", domain: extent(fid.map((d) => d[1])) },
    {
      label: "click probability density",
      domain: [0, Math.max(...pdfs.flat().map((d) => d[1])) * 1.05],
    },
  );
  for (const pdf of pdfs) {
    panel.line(pdf, style.DENSITY_COLOR, { axis: "right", width: 1.2 });
  }
  panel.line(fid, style.FIDELITY_COLOR);
  panel.legend([
    { label: "fidelity", color: style.FIDELITY_COLOR },
    { label: "click density", color: style.DENSITY_COLOR },
  ]);
  return panel.render();
}

function fig3a(dir: string): string {
  const solid = series(loadTable(dir, "corrected.csv"), "eta", "F_GHZ");
  const dashed = series(loadTable(dir, "uncorrected.csv"), "eta", "F_GHZ");
  const mc = loadTable(dir, "mc.csv");
  const dots = series(mc, "eta", "F_GHZ");
  const errs = column(mc, "F_err");
  const ys = solid.concat(dashed, dots).map((d) => d[1]);
  const panel = new Panel(
    "GHZ fidelity vs capture efficiency",
    { label: "capture efficiency eta", domain: [0.2, 1.0] },
    { label: "3-photon GHZ fidelity", domain: extent(ys) },
  );
  panel.line(solid, style.PALETTE[0]);
  panel.line(dashed, style.PALETTE[0], { dashed: true });
  panel.dots(dots, style.PALETTE[1], errs);
  panel.legend([
    { label: "time-resolved", color: style.PALETTE[0] },
    { label: "unresolved", color: style.PALETTE[0], dashed: true },
    { label: "trajectories", color: style.PALETTE[1] },
  ]);
  return panel.render();
}

function fig3b(dir: string): string {
  const pGhz = series(loadTable(dir, "p_ghz.csv"), "p", "P_GHZ");
  const attempts = series(loadTable(dir, "attempts.csv"), "p", "N_W");
  const panel = new Panel(
    "Heralding statistics vs pump parameter",
    { label: "pump parameter p", domain: extent(pGhz.map((d) => d[0]), 0) },
    { label: "P(GHZ | herald)", domain: extent(pGhz.map((d) => d[1])) },
    { label: "expected attempts N_W", domain: extent(attempts.map((d) => d[1])) },
  );
  panel.line(pGhz, style.PALETTE[0]);
  panel.line(attempts, style.DENSITY_COLOR, { axis: "right" });
  panel.legend([
    { label: "success probability", color: style.PALETTE[0] },
    { label: "attempts", color: style.DENSITY_COLOR },
  ]);
  return panel.render();
}

function siLosses(dir: string): string {
  const etas = ["0.9", "0.5"];
  const kinds = ["pnrd", "threshold"] as const;
  const ns = [1, 2, 3];
  const curves: Array<{ pts: Pair[]; color: string; dashed: boolean; label?: string }> = [];
  etas.forEach((eta, ei) => {
    for (const kind of kinds) {
      ns.forEach((n, ni) => {
        const table = loadTable(dir, `eta${eta}_${kind}_n${n}.csv`);
        // fidelity against success probability; p varies along the curve
        const pts: Pair[] = column(table, "P_W").map((pw, i) => [
          pw,
          column(table, "F_W")[i],
        ]);
        curves.push({
          pts,
          color: style.PALETTE[(3 * ei + ni) % style.PALETTE.length],
          dashed: kind === "threshold",
          label: kind === "pnrd" ? `eta=${eta}, n=${n}` : undefined,
        });
      });
    }
  });
  const all = curves.flatMap((c) => c.pts);
  const panel = new Panel(
    "W-state fidelity vs success probability",
    { label: "success probability P_W", domain: extent(all.map((d) => d[0]), 0) },
    { label: "W-state fidelity", domain: extent(all.map((d) => d[1])) },
  );
  for (const c of curves) {
    panel.line(c.pts, c.color, { dashed: c.dashed });
  }
  panel.legend(
    curves.filter((c) => c.label).map((c) => ({ label: c.label!, color: c.color })),
  );
  return panel.render();
}

function siThresholdTime(dir: string): string {
  const fid = series(loadTable(dir, "fidelity.csv"), "t", "F_W");
  const pdf = series(loadTable(dir, "pdf.csv"), "t", "pdf");
  const flat = series(loadTable(dir, "indistinguishable.csv"), "t", "F_W");
  const panel = new Panel(
    "Time-resolved threshold detection",
    { label: "detection time (1/Gamma)", domain: extent(fid.map((d) => d[0]), 0) },
    { label: "W-state fidelity", domain: [0, 1.02] },
    { label: "click probability density", domain: extent(pdf.map((d) => d[1]), 0) },
  );
  panel.line(pdf, style.PALETTE[0], { axis: "right" });
  panel.line(fid, style.DENSITY_COLOR);
  panel.line(flat, style.FIDELITY_COLOR, { dashed: true });
  panel.legend([
    { label: "F_W(t)", color: style.DENSITY_COLOR },
    { label: "click density", color: style.PALETTE[0] },
    { label: "no time resolution", color: style.FIDELITY_COLOR, dashed: true },
  ]);
  return panel.render();
}

function siKeyrate(dir: string, title: string): string {
  const dList = [2, 3, 4, 5];
  const curves = dList.map((d) => {
    const pts = series(loadTable(dir, `rate_d${d}.csv`), "eta2", "RK_over_Rpi");
    return { d, pts: pts.filter(([, y]) => y > 0) };
  });
  const ys = curves.flatMap((c) => c.pts.map((d) => d[1]));
  const lo = Math.min(...ys);
  const hi = Math.max(...ys);
  const panel = new Panel(
    title,
    { label: "transmission efficiency eta_2", domain: [0, 1] },
    {
      label: "secret key rate per pump pulse",
      domain: [Math.pow(10, Math.floor(Math.log10(lo))), hi * 1.5],
      log: true,
    },
  );
  curves.forEach((c, i) => {
    panel.line(c.pts, style.PALETTE[i % style.PALETTE.length]);
  });
  panel.legend(curves.map((c, i) => ({
    label: `d = ${c.d}`,
    color: style.PALETTE[i % style.PALETTE.length],
  })));
  return panel.render();
}

export const FIGURES: Record<string, FigureBuilder> = {
  fig2a,
  fig2b,
  fig3a,
  fig3b,
  "si-losses": siLosses,
  "si-threshold-time": siThresholdTime,
  "si-keyrate-a": (dir) => siKeyrate(dir, "Key rate vs transmission (no dephasing)"),
  "si-keyrate-b": (dir) => siKeyrate(dir, "Key rate vs transmission (gamma = 0.01)"),
};

export function renderFigure(name: string, dataDir: string): string {
  const builder = FIGURES[name];
  if (!builder) {
    throw new Error(
      `unknown figure '${name}' (expected one of ${Object.keys(FIGURES).sort().join(", ")})`,
    );
  }
  return builder(dataDir);
}
