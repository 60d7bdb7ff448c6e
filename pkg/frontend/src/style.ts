/**
 * Checked-in style sheet shared by every figure.
 *
 * All rendering is driven by these constants so that identical CSV inputs
 * always produce identical SVG bytes (no timestamps, no environment
 * lookups, no randomness).
 */

export const WIDTH = 640;
export const HEIGHT = 440;

export const MARGIN = { top: 28, right: 64, bottom: 52, left: 72 };

export const FONT_FAMILY = "Helvetica, Arial, sans-serif";
export const FONT_SIZE = 13;
export const TITLE_SIZE = 15;

/** Categorical palette for multi-series panels (colorblind-safe). */
export const PALETTE = [
  "#0072b2",
  "#d55e00",
  "#009e73",
  "#cc79a7",
  "#e69f00",
  "#56b4e9",
];

export const SOLID_WIDTH = 1.8;
export const DASH_PATTERN = "6 4";
export const AXIS_COLOR = "#222222";
export const GRID_COLOR = "#dddddd";
export const DOT_RADIUS = 3.5;

/** Dual-axis panels: density in red, fidelity in black. */
export const DENSITY_COLOR = "#cc0000";
export const FIDELITY_COLOR = "#000000";
