/** DOM-free rendering helpers: probability formatting and bar glyphs for
 * relevance columns, stable result sorting, and the heatmap color ramp
 * (the same anchors the server uses for its PNG emission). */

export type Cell = string | number | null;

/** Two decimals truncated toward zero, matching the engine's tables
 * (2/3 renders as 0.66, never 0.67). */
export function formatProbability(p: number): string {
  const truncated = Math.floor(p * 100 + 1e-9) / 100;
  return truncated.toFixed(2);
}

export function probabilityBar(p: number, width = 10): string {
  const clamped = Math.min(Math.max(p, 0), 1);
  const filled = Math.round(clamped * width);
  return "█".repeat(filled) + "░".repeat(width - filled);
}

export function formatCell(value: Cell, kind: string): string {
  if (value === null || value === undefined) return "";
  if (kind === "prob" && typeof value === "number") {
    return `${formatProbability(value)} ${probabilityBar(value)}`;
  }
  return String(value);
}

/** Stable sort of result rows by one column; missing values sort last in
 * either direction, ties keep their incoming order. */
export function sortRows(
  rows: readonly Cell[][],
  columnIndex: number,
  descending: boolean,
): Cell[][] {
  const indexed = rows.map((row, i) => ({ row, i }));
  indexed.sort((a, b) => {
    const va = a.row[columnIndex];
    const vb = b.row[columnIndex];
    const ma = va === null || va === undefined;
    const mb = vb === null || vb === undefined;
    if (ma !== mb) return ma ? 1 : -1; // missing last
    let cmp = 0;
    if (!ma && !mb) {
      if (typeof va === "number" && typeof vb === "number") {
        cmp = va < vb ? -1 : va > vb ? 1 : 0;
      } else {
        cmp = String(va) < String(vb) ? -1 : String(va) > String(vb) ? 1 : 0;
      }
      if (descending) cmp = -cmp;
    }
    return cmp !== 0 ? cmp : a.i - b.i;
  });
  return indexed.map((x) => x.row);
}

/** Cap applied before rendering; the server should LIMIT anyway. */
export const MAX_RENDERED_ROWS = 1000;

const RAMP: Array<[number, [number, number, number]]> = [
  [0.0, [13, 8, 135]],
  [0.5, [38, 130, 142]],
  [1.0, [253, 231, 37]],
];

export function rampColor(value: number): string {
  const v = Math.min(Math.max(value, 0), 1);
  for (let i = 0; i + 1 < RAMP.length; i++) {
    const [t0, c0] = RAMP[i];
    const [t1, c1] = RAMP[i + 1];
    if (v <= t1) {
      const f = (v - t0) / (t1 - t0);
      const mix = c0.map((a, j) => Math.round(a + f * (c1[j] - a)));
      return `rgb(${mix[0]}, ${mix[1]}, ${mix[2]})`;
    }
  }
  const last = RAMP[RAMP.length - 1][1];
  return `rgb(${last[0]}, ${last[1]}, ${last[2]})`;
}

export interface HeatmapCell {
  row: number;
  col: number;
  rowLabel: string;
  colLabel: string;
  value: number;
  color: string;
}

/** Reorder the matrix by the server-provided display ordering and flatten
 * it into renderable cells with tooltip data. */
export function heatmapCells(
  matrix: number[][],
  ordering: number[],
  labels: string[],
): HeatmapCell[] {
  const cells: HeatmapCell[] = [];
  for (let i = 0; i < ordering.length; i++) {
    for (let j = 0; j < ordering.length; j++) {
      const a = ordering[i];
      const b = ordering[j];
      const value = matrix[a][b];
      cells.push({
        row: i,
        col: j,
        rowLabel: labels[a],
        colLabel: labels[b],
        value,
        color: rampColor(value),
      });
    }
  }
  return cells;
}

/** Caret rendering for query errors, mirroring the REPL. */
export function errorCaret(text: string, line: number | null, column: number | null): string {
  if (line === null || column === null) return "";
  const lines = text.split("\n");
  if (line < 1 || line > lines.length) return "";
  return `${lines[line - 1]}\n${" ".repeat(Math.max(column - 1, 0))}^`;
}
