/**
 * Pure view renderers: payload in, markup string out.
 *
 * Keeping these DOM-free makes them testable against recorded payloads;
 * app.ts assigns the output to innerHTML and attaches delegated handlers.
 */

import type { ReportPayload, TablePayload } from "./api.js";

function esc(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderTable(payload: TablePayload): string {
  if (!payload.columns.length) {
    return `<pre class="message">${esc(payload.message ?? "")}</pre>`;
  }
  const head = payload.columns.map((c) => `<th>${esc(c)}</th>`).join("");
  const body = payload.rows
    .map((row) => {
      const cells = payload.columns
        .map((c) => `<td data-col="${esc(c)}">${esc(row[c] ?? "")}</td>`)
        .join("");
      const id = row["id"] !== undefined ? ` data-id="${esc(row["id"])}"` : "";
      return `<tr${id}>${cells}</tr>`;
    })
    .join("");
  const note = payload.message ? `<pre class="message">${esc(payload.message)}</pre>` : "";
  return `<table><thead><tr>${head}</tr></thead><tbody>${body}</tbody></table>${note}`;
}

export interface ParetoPoint {
  id: string;
  size: number;
  value: number;
  label: string;
}

export function paretoPoints(payload: TablePayload, by: "fitness" | "dl"): ParetoPoint[] {
  return payload.rows.map((row) => ({
    id: row["id"],
    size: Number(row["size"]),
    value: Number(row[by]),
    label: row["expression"],
  }));
}

/** SVG scatter of the front: one circle per payload row, no more, no less. */
export function renderParetoSvg(points: ParetoPoint[], width = 480, height = 280): string {
  const pad = 36;
  if (points.length === 0) {
    return `<svg width="${width}" height="${height}"><text x="${width / 2}" y="${height / 2}" text-anchor="middle">no front</text></svg>`;
  }
  const xs = points.map((p) => p.size);
  const ys = points.map((p) => p.value);
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs);
  const yMin = Math.min(...ys);
  const yMax = Math.max(...ys);
  const sx = (v: number) =>
    xMax === xMin ? width / 2 : pad + ((v - xMin) / (xMax - xMin)) * (width - 2 * pad);
  const sy = (v: number) =>
    yMax === yMin ? height / 2 : height - pad - ((v - yMin) / (yMax - yMin)) * (height - 2 * pad);
  const circles = points
    .map(
      (p) =>
        `<circle data-id="${esc(p.id)}" cx="${sx(p.size).toFixed(1)}" cy="${sy(p.value).toFixed(1)}" r="5"><title>${esc(p.label)}</title></circle>`
    )
    .join("");
  const path = points
    .map((p, i) => `${i === 0 ? "M" : "L"}${sx(p.size).toFixed(1)},${sy(p.value).toFixed(1)}`)
    .join(" ");
  return `<svg width="${width}" height="${height}" viewBox="0 0 ${width} ${height}"><path d="${path}" fill="none" stroke="currentColor" stroke-dasharray="4 3"/>${circles}</svg>`;
}

export function renderReport(report: ReportPayload): string {
  const metric = (name: string, m?: Record<string, string>) =>
    m
      ? `<dt>${esc(name)}</dt><dd>MSE ${esc(m["mse"])} · R² ${esc(m["r2"])} · NLL ${esc(m["nll"])} · DL ${esc(m["dl"])}</dd>`
      : "";
  return [
    `<dl class="report" data-id="${esc(report.id)}">`,
    `<dt>Expression</dt><dd><code>${esc(report.expression)}</code></dd>`,
    `<dt>Fitness</dt><dd>${esc(report.fitness)}</dd>`,
    `<dt>Parameters</dt><dd>${esc(report.parameters)}</dd>`,
    `<dt>Size</dt><dd>${esc(report.size)}</dd>`,
    `<dt>DL</dt><dd>${esc(report.dl)}</dd>`,
    metric("Train", report.train),
    metric("Test", report.test),
    `</dl>`,
  ].join("");
}

export function renderError(message: string, position: number, command: string): string {
  const caret = " ".repeat(Math.max(0, position)) + "^";
  return `<pre class="error">error: ${esc(message)}\n  ${esc(command)}\n  ${esc(caret)}</pre>`;
}
