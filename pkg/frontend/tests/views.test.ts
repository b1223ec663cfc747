import { describe, expect, it } from "vitest";

import type { ReportPayload, TablePayload } from "../src/api";
import { paretoPoints, renderError, renderParetoSvg, renderReport, renderTable } from "../src/views";
import fixtures from "./fixtures.json";

const pareto = fixtures.pareto as TablePayload;
const distribution = fixtures.distribution as TablePayload;
const report = fixtures.report as ReportPayload;

describe("pareto view", () => {
  it("renders exactly one marker per payload row", () => {
    const points = paretoPoints(pareto, "fitness");
    const svg = renderParetoSvg(points);
    const circles = svg.match(/<circle /g) ?? [];
    expect(circles.length).toBe(pareto.rows.length);
    for (const row of pareto.rows) {
      expect(svg).toContain(`data-id="${row["id"]}"`);
    }
  });

  it("carries size and criterion values through unchanged", () => {
    const points = paretoPoints(pareto, "fitness");
    expect(points.map((p) => p.size)).toEqual(pareto.rows.map((r) => Number(r["size"])));
    expect(points.map((p) => p.value)).toEqual(pareto.rows.map((r) => Number(r["fitness"])));
  });

  it("handles an empty front", () => {
    expect(renderParetoSvg([])).toContain("no front");
  });
});

describe("table view", () => {
  it("renders every row and column of a recorded payload", () => {
    const html = renderTable(distribution);
    const rows = html.match(/<tr>|<tr /g) ?? [];
    expect(rows.length).toBe(distribution.rows.length + 1); // + header
    for (const col of distribution.columns) {
      expect(html).toContain(`<th>${col}</th>`);
    }
  });

  it("tags score rows with their id for drill-down", () => {
    const html = renderTable(pareto);
    for (const row of pareto.rows) {
      expect(html).toContain(`data-id="${row["id"]}"`);
    }
  });

  it("escapes markup in cells", () => {
    const payload: TablePayload = {
      columns: ["expression"],
      rows: [{ expression: "<script>alert(1)</script>" }],
    };
    const html = renderTable(payload);
    expect(html).not.toContain("<script>");
    expect(html).toContain("&lt;script&gt;");
  });
});

describe("report view", () => {
  it("shows the recorded report fields", () => {
    const html = renderReport(report);
    expect(html).toContain(report.expression);
    expect(html).toContain(report.fitness);
    expect(html).toContain("Train");
  });
});

describe("error view", () => {
  it("points the caret at the reported position", () => {
    const html = renderError("expected an integer count, found 'x'", 4, "top x");
    const lines = html.split("\n");
    expect(lines[2].indexOf("^")).toBe(lines[1].indexOf("x"));
  });
});
