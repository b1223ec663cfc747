/**
 * Console wiring: command box with history, query-builder chips, results
 * table, Pareto scatter, and an expression drill-down panel.  All state
 * lives on the server; every action issues a fresh request.
 */

import { ApiError, Client } from "./api.js";
import {
  buildDistribution,
  buildMatchingTop,
  buildPareto,
  buildTop,
  Criterion,
  FilterChip,
} from "./builder.js";
import { paretoPoints, renderError, renderParetoSvg, renderReport, renderTable } from "./views.js";

const client = new Client();

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

const commandInput = $<HTMLInputElement>("command");
const results = $<HTMLDivElement>("results");
const paretoPanel = $<HTMLDivElement>("pareto");
const drilldown = $<HTMLDivElement>("drilldown");
const statusLine = $<HTMLDivElement>("status");

const history: string[] = [];
let historyAt = -1;
let paretoBy: Criterion = "fitness";

async function runCommand(text: string): Promise<void> {
  if (!text.trim()) return;
  history.push(text);
  historyAt = history.length;
  try {
    const payload = await client.command(text);
    results.innerHTML = renderTable(payload);
    statusLine.textContent = "";
  } catch (err) {
    if (err instanceof ApiError) {
      results.innerHTML = renderError(err.message, err.position, text);
    } else {
      results.innerHTML = renderError(String(err), 0, text);
    }
  }
}

async function refreshPareto(): Promise<void> {
  try {
    const payload = await client.pareto(paretoBy);
    paretoPanel.innerHTML = renderParetoSvg(paretoPoints(payload, paretoBy));
  } catch (err) {
    paretoPanel.innerHTML =
      err instanceof ApiError ? renderError(err.message, err.position, `pareto by ${paretoBy}`) : "";
  }
}

async function openDrilldown(id: number): Promise<void> {
  try {
    const report = await client.report(id);
    const subtrees = await client.command(`subtrees ${id}`);
    drilldown.innerHTML =
      renderReport(report) +
      `<div class="actions"><button data-action="optimize" data-id="${id}">optimize</button></div>` +
      renderTable(subtrees);
  } catch (err) {
    if (err instanceof ApiError) {
      drilldown.innerHTML = renderError(err.message, err.position, `report ${id}`);
    }
  }
}

function chipFilters(): FilterChip[] {
  const out: FilterChip[] = [];
  const size = $<HTMLInputElement>("filter-size").value;
  if (size) out.push({ field: "size", op: "<=", bound: Number(size) });
  const params = $<HTMLInputElement>("filter-params").value;
  if (params) out.push({ field: "parameters", op: ">=", bound: Number(params) });
  return out;
}

function wire(): void {
  commandInput.addEventListener("keydown", (ev) => {
    if (ev.key === "Enter") {
      void runCommand(commandInput.value);
    } else if (ev.key === "ArrowUp" && historyAt > 0) {
      historyAt -= 1;
      commandInput.value = history[historyAt];
    } else if (ev.key === "ArrowDown" && historyAt < history.length - 1) {
      historyAt += 1;
      commandInput.value = history[historyAt];
    }
  });

  $<HTMLButtonElement>("run-top").addEventListener("click", () => {
    const n = Number($<HTMLInputElement>("top-n").value) || 10;
    const criterion = $<HTMLSelectElement>("top-by").value as Criterion;
    const pattern = $<HTMLInputElement>("top-pattern").value || undefined;
    const text = buildTop({ n, filters: chipFilters(), criterion, pattern });
    commandInput.value = text;
    void runCommand(text);
  });

  $<HTMLButtonElement>("run-dist").addEventListener("click", () => {
    const text = buildDistribution({ sizeOp: "<=", sizeBound: 4, limit: 10, by: "count" });
    commandInput.value = text;
    void runCommand(text);
  });

  $<HTMLSelectElement>("pareto-by").addEventListener("change", (ev) => {
    paretoBy = (ev.target as HTMLSelectElement).value as Criterion;
    commandInput.value = buildPareto(paretoBy);
    void refreshPareto();
  });

  results.addEventListener("click", (ev) => {
    const target = ev.target as HTMLElement;
    const row = target.closest("tr[data-id]") as HTMLElement | null;
    if (row?.dataset.id) {
      void openDrilldown(Number(row.dataset.id));
      return;
    }
    // Clicking a mined block pattern pre-fills a matching query.
    const cell = target.closest("td[data-col='pattern']") as HTMLElement | null;
    if (cell?.textContent) {
      commandInput.value = buildMatchingTop(cell.textContent);
      commandInput.focus();
    }
  });

  paretoPanel.addEventListener("click", (ev) => {
    const circle = (ev.target as Element).closest("circle[data-id]");
    const id = circle?.getAttribute("data-id");
    if (id) void openDrilldown(Number(id));
  });

  drilldown.addEventListener("click", (ev) => {
    const button = (ev.target as Element).closest("button[data-action='optimize']");
    const id = button?.getAttribute("data-id");
    if (id) {
      void runCommand(`optimize ${id}`);
    }
  });

  void client
    .health()
    .then(() => {
      statusLine.textContent = "connected";
      return refreshPareto();
    })
    .catch(() => {
      statusLine.textContent = "service unreachable";
    });
}

wire();

export { runCommand, refreshPareto, openDrilldown };
