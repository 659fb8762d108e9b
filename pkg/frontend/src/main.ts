/** Browser entry point: wires the editor, results table, pin/generate
 * workflow, and heatmap panels to the HTTP service. Everything testable
 * lives in api.ts / bql.ts / state.ts / render.ts; this file only touches
 * the DOM. */

import { QueryError, RelqueryClient, type QueryResponse } from "./api.js";
import { generateRelevanceQuery } from "./bql.js";
import {
  MAX_RENDERED_ROWS,
  errorCaret,
  formatCell,
  heatmapCells,
  sortRows,
  type Cell,
} from "./render.js";
import { ConsoleSession } from "./state.js";

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

const client = new RelqueryClient("");
let session: ConsoleSession | null = null;
let lastResult: QueryResponse | null = null;
let sortState: { column: number; descending: boolean } | null = null;

function setStatus(text: string, isError = false) {
  const el = $("status");
  el.textContent = text;
  el.className = isError ? "status error" : "status";
}

async function connect() {
  const dataset = ($("dataset") as HTMLInputElement).value.trim() || "gapminder_extract";
  const key = ($("key-column") as HTMLInputElement).value.trim() || undefined;
  const seed = Number(($("seed") as HTMLInputElement).value) || 0;
  const models = Number(($("models") as HTMLInputElement).value) || 16;
  setStatus(`creating session over ${dataset}...`);
  try {
    const info = await client.createSession({
      dataset,
      name: "population",
      key,
      seed,
      models,
    });
    session = new ConsoleSession(info);
    setStatus(
      `session ${info.session_id}: ${info.rows} rows, ${info.columns} columns` +
        (info.key_column ? `, key ${info.key_column}` : ", no key column"),
    );
    const contexts = $("context") as HTMLSelectElement;
    contexts.innerHTML = "";
    for (const col of info.schema) {
      const opt = document.createElement("option");
      opt.value = col.name;
      opt.textContent = `${col.name} (${col.stat_type})`;
      contexts.appendChild(opt);
    }
    if (session.context) contexts.value = session.context;
    renderHistory();
  } catch (err) {
    setStatus(String(err), true);
  }
}

async function submitQuery() {
  if (!session || session.pending) return;
  const editor = $("editor") as HTMLTextAreaElement;
  const text = editor.value.trim();
  if (!text) return;
  session.pending = true;
  ($("run") as HTMLButtonElement).disabled = true;
  setStatus("running...");
  try {
    const result = await client.query(session.info.session_id, text);
    session.recordResult(text, result);
    lastResult = result;
    sortState = null;
    renderResult(result);
    const note = result.warnings.length ? `; ${result.warnings.join("; ")}` : "";
    setStatus(`${result.rows.length} rows in ${result.timing_ms.toFixed(1)} ms${note}`);
  } catch (err) {
    if (err instanceof QueryError) {
      session.recordError(text, err.message);
      const caret = errorCaret(text, err.line, err.column);
      setStatus(`error: ${err.message}${caret ? "\n" + caret : ""}`, true);
    } else {
      setStatus(String(err), true);
    }
  } finally {
    session.pending = false;
    ($("run") as HTMLButtonElement).disabled = false;
    renderHistory();
  }
}

function renderResult(result: QueryResponse) {
  const table = $("results") as HTMLTableElement;
  table.innerHTML = "";
  const banner = $("result-banner");
  if (result.rows.length === 0) {
    banner.textContent = "0 rows";
  } else {
    banner.textContent = "";
  }
  const head = table.createTHead().insertRow();
  const keyColumn = session?.info.key_column ?? null;
  const keyIndex = keyColumn ? result.columns.indexOf(keyColumn) : -1;
  if (keyIndex >= 0) {
    head.insertCell().textContent = "pin";
  }
  result.columns.forEach((name, i) => {
    const cell = document.createElement("th");
    cell.textContent = name;
    cell.onclick = () => {
      const descending = sortState?.column === i ? !sortState.descending : true;
      sortState = { column: i, descending };
      renderResult(result);
    };
    head.appendChild(cell);
  });
  let rows: Cell[][] = result.rows.slice(0, MAX_RENDERED_ROWS);
  if (sortState) rows = sortRows(rows, sortState.column, sortState.descending);
  const body = table.createTBody();
  for (const row of rows) {
    const tr = body.insertRow();
    if (keyIndex >= 0) {
      const key = String(row[keyIndex]);
      const box = document.createElement("input");
      box.type = "checkbox";
      box.checked = session!.isPinned(key);
      box.onchange = () => {
        session!.togglePin(key);
        updateGenerate();
      };
      tr.insertCell().appendChild(box);
    }
    row.forEach((value, i) => {
      const td = tr.insertCell();
      td.textContent = formatCell(value, result.kinds[i]);
      if (result.kinds[i] === "prob") td.className = "prob";
    });
  }
  updateGenerate();
}

function updateGenerate() {
  const button = $("generate") as HTMLButtonElement;
  button.disabled = !session?.canGenerate();
  $("pinned").textContent = session && session.pinned.length
    ? `pinned: ${session.pinned.join(", ")}`
    : "";
}

function generate() {
  if (!session || !session.canGenerate()) return;
  const contexts = $("context") as HTMLSelectElement;
  session.context = contexts.value;
  const text = generateRelevanceQuery({
    source: session.info.name,
    keys: [...session.pinned],
    context: session.context,
    limit: 10,
  });
  ($("editor") as HTMLTextAreaElement).value = text; // user refines, never auto-submits
  setStatus("query generated from pinned rows; review and run");
}

function renderHistory() {
  const list = $("history");
  list.innerHTML = "";
  if (!session) return;
  [...session.history].reverse().forEach((entry) => {
    const item = document.createElement("li");
    const label = entry.error ? `error: ${entry.error}` : `${entry.result?.rows.length} rows`;
    item.textContent = `${entry.text.split("\n")[0].slice(0, 60)}  [${label}]`;
    item.onclick = () => {
      ($("editor") as HTMLTextAreaElement).value = entry.text;
    };
    list.appendChild(item);
  });
}

async function loadHeatmaps() {
  if (!session) return;
  const context = ($("context") as HTMLSelectElement).value;
  const k = Number(($("heatmap-k") as HTMLInputElement).value) || 10;
  for (const [measure, elementId] of [
    ["relevance", "heatmap-relevance"],
    ["cosine", "heatmap-cosine"],
  ] as const) {
    const target = $(elementId);
    target.innerHTML = "rendering...";
    try {
      const data = await client.heatmap(session.info.session_id, measure, context, k);
      const n = data.ordering.length;
      const grid = document.createElement("div");
      grid.className = "heatmap";
      grid.style.gridTemplateColumns = `repeat(${n}, 10px)`;
      for (const cell of heatmapCells(data.matrix, data.ordering, data.labels)) {
        const el = document.createElement("div");
        el.className = "hm-cell";
        el.style.backgroundColor = cell.color;
        el.title = `${cell.rowLabel} x ${cell.colLabel}: ${cell.value.toFixed(3)}`;
        grid.appendChild(el);
      }
      target.innerHTML = `<h4>${measure} (${context})</h4>`;
      target.appendChild(grid);
    } catch (err) {
      if (err instanceof QueryError && err.status === 409) {
        target.innerHTML = "analysis in progress; <a href='#' class='retry'>retry</a>";
        (target.querySelector(".retry") as HTMLAnchorElement).onclick = (e) => {
          e.preventDefault();
          void loadHeatmaps();
        };
      } else {
        target.textContent = String(err);
      }
    }
  }
}

async function runAnalyze() {
  if (!session) return;
  const iterations = Number(($("analyze-iterations") as HTMLInputElement).value) || 100;
  try {
    await client.analyze(session.info.session_id, iterations);
    setStatus(`analyze started (${iterations} iterations)`);
    const poll = window.setInterval(async () => {
      const status = await client.analyzeStatus(session!.info.session_id);
      if (!status.running) {
        window.clearInterval(poll);
        setStatus(
          status.error
            ? `analyze failed: ${status.error}`
            : `analyze done: ${status.total_iterations} total sweeps`,
          Boolean(status.error),
        );
      }
    }, 500);
  } catch (err) {
    setStatus(String(err), true);
  }
}

export function wire() {
  $("connect").onclick = () => void connect();
  $("run").onclick = () => void submitQuery();
  $("generate").onclick = () => generate();
  $("heatmap-load").onclick = () => void loadHeatmaps();
  $("analyze").onclick = () => void runAnalyze();
}

if (typeof document !== "undefined" && document.getElementById("connect")) {
  wire();
}
