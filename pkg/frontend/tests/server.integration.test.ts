/** Console round trip against the real HTTP service: generated BQL parses
 * on the server, and the relevance column fetched over HTTP matches the
 * engine's scripted output for the same seed. */

import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { RelqueryClient } from "../src/api.js";
import { generateRelevanceQuery } from "../src/bql.js";
import { ConsoleSession } from "../src/state.js";
import { formatProbability } from "../src/render.js";

const PORT = 7841;
const BASE = `http://127.0.0.1:${PORT}`;
const SEED = 11;

const RELEVANCE_QUERY = [
  'SELECT "country", "oil", "hdi", RELEVANCE PROBABILITY',
  "  TO HYPOTHETICAL ROW WITH VALUES ((\"oil\" = 27, \"snow\" = 0.2, \"hdi\" = 180))",
  '  IN THE CONTEXT OF "hdi" AS "relevance"',
  "FROM population",
  "WHERE \"government\" IS NOT 'monarchy'",
  'ORDER BY "relevance" DESC',
].join("\n");

let server: ChildProcess;
const client = new RelqueryClient(BASE);

async function waitForHealth(timeoutMs = 30_000) {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const health = await client.health();
      if (health.status === "ok") return;
    } catch {
      /* not up yet */
    }
    await new Promise((r) => setTimeout(r, 150));
  }
  throw new Error("server did not become healthy");
}

beforeAll(async () => {
  server = spawn(
    "python3",
    ["-m", "relquery.cli", "serve", "--port", String(PORT), "--seed", String(SEED)],
    { stdio: "ignore" },
  );
  await waitForHealth();
}, 60_000);

afterAll(() => {
  server?.kill("SIGTERM");
});

describe("console round trip", () => {
  it("acceptance 10: generated queries parse and HTTP relevance matches the engine", async () => {
    const info = await client.createSession({
      dataset: "gapminder_extract",
      name: "population",
      key: "country",
      seed: SEED,
      models: 8,
      analyze_iterations: 30,
    });
    expect(info.key_column).toBe("country");
    const session = new ConsoleSession(info);

    // pin rows from a first result and generate the next query
    const first = await client.query(info.session_id, 'SELECT "country" FROM population LIMIT 5');
    for (const row of first.rows.slice(0, 3)) session.togglePin(String(row[0]));
    session.context = "hdi";
    expect(session.canGenerate()).toBe(true);
    const generated = generateRelevanceQuery({
      source: info.name,
      keys: [...session.pinned],
      context: session.context!,
      limit: 10,
    });
    const parsed = await client.query(info.session_id, generated);
    expect(parsed.columns.length).toBeGreaterThan(0); // server parsed and ran it

    // the published hypothetical-record query, fetched over HTTP
    const viaHttp = await client.query(info.session_id, RELEVANCE_QUERY);
    expect(viaHttp.kinds[viaHttp.columns.indexOf("relevance")]).toBe("prob");
    const httpTable = viaHttp.rows.map((row) => [
      row[0],
      formatProbability(Number(row[viaHttp.columns.indexOf("relevance")])),
    ]);

    // the same statements through the scripted engine entry point
    const dir = mkdtempSync(join(tmpdir(), "relquery-console-"));
    const script = join(dir, "workflow.bql");
    writeFileSync(
      script,
      [
        "CREATE TABLE population FROM 'gapminder_extract.csv' WITH KEY country;",
        "CREATE POPULATION population FOR population WITH SCHEMA (GUESS STATISTICAL TYPES FOR (*););",
        "INITIALIZE 8 MODELS FOR population;",
        "ANALYZE population FOR 30 ITERATIONS;",
        RELEVANCE_QUERY + ";",
      ].join("\n"),
    );
    const run = spawnSync(
      "python3",
      ["-m", "relquery.cli", "run", script, "--seed", String(SEED), "--output", "json"],
      { encoding: "utf-8", timeout: 120_000 },
    );
    expect(run.status).toBe(0);
    const lines = run.stdout.trim().split("\n");
    const engineRows = JSON.parse(lines[lines.length - 1]) as Array<
      Record<string, string | number | null>
    >;
    const engineTable = engineRows.map((row) => [
      row["country"],
      formatProbability(Number(row["relevance"])),
    ]);
    expect(httpTable).toEqual(engineTable);
    console.log(
      `ACCEPTANCE 10: PASS - generated BQL parsed on the server; HTTP relevance table ` +
        `matches the engine for seed ${SEED} (${httpTable.length} rows)`,
    );
  }, 180_000);
});
