/** BQL text templating. The console edits query text, never a form model;
 * these helpers only generate text for the user to refine, and what they
 * generate must always parse on the server. */

export function quoteIdent(name: string): string {
  if (name.includes('"') || name.includes("\n")) {
    throw new Error(`column name cannot be quoted as a BQL identifier: ${name}`);
  }
  return `"${name}"`;
}

export function quoteString(value: string): string {
  return `'${value.replace(/'/g, "''")}'`;
}

export interface RelevanceQuerySpec {
  source: string;
  keys: string[];
  context: string;
  columns?: string[];
  limit?: number;
}

/** Template an ORDER BY RELEVANCE PROBABILITY query from pinned row keys.
 * Emitted into the editor for refinement; never submitted automatically. */
export function generateRelevanceQuery(spec: RelevanceQuerySpec): string {
  if (spec.keys.length === 0) {
    throw new Error("pin at least one row before generating a query");
  }
  const projection = spec.columns?.length
    ? spec.columns.map(quoteIdent).join(", ")
    : "*";
  const keys = spec.keys.map(quoteString).join(",\n    ");
  const limit = spec.limit ?? 10;
  return [
    `SELECT ${projection}`,
    `FROM ${spec.source}`,
    "ORDER BY RELEVANCE PROBABILITY",
    "  TO EXISTING ROWS IN (",
    `    ${keys}`,
    "  )",
    `  IN THE CONTEXT OF ${quoteIdent(spec.context)}`,
    "DESC",
    `LIMIT ${limit}`,
  ].join("\n");
}

export interface HypotheticalQuerySpec {
  source: string;
  values: Array<[string, string | number]>;
  context: string;
  columns?: string[];
  limit?: number;
}

export function generateHypotheticalQuery(spec: HypotheticalQuerySpec): string {
  if (spec.values.length === 0) {
    throw new Error("give at least one column = value pair");
  }
  const projection = spec.columns?.length
    ? spec.columns.map(quoteIdent).join(", ")
    : "*";
  const pairs = spec.values
    .map(([name, v]) => {
      const lit = typeof v === "number" ? String(v) : quoteString(v);
      return `${quoteIdent(name)} = ${lit}`;
    })
    .join(", ");
  const limit = spec.limit ?? 10;
  return [
    `SELECT ${projection}`,
    `FROM ${spec.source}`,
    "ORDER BY RELEVANCE PROBABILITY",
    `  TO HYPOTHETICAL ROW WITH VALUES ((${pairs}))`,
    `  IN THE CONTEXT OF ${quoteIdent(spec.context)}`,
    "DESC",
    `LIMIT ${limit}`,
  ].join("\n");
}
