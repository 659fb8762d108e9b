/** Client-side session model: the working query-row set ("pinned" keys),
 * the selected context column, and an append-only query history. All
 * inference state lives on the server; replaying the history against a
 * seeded server reproduces identical tables. */

import type { QueryResponse, SessionInfo } from "./api.js";

export interface HistoryEntry {
  readonly text: string;
  readonly result: QueryResponse | null;
  readonly error: string | null;
  readonly at: number;
}

export class ConsoleSession {
  readonly info: SessionInfo;
  private readonly entries: HistoryEntry[] = [];
  private readonly pinnedKeys = new Set<string>();
  context: string | null = null;
  pending = false; // at most one in-flight query

  constructor(info: SessionInfo) {
    this.info = info;
    const first = info.schema.find((c) => c.stat_type === "numerical");
    this.context = (first ?? info.schema[info.schema.length - 1])?.name ?? null;
  }

  get history(): readonly HistoryEntry[] {
    return this.entries;
  }

  recordResult(text: string, result: QueryResponse): HistoryEntry {
    const entry: HistoryEntry = Object.freeze({
      text,
      result,
      error: null,
      at: Date.now(),
    });
    this.entries.push(entry);
    return entry;
  }

  recordError(text: string, error: string): HistoryEntry {
    const entry: HistoryEntry = Object.freeze({ text, result: null, error, at: Date.now() });
    this.entries.push(entry);
    return entry;
  }

  get pinned(): readonly string[] {
    return [...this.pinnedKeys];
  }

  isPinned(key: string): boolean {
    return this.pinnedKeys.has(key);
  }

  togglePin(key: string): boolean {
    if (this.pinnedKeys.has(key)) {
      this.pinnedKeys.delete(key);
      return false;
    }
    this.pinnedKeys.add(key);
    return true;
  }

  clearPins(): void {
    this.pinnedKeys.clear();
  }

  /** Generation needs a designated key column, pinned rows, and a context. */
  canGenerate(): boolean {
    return (
      this.info.key_column !== null &&
      this.pinnedKeys.size > 0 &&
      this.context !== null
    );
  }
}
