import { cellKey } from './types.js';
import type { ArrangementPayload, SandCell, SplitPayload } from './types.js';

export interface CellIssue {
  key: string;
  message: string;
}

// Tracks the human Pusher's running-part edits against the current
// arrangement. Validation mirrors the server's 400s: an amount below zero
// or above the sand available in its cell blocks submission before any
// request is made.
export class SplitEditor {
  private available = new Map<string, number>();
  private edits = new Map<string, number>();

  constructor(arrangement: ArrangementPayload) {
    for (const cell of arrangement.sand) {
      this.available.set(cellKey(cell), cell.amount);
    }
  }

  setAmount(key: string, amount: number): void {
    if (!this.available.has(key)) return;
    if (amount === 0) {
      this.edits.delete(key);
    } else {
      this.edits.set(key, amount);
    }
  }

  amount(key: string): number {
    return this.edits.get(key) ?? 0;
  }

  availableAt(key: string): number {
    return this.available.get(key) ?? 0;
  }

  clearEdits(): void {
    this.edits.clear();
  }

  issues(): CellIssue[] {
    const found: CellIssue[] = [];
    for (const [key, amount] of this.edits) {
      const limit = this.available.get(key) ?? 0;
      if (!Number.isFinite(amount) || amount < 0) {
        found.push({ key, message: 'amount must be a nonnegative number' });
      } else if (amount > limit) {
        found.push({ key, message: `only ${limit} available` });
      }
    }
    return found;
  }

  isValid(): boolean {
    return this.issues().length === 0;
  }

  isEmpty(): boolean {
    return [...this.edits.values()].every((a) => a === 0);
  }

  // The payload the server expects; refuses to build one that would 400.
  toSplitPayload(): SplitPayload {
    const problems = this.issues();
    if (problems.length > 0) {
      throw new Error(`invalid split: ${problems[0].message} at ${problems[0].key}`);
    }
    const running: SandCell[] = [];
    for (const [key, amount] of this.edits) {
      if (amount === 0) continue;
      const [level, path] = splitKey(key);
      running.push({ level, path, amount });
    }
    running.sort((a, b) => a.level - b.level || a.path.localeCompare(b.path));
    return { running };
  }

  // Preset: run every grain of sand.
  runAll(): void {
    this.edits.clear();
    for (const [key, amount] of this.available) {
      if (amount > 0) this.edits.set(key, amount);
    }
  }

  // Preset: adopt a server-provided split (the /hint response) verbatim.
  applyHint(split: SplitPayload): void {
    this.edits.clear();
    for (const cell of split.running) {
      this.edits.set(cellKey(cell), cell.amount);
    }
  }
}

function splitKey(key: string): [number, string] {
  const at = key.indexOf(':');
  return [Number(key.slice(0, at)), key.slice(at + 1)];
}
