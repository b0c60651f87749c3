import { cellKey } from './types.js';
import type { RoundEntry, SessionView, SplitPayload } from './types.js';
import type { SplitEditor } from './split-editor.js';

// All rendering reads straight from the SessionView; the only client-side
// numbers on screen are the human's own pending edits.

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function runningAmounts(split: SplitPayload | undefined): Map<string, number> {
  const map = new Map<string, number>();
  if (split) {
    for (const cell of split.running) map.set(cellKey(cell), cell.amount);
  }
  return map;
}

// Levels run left-to-right toward the winning column at level 0; paths are
// rows. Only paths the server mentions exist — the client knows nothing
// about the kind's transition tables.
export function renderBoard(view: SessionView, editor?: SplitEditor): HTMLElement {
  const board = el('div', 'board');
  const pending = runningAmounts(view.pendingSplit);
  const amounts = new Map<string, number>();
  const paths = new Set<string>();
  for (const cell of view.arrangement.sand) {
    amounts.set(cellKey(cell), cell.amount);
    paths.add(cell.path);
  }
  for (const cell of view.pendingSplit?.running ?? []) paths.add(cell.path);

  const table = el('table', 'board-grid');
  const head = el('tr');
  head.appendChild(el('th', 'path-label', ''));
  for (let level = view.arrangement.maxLevel; level >= 0; level--) {
    head.appendChild(el('th', 'level-label', level === 0 ? 'win' : String(level)));
  }
  table.appendChild(head);

  for (const path of [...paths].sort()) {
    const row = el('tr');
    row.appendChild(el('th', 'path-label', path));
    for (let level = view.arrangement.maxLevel; level >= 0; level--) {
      const key = cellKey({ level, path });
      const cell = el('td', 'cell');
      cell.dataset.key = key;
      const amount = amounts.get(key);
      if (amount !== undefined) {
        cell.dataset.amount = String(amount);
        cell.appendChild(el('span', 'amount', String(amount)));
        const run = editor ? editor.amount(key) : pending.get(key);
        if (run) {
          cell.classList.add('running');
          cell.appendChild(el('span', 'running-part', `run ${run}`));
        }
      } else if (level === 0) {
        cell.classList.add('winning-cell');
      }
      row.appendChild(cell);
    }
    table.appendChild(row);
  }
  board.appendChild(table);
  return board;
}

export function renderMeters(view: SessionView): HTMLElement {
  const meters = el('div', 'meters');

  const value = el('div', 'meter value-meter');
  value.appendChild(el('span', 'label', 'e(x)'));
  value.appendChild(el('span', 'reading', view.e === undefined ? '—' : String(view.e)));
  meters.appendChild(value);

  const pstar = el('div', 'meter pstar-meter');
  pstar.appendChild(el('span', 'label', 'p*'));
  const reading =
    view.pStar === undefined
      ? '—'
      : Array.isArray(view.pStar)
        ? view.pStar.map(String).join(', ')
        : String(view.pStar);
  pstar.appendChild(el('span', 'reading', reading));
  meters.appendChild(pstar);

  const badge = el('span', 'degeneracy-badge', view.degeneracy ?? 'empty');
  badge.classList.add(`degeneracy-${view.degeneracy ?? 'empty'}`);
  meters.appendChild(badge);

  const harvest = el('div', 'meter harvest-meter');
  harvest.appendChild(el('span', 'label', 'harvested'));
  harvest.appendChild(el('span', 'reading', String(view.totalHarvested)));
  meters.appendChild(harvest);

  const destroyed = el('div', 'meter destroyed-meter');
  destroyed.appendChild(el('span', 'label', 'destroyed'));
  destroyed.appendChild(el('span', 'reading', String(view.totalDestroyed)));
  meters.appendChild(destroyed);

  return meters;
}

function describeRound(entry: RoundEntry): string {
  const ran = entry.split.running
    .map((c) => `${c.amount}@${c.level}:${c.path}`)
    .join(' ');
  return `#${entry.round} ran [${ran}] τ=${entry.tau} +${entry.harvested} −${entry.destroyed}`;
}

export function renderTimeline(trace: RoundEntry[]): HTMLElement {
  const timeline = el('ol', 'timeline');
  for (const entry of trace) {
    timeline.appendChild(el('li', 'timeline-entry', describeRound(entry)));
  }
  return timeline;
}

export function renderStatus(view: SessionView): HTMLElement {
  const bar = el('div', 'status-bar');
  bar.appendChild(el('span', 'kind', view.kind));
  bar.appendChild(el('span', 'role', `you: ${view.humanRole}`));
  bar.appendChild(el('span', 'round', `round ${view.round}`));
  bar.appendChild(el('span', `status status-${view.status}`, view.status));
  return bar;
}
