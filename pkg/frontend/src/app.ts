import { ApiError, ConnectionError, PlaygroundClient } from './api.js';
import { renderBoard, renderMeters, renderStatus, renderTimeline } from './board.js';
import { SessionStore } from './state.js';
import { SplitEditor } from './split-editor.js';
import { cellKey } from './types.js';
import type { ArrangementPayload, HintResponse, SessionView } from './types.js';

const EXAMPLE_ARRANGEMENT: ArrangementPayload = {
  kind: 'property_b',
  maxLevel: 3,
  mode: 'continuous',
  sand: [{ level: 3, path: '0', amount: 4.0 }],
};

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

export class App {
  readonly store = new SessionStore();
  private editor: SplitEditor | null = null;
  private initialValue: number | null = null;
  private errorText = '';
  private errorKey: string | null = null; // cell the last 400 pointed at
  private paused = false;

  constructor(
    private readonly root: HTMLElement,
    private readonly client: PlaygroundClient,
  ) {
    this.store.subscribe(() => this.render());
  }

  start(): void {
    this.render();
  }

  // ------------------------------------------------------------------ flows

  async createSession(
    arrangement: ArrangementPayload,
    role: 'pusher' | 'remover',
    eps: number,
  ): Promise<void> {
    await this.guard(async () => {
      const view = await this.client.createSession({ arrangement, humanRole: role, eps });
      this.initialValue = view.e ?? null;
      this.editor = new SplitEditor(view.arrangement);
      this.store.accept(view);
    });
  }

  async submitSplit(): Promise<void> {
    const view = this.store.current();
    if (!view || !this.editor || !this.editor.isValid() || this.editor.isEmpty()) return;
    const payload = this.editor.toSplitPayload();
    await this.guard(async () => {
      const next = await this.client.moveSplit(view.sessionId, payload);
      this.editor = new SplitEditor(next.arrangement);
      this.store.accept(next);
    });
  }

  async chooseTau(tau: number): Promise<void> {
    const view = this.store.current();
    if (!view) return;
    await this.guard(async () => {
      const next = await this.client.moveTau(view.sessionId, tau);
      this.editor = new SplitEditor(next.arrangement);
      this.store.accept(next);
    });
  }

  async applyHint(): Promise<void> {
    const view = this.store.current();
    if (!view) return;
    await this.guard(async () => {
      const hint: HintResponse = await this.client.hint(view.sessionId);
      if ('split' in hint && this.editor) {
        this.editor.applyHint(hint.split);
        this.render();
      } else if ('tau' in hint) {
        await this.chooseTau(hint.tau);
      }
    });
  }

  async resume(): Promise<void> {
    const view = this.store.current();
    if (!view) {
      this.paused = false;
      this.render();
      return;
    }
    await this.guard(async () => {
      const fresh = await this.client.getSession(view.sessionId);
      this.editor = new SplitEditor(fresh.arrangement);
      this.paused = false;
      this.store.accept(fresh);
    });
  }

  private async guard(work: () => Promise<void>): Promise<void> {
    try {
      this.errorText = '';
      this.errorKey = null;
      await work();
    } catch (err) {
      if (err instanceof ConnectionError) {
        this.paused = true;
      } else if (err instanceof ApiError) {
        this.errorText = err.detail;
        this.errorKey = guessCellFromDetail(err.detail);
      } else {
        this.errorText = String(err);
      }
      this.render();
    }
  }

  // ----------------------------------------------------------------- render

  render(): void {
    this.root.textContent = '';
    if (this.paused) {
      this.root.appendChild(this.renderPaused());
      return;
    }
    const view = this.store.current();
    if (!view) {
      this.root.appendChild(this.renderSetup());
    } else if (view.status === 'finished') {
      this.root.appendChild(this.renderFinished(view));
    } else {
      this.root.appendChild(this.renderPlay(view));
    }
  }

  private renderPaused(): HTMLElement {
    const pane = el('div', 'paused-pane');
    pane.appendChild(el('p', 'paused-note', 'connection lost — game paused'));
    const button = el('button', 'resume', 'resume');
    button.addEventListener('click', () => void this.resume());
    pane.appendChild(button);
    return pane;
  }

  private renderSetup(): HTMLElement {
    const pane = el('div', 'setup-pane');
    pane.appendChild(el('h1', undefined, 'gold sand playground'));

    const form = el('form', 'setup-form');
    form.addEventListener('submit', (ev) => ev.preventDefault());

    const kindLabel = el('label', undefined, 'kind ');
    const kind = el('select');
    for (const name of ['property_b', 'proper', 'panchromatic', 'list']) {
      const opt = el('option', undefined, name);
      opt.value = name;
      kind.appendChild(opt);
    }
    kindLabel.appendChild(kind);
    form.appendChild(kindLabel);

    const roleLabel = el('label', undefined, 'play as ');
    const role = el('select');
    for (const name of ['pusher', 'remover']) {
      const opt = el('option', undefined, name);
      opt.value = name;
      role.appendChild(opt);
    }
    roleLabel.appendChild(role);
    form.appendChild(roleLabel);

    const epsLabel = el('label', undefined, 'ε ');
    const eps = el('input');
    eps.type = 'number';
    eps.step = '0.001';
    eps.value = '0.01';
    epsLabel.appendChild(eps);
    form.appendChild(epsLabel);

    const area = el('textarea', 'arrangement-json');
    area.rows = 8;
    area.value = JSON.stringify(EXAMPLE_ARRANGEMENT, null, 2);
    form.appendChild(area);

    const upload = el('input', 'arrangement-file');
    upload.type = 'file';
    upload.accept = '.json,application/json';
    upload.addEventListener('change', () => {
      const file = upload.files?.[0];
      if (!file) return;
      void file.text().then((text) => {
        area.value = text;
      });
    });
    form.appendChild(upload);

    const submit = el('button', 'create-session', 'start game');
    submit.addEventListener('click', () => {
      let arrangement: ArrangementPayload;
      try {
        arrangement = JSON.parse(area.value);
      } catch {
        this.errorText = 'arrangement is not valid JSON';
        this.render();
        return;
      }
      arrangement.kind = kind.value;
      void this.createSession(
        arrangement,
        role.value as 'pusher' | 'remover',
        Number(eps.value),
      );
    });
    form.appendChild(submit);
    pane.appendChild(form);

    if (this.errorText) pane.appendChild(el('p', 'error-strip', this.errorText));
    return pane;
  }

  private renderPlay(view: SessionView): HTMLElement {
    const pane = el('div', 'play-pane');
    pane.appendChild(renderStatus(view));
    pane.appendChild(renderMeters(view));
    const board = renderBoard(view, view.humanRole === 'pusher' ? this.editor ?? undefined : undefined);
    pane.appendChild(board);

    if (view.humanRole === 'pusher' && this.editor) {
      pane.appendChild(this.renderSplitControls(view, board));
    } else {
      pane.appendChild(this.renderTauControls(view));
    }

    if (this.errorText) pane.appendChild(el('p', 'error-strip', this.errorText));
    pane.appendChild(renderTimeline(view.trace));
    return pane;
  }

  private renderSplitControls(view: SessionView, board: HTMLElement): HTMLElement {
    const editor = this.editor!;
    const controls = el('div', 'split-controls');

    // one numeric input per sand cell, mounted into the board cells
    for (const cell of view.arrangement.sand) {
      const key = cellKey(cell);
      const slot = board.querySelector<HTMLTableCellElement>(`td[data-key="${key}"]`);
      if (!slot) continue;
      const input = el('input', 'running-input');
      input.type = 'number';
      input.min = '0';
      input.max = String(cell.amount);
      input.step = 'any';
      input.value = String(editor.amount(key));
      input.addEventListener('input', () => {
        editor.setAmount(key, Number(input.value));
        this.render();
      });
      slot.appendChild(input);
      if (this.errorKey === key) slot.classList.add('server-rejected');
    }

    for (const issue of editor.issues()) {
      const slot = board.querySelector<HTMLTableCellElement>(`td[data-key="${issue.key}"]`);
      if (slot) {
        slot.classList.add('invalid');
        slot.appendChild(el('span', 'cell-error', issue.message));
      }
    }

    const runAll = el('button', 'preset-run-all', 'run all');
    runAll.addEventListener('click', () => {
      editor.runAll();
      this.render();
    });
    controls.appendChild(runAll);

    const hint = el('button', 'preset-hint', 'balanced direction');
    hint.addEventListener('click', () => void this.applyHint());
    controls.appendChild(hint);

    const submit = el('button', 'submit-split', 'push');
    submit.disabled = !editor.isValid() || editor.isEmpty();
    submit.addEventListener('click', () => void this.submitSplit());
    controls.appendChild(submit);

    return controls;
  }

  private renderTauControls(view: SessionView): HTMLElement {
    const controls = el('div', 'tau-controls');
    for (const label of view.legalLabels) {
      const button = el('button', 'tau-button', `τ${label}`);
      button.dataset.tau = String(label);
      button.disabled = view.pendingSplit === undefined;
      button.addEventListener('click', () => void this.chooseTau(label));
      controls.appendChild(button);
    }
    const hint = el('button', 'preset-hint', 'hint');
    hint.addEventListener('click', () => void this.applyHint());
    controls.appendChild(hint);
    return controls;
  }

  private renderFinished(view: SessionView): HTMLElement {
    const pane = el('div', 'finished-pane');
    pane.appendChild(renderStatus(view));
    pane.appendChild(el('h2', undefined, 'game over'));

    const summary = el('div', 'final-summary');
    summary.appendChild(el('span', 'final-harvest', `harvested ${view.totalHarvested}`));
    if (this.initialValue !== null) {
      summary.appendChild(el('span', 'initial-value', `e(x₀) = ${this.initialValue}`));
    }
    pane.appendChild(summary);

    const exportButton = el('button', 'export-trace', 'export trace');
    exportButton.addEventListener('click', () => downloadTrace(view));
    pane.appendChild(exportButton);

    pane.appendChild(renderTimeline(view.trace));
    return pane;
  }
}

// The server's InvalidMoveError messages name the cell as "(level, 'path')";
// map that back onto a board cell so the error lands where the user typed.
function guessCellFromDetail(detail: string): string | null {
  const match = detail.match(/\((\d+),\s*'([^']+)'\)/);
  return match ? `${match[1]}:${match[2]}` : null;
}

function downloadTrace(view: SessionView): void {
  const blob = new Blob([JSON.stringify({ sessionId: view.sessionId, trace: view.trace }, null, 2)], {
    type: 'application/json',
  });
  const url = URL.createObjectURL(blob);
  const link = document.createElement('a');
  link.href = url;
  link.download = `goldsand-${view.sessionId}.json`;
  link.click();
  URL.revokeObjectURL(url);
}
