import { beforeEach, describe, expect, it, vi } from 'vitest';

import { ApiError, ConnectionError, PlaygroundClient } from '../src/api';
import { App } from '../src/app';
import type { SessionView, SplitPayload } from '../src/types';
import { moveAccepted, moveOversand, sessionFixtures } from './fixtures';

interface StubClient {
  value: ReturnType<typeof vi.fn>;
  createSession: ReturnType<typeof vi.fn>;
  getSession: ReturnType<typeof vi.fn>;
  moveSplit: ReturnType<typeof vi.fn>;
  moveTau: ReturnType<typeof vi.fn>;
  hint: ReturnType<typeof vi.fn>;
  deleteSession: ReturnType<typeof vi.fn>;
}

function stubClient(): StubClient {
  return {
    value: vi.fn(),
    createSession: vi.fn(),
    getSession: vi.fn(),
    moveSplit: vi.fn(),
    moveTau: vi.fn(),
    hint: vi.fn(),
    deleteSession: vi.fn(),
  };
}

function mount(client: StubClient): { app: App; root: HTMLElement } {
  const root = document.createElement('div');
  document.body.appendChild(root);
  const app = new App(root, client as unknown as PlaygroundClient);
  app.start();
  return { app, root };
}

async function startAs(
  client: StubClient,
  view: SessionView,
): Promise<{ app: App; root: HTMLElement }> {
  client.createSession.mockResolvedValue(view);
  const mounted = mount(client);
  await mounted.app.createSession(view.arrangement, view.humanRole, view.eps);
  return mounted;
}

const pusherFixture = sessionFixtures.find((f) => f.name === 'pusher-regular-chip4')!;
const removerFixture = sessionFixtures.find((f) => f.name === 'remover-symmetric')!;

beforeEach(() => {
  document.body.textContent = '';
});

describe('playground app', () => {
  it('shows the setup screen until a session exists', () => {
    const { root } = mount(stubClient());
    expect(root.querySelector('.setup-pane')).not.toBeNull();
    expect(root.querySelector('.play-pane')).toBeNull();
    const area = root.querySelector<HTMLTextAreaElement>('.arrangement-json')!;
    expect(JSON.parse(area.value).sand).toEqual([{ level: 3, path: '0', amount: 4.0 }]);
  });

  it('renders the created session exactly as the server sent it', async () => {
    const client = stubClient();
    const { root } = await startAs(client, pusherFixture.view);
    expect(client.createSession).toHaveBeenCalledTimes(1);
    expect(root.querySelector('.play-pane')).not.toBeNull();
    expect(root.querySelector('.value-meter .reading')!.textContent).toBe(
      String(pusherFixture.view.e),
    );
    const slot = root.querySelector<HTMLTableCellElement>('td[data-key="3:0"]')!;
    expect(slot.dataset.amount).toBe('4');
  });

  it('blocks an over-sand split before it reaches the wire', async () => {
    const client = stubClient();
    const { app, root } = await startAs(client, pusherFixture.view);

    const input = root.querySelector<HTMLInputElement>('td[data-key="3:0"] .running-input')!;
    input.value = '99';
    input.dispatchEvent(new Event('input'));

    const submit = root.querySelector<HTMLButtonElement>('.submit-split')!;
    expect(submit.disabled).toBe(true);
    expect(root.querySelector('td[data-key="3:0"] .cell-error')!.textContent).toBe(
      'only 4 available',
    );

    await app.submitSplit();
    submit.click();
    expect(client.moveSplit).not.toHaveBeenCalled();
  });

  it('the hint preset fills the inputs with the engine split, verbatim', async () => {
    const client = stubClient();
    client.hint.mockResolvedValue(pusherFixture.hint);
    client.moveSplit.mockResolvedValue(moveAccepted.after);
    const { app, root } = await startAs(client, pusherFixture.view);

    root.querySelector<HTMLButtonElement>('.preset-hint')!.click();
    const hintSplit = (pusherFixture.hint as { split: SplitPayload }).split;
    await vi.waitFor(() => {
      for (const cell of hintSplit.running) {
        const input = root.querySelector<HTMLInputElement>(
          `td[data-key="${cell.level}:${cell.path}"] .running-input`,
        )!;
        expect(input.value).toBe(String(cell.amount));
      }
    });
    expect(root.querySelector<HTMLButtonElement>('.submit-split')!.disabled).toBe(false);

    await app.submitSplit();
    expect(client.moveSplit).toHaveBeenCalledWith(pusherFixture.view.sessionId, hintSplit);
  });

  it('a server rejection lands on the offending cell without changing state', async () => {
    const client = stubClient();
    client.moveSplit.mockRejectedValue(new ApiError(400, moveOversand.body.detail));
    const view = moveOversand.view;
    const { app, root } = await startAs(client, view);

    const input = root.querySelector<HTMLInputElement>('td[data-key="2:1"] .running-input')!;
    input.value = '1';
    input.dispatchEvent(new Event('input'));
    await app.submitSplit();

    expect(root.querySelector('.error-strip')!.textContent).toBe(moveOversand.body.detail);
    expect(root.querySelector('td[data-key="2:1"]')!.classList.contains('server-rejected')).toBe(
      true,
    );
    expect(app.store.current()).toEqual(view); // still the last acknowledged view
  });

  it('remover picks τ from the buttons and the hint routes through moveTau', async () => {
    const client = stubClient();
    client.moveTau.mockResolvedValue(moveAccepted.after);
    client.hint.mockResolvedValue(removerFixture.hint);
    const { root } = await startAs(client, removerFixture.view);

    const buttons = [...root.querySelectorAll<HTMLButtonElement>('.tau-button')];
    expect(buttons.map((b) => b.dataset.tau)).toEqual(
      removerFixture.view.legalLabels.map(String),
    );
    expect(buttons.every((b) => !b.disabled)).toBe(true);

    root.querySelector<HTMLButtonElement>('.preset-hint')!.click();
    await vi.waitFor(() => expect(client.moveTau).toHaveBeenCalled());
    const hintTau = (removerFixture.hint as { tau: number }).tau;
    expect(client.moveTau).toHaveBeenCalledWith(removerFixture.view.sessionId, hintTau);
  });

  it('a dropped connection pauses the game; resume re-syncs from the server', async () => {
    const client = stubClient();
    client.moveTau.mockRejectedValue(new ConnectionError('down'));
    const { app, root } = await startAs(client, removerFixture.view);

    await app.chooseTau(1);
    expect(root.querySelector('.paused-pane')).not.toBeNull();
    expect(root.querySelector('.paused-note')!.textContent).toContain('paused');

    client.getSession.mockResolvedValue(removerFixture.view);
    root.querySelector<HTMLButtonElement>('.resume')!.click();
    await vi.waitFor(() => expect(root.querySelector('.play-pane')).not.toBeNull());
    expect(client.getSession).toHaveBeenCalledWith(removerFixture.view.sessionId);
    expect(app.store.current()).toEqual(removerFixture.view);
  });

  it('a finished game shows the harvest next to the opening value', async () => {
    const client = stubClient();
    client.moveSplit.mockResolvedValue(moveAccepted.after);
    const { app, root } = await startAs(client, moveAccepted.before);

    const input = root.querySelector<HTMLInputElement>('td[data-key="1:1"] .running-input')!;
    input.value = '2';
    input.dispatchEvent(new Event('input'));
    await app.submitSplit();

    expect(root.querySelector('.finished-pane')).not.toBeNull();
    expect(root.querySelector('.final-harvest')!.textContent).toBe(
      `harvested ${moveAccepted.after.totalHarvested}`,
    );
    expect(root.querySelector('.initial-value')!.textContent).toBe(
      `e(x₀) = ${moveAccepted.before.e}`,
    );
    expect(root.querySelectorAll('.timeline-entry').length).toBe(1);
    expect(app.store.current()!.status).toBe('finished');
  });
});
