import { readFileSync, readdirSync } from 'node:fs';
import path from 'node:path';
import { fileURLToPath } from 'node:url';

import type { HintResponse, SessionView } from '../src/types';

const dir = path.join(path.dirname(fileURLToPath(import.meta.url)), 'fixtures');

export interface SessionFixture {
  name: string;
  request: unknown;
  view: SessionView;
  hint: HintResponse;
  hintStatus: number;
}

function load<T>(name: string): T {
  return JSON.parse(readFileSync(path.join(dir, `${name}.json`), 'utf-8')) as T;
}

export const sessionFixtures: SessionFixture[] = readdirSync(dir)
  .filter((f) => f.startsWith('pusher-') || f.startsWith('remover-'))
  .sort()
  .map((f) => load<SessionFixture>(f.replace(/\.json$/, '')));

export const moveAccepted = load<{ before: SessionView; after: SessionView }>('move-accepted');

export const moveOversand = load<{
  view: SessionView;
  status: number;
  body: { detail: string };
}>('move-oversand-400');

export const valueReport = load<{ status: number; body: Record<string, unknown> }>('value-report');
