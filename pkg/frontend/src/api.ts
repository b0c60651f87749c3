import type {
  ArrangementPayload,
  CreateSessionRequest,
  HintResponse,
  RoundEntry,
  SessionView,
  SplitPayload,
  ValueReport,
} from './types.js';

// A 4xx/5xx answer from the service; `detail` is the server's own message,
// which the UI surfaces inline next to the offending control.
export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(`${status}: ${detail}`);
    this.name = 'ApiError';
  }
}

// fetch() itself failed: the service is unreachable, not complaining.
export class ConnectionError extends Error {
  constructor(public readonly reason: unknown) {
    super('service unreachable');
    this.name = 'ConnectionError';
  }
}

async function parseDetail(response: Response): Promise<string> {
  try {
    const body = await response.json();
    if (body && typeof body.detail === 'string') return body.detail;
    return JSON.stringify(body);
  } catch {
    return response.statusText || `HTTP ${response.status}`;
  }
}

export class PlaygroundClient {
  constructor(private readonly baseUrl: string = '') {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    let response: Response;
    try {
      response = await fetch(this.baseUrl + path, {
        method,
        headers: body === undefined ? undefined : { 'Content-Type': 'application/json' },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new ConnectionError(err);
    }
    if (!response.ok) {
      throw new ApiError(response.status, await parseDetail(response));
    }
    return (await response.json()) as T;
  }

  value(arrangement: ArrangementPayload, tol?: number): Promise<ValueReport> {
    return this.request('POST', '/v1/value', tol === undefined ? { arrangement } : { arrangement, tol });
  }

  createSession(req: CreateSessionRequest): Promise<SessionView> {
    return this.request('POST', '/v1/sessions', req);
  }

  getSession(sessionId: string): Promise<SessionView> {
    return this.request('GET', `/v1/sessions/${sessionId}`);
  }

  moveSplit(sessionId: string, split: SplitPayload): Promise<SessionView & { reply: RoundEntry }> {
    return this.request('POST', `/v1/sessions/${sessionId}/move`, { split });
  }

  moveTau(sessionId: string, tau: number): Promise<SessionView & { reply: RoundEntry }> {
    return this.request('POST', `/v1/sessions/${sessionId}/move`, { tau });
  }

  hint(sessionId: string): Promise<HintResponse> {
    return this.request('POST', `/v1/sessions/${sessionId}/hint`);
  }

  deleteSession(sessionId: string): Promise<{ deleted: string }> {
    return this.request('DELETE', `/v1/sessions/${sessionId}`);
  }
}
