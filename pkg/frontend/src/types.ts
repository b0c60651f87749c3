// Payload shapes of the /v1 service. The client renders these verbatim and
// never derives game numbers on its own.

export interface SandCell {
  level: number;
  path: string;
  amount: number;
}

export interface ArrangementPayload {
  kind: string;
  maxLevel: number;
  mode: 'continuous' | 'discrete';
  sand: SandCell[];
  r?: number;
}

export interface SplitPayload {
  running: SandCell[];
}

export interface RoundEntry {
  round: number;
  arrangementBefore: ArrangementPayload;
  split: SplitPayload;
  tau: number;
  harvested: number;
  destroyed: number;
}

export type HumanRole = 'pusher' | 'remover';
export type SessionStatus = 'active' | 'finished';

export interface SessionView {
  sessionId: string;
  kind: string;
  humanRole: HumanRole;
  status: SessionStatus;
  eps: number;
  arrangement: ArrangementPayload;
  round: number;
  totalHarvested: number;
  totalDestroyed: number;
  trace: RoundEntry[];
  legalLabels: number[];
  // present while the arrangement is nonempty
  e?: number;
  pStar?: number | number[];
  degeneracy?: string;
  iterations?: number;
  // present when the engine Pusher has a split on the table
  pendingSplit?: SplitPayload;
  // echoed by POST /move
  reply?: RoundEntry;
}

export interface ValueReport {
  e: number;
  pStar: number | number[];
  degeneracy: string;
  iterations: number;
}

export interface HintSplit {
  split: SplitPayload;
}

export interface HintTau {
  tau: number;
}

export type HintResponse = HintSplit | HintTau;

export interface CreateSessionRequest {
  arrangement: ArrangementPayload;
  humanRole?: HumanRole;
  eps?: number;
  seed?: number;
}

export function cellKey(cell: { level: number; path: string }): string {
  return `${cell.level}:${cell.path}`;
}
